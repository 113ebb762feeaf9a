"""Noncrossing ordinal classification (NORDIC-0/1/2) with BSVM and CK baselines."""
from ._nordic import (
    Model,
    TrainingError,
    bandwidth_candidates,
    cost_matrix,
    generate,
    load_balance_scale,
    run_experiment,
    train,
    tune,
    weighted_error,
)

__all__ = [
    "Model",
    "TrainingError",
    "bandwidth_candidates",
    "cost_matrix",
    "generate",
    "load_balance_scale",
    "run_experiment",
    "train",
    "tune",
    "weighted_error",
]
