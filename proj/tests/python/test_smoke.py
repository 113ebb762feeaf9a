import json
from pathlib import Path

import numpy as np
import pytest

import nordic

DATA = Path(__file__).resolve().parents[1] / "data" / "balance-scale.data"


@pytest.fixture(scope="module")
def toy():
    x, y, k = nordic.generate("nonlinear3", 60, d=2, sigma=0.2, seed=3)
    return np.asarray(x), list(y), k


def test_generate_shapes(toy):
    x, y, k = toy
    assert x.shape == (60, 2)
    assert len(y) == 60
    assert k == 3
    assert set(y) <= {1, 2, 3}


def test_generate_is_seeded():
    a = nordic.generate("donut", 50, seed=9)
    b = nordic.generate("donut", 50, seed=9)
    assert np.array_equal(a[0], b[0]) and a[1] == b[1]


def test_balance_loader():
    _, y, k = nordic.load_balance_scale(str(DATA))
    assert k == 3
    assert [y.count(c) for c in (1, 2, 3)] == [288, 49, 288]


@pytest.mark.parametrize("method", ["nordic0", "nordic1", "nordic2", "bsvm", "ck"])
def test_train_predict(toy, method):
    x, y, _ = toy
    width = nordic.bandwidth_candidates(x)[1]
    model = nordic.train(x, y, method=method, penalty=1.0, width=width)
    labels, ambiguous, values = model.predict_full(x)
    assert len(labels) == 60
    assert values.shape == (60, 2)
    assert model.predict(x) == labels
    if method != "bsvm":
        assert not any(ambiguous)
    if method in ("nordic0", "nordic1", "ck"):
        assert model.crossings(x) == 0


def test_json_round_trip(toy):
    x, y, _ = toy
    model = nordic.train(x, y, method="nordic1", penalty=2.0, width=1.0)
    again = nordic.Model.from_json(model.to_json())
    assert again.predict(x) == model.predict(x)
    assert json.loads(model.to_json())["method"] == "nordic1"


def test_tune_and_costs(toy):
    x, y, _ = toy
    xt, yt, _ = nordic.generate("nonlinear3", 60, sigma=0.2, seed=4)
    model, penalty, width, score = nordic.tune(x, y, xt, yt, method="bsvm", penalties=[0.5, 2.0], cost="zero-one")
    assert penalty in (0.5, 2.0)
    assert width > 0
    assert score == pytest.approx(nordic.weighted_error(model.predict(xt), list(yt)))
    assert np.asarray(nordic.cost_matrix("donut-costs")).shape == (3, 3)


def test_training_error_is_raised():
    x = np.array([[0.0], [1.0], [2.0]])
    with pytest.raises(nordic.TrainingError):
        nordic.train(x, [1, 1, 1], num_classes=3)


def test_run_experiment():
    csv, summary = nordic.run_experiment(
        'n_train = 30\nn_tune = 30\nn_test = 100\nmethods = ["nordic1", "bsvm"]\ngrid_penalty = [1.0]\n'
    )
    assert csv.splitlines()[0].startswith("case,n_train")
    assert len(csv.splitlines()) == 3
    assert "nordic1" in json.loads(summary)["cases"][0]["methods"]
