#pragma once

#include "nordic/data.hpp"
#include "nordic/eval.hpp"
#include "nordic/model.hpp"
#include "nordic/nordic.hpp"

#include <string>
#include <vector>

namespace nordic {

// penalties: C, or lambda for NORDIC-2. widths: RBF widths, ignored for the
// linear kernel.
struct TuneGrid {
  std::vector<double> penalties;
  std::vector<double> widths;

  // 2^-4, 2^-3, ..., 2^4
  static std::vector<double> default_penalties();
  // default penalties x the 10/50/90% pairwise-distance quantiles of x
  static TuneGrid defaults(const Eigen::MatrixXd& x);
};

struct TuneCell {
  double penalty = 0.0;
  double width = 0.0;
  bool ok = false;
  double score = 0.0;
  std::string error;
};

struct TuneResult {
  HyperParams best;
  double best_score = 0.0;
  std::vector<TuneCell> cells;  // penalty-major, ascending

  int failed() const;
};

// Trains on `train` for every grid cell and scores the mean cost on
// `tune_set`. Ties go to the smaller penalty, then the smaller width.
// Failing cells are recorded and skipped; throws TrainingError if all fail.
TuneResult tune(const OrdinalDataset& train, const OrdinalDataset& tune_set, Method method, const TuneGrid& grid,
                const CostMatrix& metric, const HyperParams& base = {}, const TrainOptions& options = {});

}  // namespace nordic
