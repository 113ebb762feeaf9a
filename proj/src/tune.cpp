#include "nordic/tune.hpp"

#include "nordic/predict.hpp"

#include <algorithm>
#include <cmath>

namespace nordic {

std::vector<double> TuneGrid::default_penalties() {
  std::vector<double> v;
  for (int e = -4; e <= 4; ++e) v.push_back(std::ldexp(1.0, e));
  return v;
}

TuneGrid TuneGrid::defaults(const Eigen::MatrixXd& x) {
  const auto q = bandwidth_candidates(x);
  return {default_penalties(), {q.begin(), q.end()}};
}

int TuneResult::failed() const {
  return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](const TuneCell& c) { return !c.ok; }));
}

TuneResult tune(const OrdinalDataset& train, const OrdinalDataset& tune_set, Method method, const TuneGrid& grid,
                const CostMatrix& metric, const HyperParams& base, const TrainOptions& options) {
  std::vector<double> penalties = grid.penalties;
  std::vector<double> widths = grid.widths;
  if (!base.kernel.is_rbf()) widths = {0.0};
  if (penalties.empty() || widths.empty()) throw std::invalid_argument("tuning grid is empty");
  if (tune_set.size() == 0) throw std::invalid_argument("tuning set is empty");
  if (metric.num_classes() != train.num_classes()) throw std::invalid_argument("metric/class count mismatch");
  std::sort(penalties.begin(), penalties.end());
  std::sort(widths.begin(), widths.end());

  TuneResult result;
  bool found = false;
  std::string last_error;
  for (double penalty : penalties) {
    for (double width : widths) {
      TuneCell cell;
      cell.penalty = penalty;
      cell.width = width;
      HyperParams hp = base;
      hp.set_penalty(method, penalty);
      if (hp.kernel.is_rbf()) hp.kernel.width = width;
      try {
        const OrdinalModel model = nordic::train(train, method, hp, options);
        const PredictionResult pr = predict(model, tune_set.features());
        cell.score = weighted_error(pr.labels, tune_set.labels(), metric);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
        last_error = cell.error;
      }
      if (cell.ok && (!found || cell.score < result.best_score)) {
        found = true;
        result.best = hp;
        result.best_score = cell.score;
      }
      result.cells.push_back(std::move(cell));
    }
  }
  if (!found) throw TrainingError("every tuning cell failed; last error: " + last_error);
  return result;
}

}  // namespace nordic
