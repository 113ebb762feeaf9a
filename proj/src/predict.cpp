#include "nordic/predict.hpp"

#include "nordic/data.hpp"
#include "nordic/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace nordic {

namespace {
constexpr Eigen::Index kChunk = 2048;
}

Eigen::MatrixXd decision_values(const OrdinalModel& model, const Eigen::MatrixXd& x) {
  const Eigen::Index m = model.num_classes - 1;
  if (model.omega.rows() != m || model.bias.size() != m) throw std::invalid_argument("model: omega/bias shape mismatch");
  if (x.cols() != model.input_dim()) {
    throw std::invalid_argument("input has " + std::to_string(x.cols()) + " features, model expects " +
                                std::to_string(model.input_dim()));
  }
  Eigen::MatrixXd values(m, x.rows());
  if (model.linear_primal()) {
    values.noalias() = model.omega * x.transpose();
  } else {
    for (Eigen::Index start = 0; start < x.rows(); start += kChunk) {
      const Eigen::Index len = std::min(kChunk, x.rows() - start);
      values.middleCols(start, len).noalias() = model.omega * gram(model.support, x.middleRows(start, len), model.kernel);
    }
  }
  values.colwise() += model.bias;
  return values;
}

double PredictionResult::ambiguity_rate() const {
  if (ambiguous.empty()) return 0.0;
  return static_cast<double>(std::count(ambiguous.begin(), ambiguous.end(), 1)) / static_cast<double>(ambiguous.size());
}

PredictionResult aggregate(const Eigen::MatrixXd& values) {
  PredictionResult r;
  r.decision_values = values;
  const Eigen::Index cols = values.cols();
  r.sign_profile.resize(values.rows(), cols);
  r.labels.resize(cols);
  r.ambiguous.assign(cols, 0);
  for (Eigen::Index j = 0; j < cols; ++j) {
    int positives = 0;
    for (Eigen::Index k = 0; k < values.rows(); ++k) {
      const int s = values(k, j) < 0.0 ? -1 : 1;
      r.sign_profile(k, j) = s;
      positives += s > 0;
      if (k > 0 && s > r.sign_profile(k - 1, j)) r.ambiguous[j] = 1;
    }
    r.labels[j] = 1 + positives;
  }
  return r;
}

PredictionResult predict(const OrdinalModel& model, const Eigen::MatrixXd& x) {
  return aggregate(decision_values(model, x));
}

CrossingReport check_noncrossing(const Eigen::MatrixXd& values, CrossingMode mode, double tol) {
  CrossingReport report;
  report.worst_gap = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    for (Eigen::Index k = 0; k + 1 < values.rows(); ++k) {
      const double gap = values(k + 1, j) - values(k, j);
      report.worst_gap = std::max(report.worst_gap, gap);
      bool bad = false;
      if (mode == CrossingMode::kValues) {
        bad = values(k, j) < values(k + 1, j) - tol;
      } else {
        bad = values(k, j) < 0.0 && values(k + 1, j) >= 0.0;
      }
      if (bad) {
        ++report.violations;
        report.locations.emplace_back(static_cast<int>(j), static_cast<int>(k + 1));
      }
    }
  }
  if (!std::isfinite(report.worst_gap)) report.worst_gap = 0.0;
  return report;
}

CrossingReport check_noncrossing(const OrdinalModel& model, const Eigen::MatrixXd& probes, CrossingMode mode,
                                 double tol) {
  if (probes.rows() == 0) throw std::invalid_argument("probe set is empty");
  return check_noncrossing(decision_values(model, probes), mode, tol);
}

Eigen::MatrixXd bounding_box_probes(const Eigen::MatrixXd& x, int count, std::uint64_t seed) {
  if (x.rows() == 0) throw std::invalid_argument("cannot build probes from an empty matrix");
  const Eigen::RowVectorXd lo = x.colwise().minCoeff();
  const Eigen::RowVectorXd hi = x.colwise().maxCoeff();
  Rng rng(seed);
  Eigen::MatrixXd probes(count, x.cols());
  for (int i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) probes(i, j) = rng.uniform(lo[j], hi[j]);
  }
  return probes;
}

int bayes_ordinal(std::span<const double> eta) {
  if (eta.empty()) throw std::invalid_argument("empty probability vector");
  double total = 0.0;
  for (double v : eta) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("probabilities must be finite and nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to 1");
  double cumulative = 0.0;
  for (std::size_t k = 0; k < eta.size(); ++k) {
    cumulative += eta[k];
    if (cumulative >= 0.5) return static_cast<int>(k) + 1;
  }
  return static_cast<int>(eta.size());
}

double bayes_risk_estimate(const BayesOracle& oracle, const Eigen::MatrixXd& points, const CostMatrix& cost) {
  if (points.rows() == 0) throw std::invalid_argument("no points for the Bayes risk estimate");
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const std::vector<double> eta = oracle(points.row(i));
    if (static_cast<int>(eta.size()) != cost.num_classes()) throw std::invalid_argument("oracle/cost class mismatch");
    const int decision = bayes_ordinal(eta);
    for (int k = 0; k < cost.num_classes(); ++k) total += eta[k] * cost(decision, k + 1);
  }
  return total / static_cast<double>(points.rows());
}

BayesOracle nonlinear3_oracle() {
  return [](const Eigen::RowVectorXd& x) {
    const auto p = nonlinear3_probabilities(x[0], x[1]);
    return std::vector<double>(p.begin(), p.end());
  };
}

void write_predictions_csv(std::ostream& out, const PredictionResult& result) {
  const Eigen::Index m = result.decision_values.rows();
  out << "index,label,ambiguous";
  for (Eigen::Index k = 0; k < m; ++k) out << ",f" << k + 1;
  out << '\n' << std::setprecision(17);
  for (int j = 0; j < result.size(); ++j) {
    out << j << ',' << result.labels[j] << ',' << int(result.ambiguous[j]);
    for (Eigen::Index k = 0; k < m; ++k) out << ',' << result.decision_values(k, j);
    out << '\n';
  }
}

void write_predictions_csv(const std::string& path, const PredictionResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write predictions file '" + path + "'");
  write_predictions_csv(out, result);
}

}  // namespace nordic
