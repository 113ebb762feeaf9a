#pragma once

#include "nordic/eval.hpp"
#include "nordic/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace nordic {

// (K-1) x m matrix of f_k(x) over the rows of x.
Eigen::MatrixXd decision_values(const OrdinalModel& model, const Eigen::MatrixXd& x);

struct PredictionResult {
  Eigen::MatrixXd decision_values;
  std::vector<int> labels;
  std::vector<char> ambiguous;
  Eigen::MatrixXi sign_profile;  // +1 / -1, sign(0) = +1

  int size() const { return static_cast<int>(labels.size()); }
  double ambiguity_rate() const;
};

// label = 1 + number of positive signs; a column is ambiguous when its sign
// profile is not nonincreasing.
PredictionResult aggregate(const Eigen::MatrixXd& values);
PredictionResult predict(const OrdinalModel& model, const Eigen::MatrixXd& x);

enum class CrossingMode { kValues, kSigns };

struct CrossingReport {
  int violations = 0;
  double worst_gap = 0.0;                         // largest f_{k+1} - f_k seen
  std::vector<std::pair<int, int>> locations;     // (point, k) with k 1-based
};

// Values: counts f_k < f_{k+1} - tol. Signs: counts adjacent sign inversions.
CrossingReport check_noncrossing(const Eigen::MatrixXd& values, CrossingMode mode, double tol = 1e-6);
CrossingReport check_noncrossing(const OrdinalModel& model, const Eigen::MatrixXd& probes, CrossingMode mode,
                                 double tol = 1e-6);

// `count` uniform points in the bounding box of the rows of x.
Eigen::MatrixXd bounding_box_probes(const Eigen::MatrixXd& x, int count, std::uint64_t seed);

// Smallest k with cumulative probability >= 1/2.
int bayes_ordinal(std::span<const double> eta);

using BayesOracle = std::function<std::vector<double>(const Eigen::RowVectorXd&)>;

// Mean over points of sum_k eta_k(x) cost(bayes(x), k).
double bayes_risk_estimate(const BayesOracle& oracle, const Eigen::MatrixXd& points, const CostMatrix& cost);

// Posteriors of the three-class generator at its noiseless coordinates.
BayesOracle nonlinear3_oracle();

// index,label,ambiguous,f1..f{K-1}
void write_predictions_csv(std::ostream& out, const PredictionResult& result);
void write_predictions_csv(const std::string& path, const PredictionResult& result);

}  // namespace nordic
