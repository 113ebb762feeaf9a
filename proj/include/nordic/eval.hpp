#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>

namespace nordic {

// entry(p, t): cost of predicting class p+1 when the truth is t+1.
class CostMatrix {
 public:
  explicit CostMatrix(Eigen::MatrixXd entries);

  static CostMatrix zero_one(int num_classes);
  // zero-one, donut-costs (K=3), balance-costs (K=3).
  static CostMatrix preset(std::string_view name, int num_classes);
  // Whitespace or comma separated K x K matrix, one row per line.
  static CostMatrix from_file(const std::string& path);

  int num_classes() const { return static_cast<int>(entries_.rows()); }
  double operator()(int predicted, int truth) const { return entries_(predicted - 1, truth - 1); }
  const Eigen::MatrixXd& entries() const { return entries_; }

 private:
  Eigen::MatrixXd entries_;
};

double error_rate(std::span<const int> predicted, std::span<const int> truth);
double weighted_error(std::span<const int> predicted, std::span<const int> truth, const CostMatrix& cost);
double distance_loss(std::span<const int> predicted, std::span<const int> truth);

// counts(p, t): points with truth t+1 predicted as p+1.
struct ConfusionMatrix {
  Eigen::MatrixXi counts;
  int total() const { return counts.sum(); }
  // Columns divided by their sums; empty columns stay zero.
  Eigen::MatrixXd normalized() const;
};

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth, int num_classes);

}  // namespace nordic
