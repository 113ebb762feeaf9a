#include "nordic/eval.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace nordic {

namespace {
void check_lengths(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("prediction and truth lengths differ");
  if (predicted.empty()) throw std::invalid_argument("empty prediction set");
}

void check_label(int label, int num_classes) {
  if (label < 1 || label > num_classes) {
    throw std::out_of_range("label " + std::to_string(label) + " outside 1.." + std::to_string(num_classes));
  }
}
}  // namespace

CostMatrix::CostMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 2) {
    throw std::invalid_argument("cost matrix must be square with K >= 2");
  }
  for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
    if (entries_(i, i) != 0.0) throw std::invalid_argument("cost matrix diagonal must be zero");
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
      if (!(entries_(i, j) >= 0.0) || !std::isfinite(entries_(i, j))) {
        throw std::invalid_argument("cost matrix entries must be finite and nonnegative");
      }
    }
  }
}

CostMatrix CostMatrix::zero_one(int num_classes) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Ones(num_classes, num_classes);
  e.diagonal().setZero();
  return CostMatrix(e);
}

CostMatrix CostMatrix::preset(std::string_view name, int num_classes) {
  if (name == "zero-one") return zero_one(num_classes);
  if (name != "donut-costs" && name != "balance-costs") {
    throw std::invalid_argument("unknown cost preset '" + std::string(name) +
                                "' (expected zero-one, donut-costs, balance-costs)");
  }
  if (num_classes != 3) throw std::invalid_argument(std::string(name) + " is defined for K=3 only");
  Eigen::MatrixXd e(3, 3);
  if (name == "donut-costs") {
    // rows: predicted, columns: truth
    e << 0, 2, 3,
         1, 0, 1,
         1, 2, 0;
  } else {
    e << 0, 1, 2,
         1, 0, 1,
         2, 1, 0;
  }
  return CostMatrix(e);
}

CostMatrix CostMatrix::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read cost file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    for (char& ch : line) {
      if (ch == ',') ch = ' ';
    }
    std::istringstream fields(line);
    std::vector<double> row;
    double v = 0.0;
    while (fields >> v) row.push_back(v);
    if (!fields.eof()) throw std::runtime_error("cost file '" + path + "': non-numeric entry");
    if (!row.empty()) rows.push_back(std::move(row));
  }
  const auto k = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd e(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != k) throw std::runtime_error("cost file '" + path + "' is not square");
    for (Eigen::Index j = 0; j < k; ++j) e(i, j) = rows[i][j];
  }
  return CostMatrix(e);
}

double error_rate(std::span<const int> predicted, std::span<const int> truth) {
  check_lengths(predicted, truth);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

double weighted_error(std::span<const int> predicted, std::span<const int> truth, const CostMatrix& cost) {
  check_lengths(predicted, truth);
  double total = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    check_label(predicted[i], cost.num_classes());
    check_label(truth[i], cost.num_classes());
    total += cost(predicted[i], truth[i]);
  }
  return total / static_cast<double>(truth.size());
}

double distance_loss(std::span<const int> predicted, std::span<const int> truth) {
  check_lengths(predicted, truth);
  double total = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) total += std::abs(predicted[i] - truth[i]);
  return total / static_cast<double>(truth.size());
}

Eigen::MatrixXd ConfusionMatrix::normalized() const {
  Eigen::MatrixXd out = counts.cast<double>();
  for (Eigen::Index t = 0; t < out.cols(); ++t) {
    const double sum = out.col(t).sum();
    if (sum > 0.0) out.col(t) /= sum;
  }
  return out;
}

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth, int num_classes) {
  check_lengths(predicted, truth);
  ConfusionMatrix c{Eigen::MatrixXi::Zero(num_classes, num_classes)};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    check_label(predicted[i], num_classes);
    check_label(truth[i], num_classes);
    ++c.counts(predicted[i] - 1, truth[i] - 1);
  }
  return c;
}

}  // namespace nordic
