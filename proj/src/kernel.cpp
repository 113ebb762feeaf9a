#include "nordic/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace nordic {

KernelSpec KernelSpec::rbf(double width) {
  KernelSpec spec{KernelKind::kRbf, width};
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::linear() { return KernelSpec{KernelKind::kLinear, 0.0}; }

void KernelSpec::validate() const {
  if (kind == KernelKind::kRbf && !(width > 0.0 && std::isfinite(width))) {
    throw std::invalid_argument("RBF width must be positive and finite");
  }
}

std::string KernelSpec::name() const {
  if (kind == KernelKind::kLinear) return "linear";
  std::ostringstream ss;
  ss.precision(17);
  ss << "rbf(" << width << ")";
  return ss.str();
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& rows_a, const Eigen::MatrixXd& rows_b, const KernelSpec& spec) {
  if (rows_a.cols() != rows_b.cols()) {
    throw std::invalid_argument("gram: feature dimensions differ (" + std::to_string(rows_a.cols()) + " vs " +
                                std::to_string(rows_b.cols()) + ")");
  }
  spec.validate();
  Eigen::MatrixXd inner = rows_a * rows_b.transpose();
  if (spec.kind == KernelKind::kLinear) return inner;

  const Eigen::VectorXd sq_a = rows_a.rowwise().squaredNorm();
  const Eigen::VectorXd sq_b = rows_b.rowwise().squaredNorm();
  const double scale = -1.0 / (2.0 * spec.width * spec.width);
  for (Eigen::Index j = 0; j < inner.cols(); ++j) {
    for (Eigen::Index i = 0; i < inner.rows(); ++i) {
      // Expansion can go slightly negative from cancellation.
      const double dist2 = std::max(0.0, sq_a[i] + sq_b[j] - 2.0 * inner(i, j));
      inner(i, j) = std::exp(scale * dist2);
    }
  }
  if (&rows_a == &rows_b) {
    inner.diagonal().setOnes();
    inner = (0.5 * (inner + inner.transpose())).eval();
  }
  return inner;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::array<double, 3> bandwidth_candidates(const Eigen::MatrixXd& rows) {
  const Eigen::Index n = rows.rows();
  if (n < 2) throw std::invalid_argument("bandwidth candidates need at least two points");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) dist.push_back((rows.row(i) - rows.row(j)).norm());
  }
  std::sort(dist.begin(), dist.end());
  std::array<double, 3> out{quantile_sorted(dist, 0.1), quantile_sorted(dist, 0.5), quantile_sorted(dist, 0.9)};
  if (!(out[0] > 0.0)) throw std::invalid_argument("bandwidth candidates: zero distance quantile");
  return out;
}

double ridge_jitter(const Eigen::MatrixXd& gram_matrix) {
  const double n = static_cast<double>(gram_matrix.rows());
  if (n == 0) return 0.0;
  return 1e-8 * gram_matrix.trace() / n;
}

Eigen::MatrixXd pivoted_cholesky(const Eigen::MatrixXd& gram_matrix, double tol, int max_rank,
                                 std::vector<Eigen::Index>* pivots) {
  const Eigen::Index n = gram_matrix.rows();
  Eigen::VectorXd diag = gram_matrix.diagonal();
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  Eigen::MatrixXd l(n, std::min<Eigen::Index>(n, max_rank + 1));
  int rank = 0;
  if (pivots) pivots->clear();
  while (rank < n) {
    Eigen::Index pivot = -1;
    double best = tol;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!used[i] && diag[i] > best) {
        best = diag[i];
        pivot = i;
      }
    }
    if (pivot < 0) break;
    if (rank >= max_rank) return {};
    used[pivot] = 1;
    if (pivots) pivots->push_back(pivot);
    Eigen::VectorXd col = gram_matrix.col(pivot);
    if (rank > 0) col.noalias() -= l.leftCols(rank) * l.row(pivot).head(rank).transpose();
    col /= std::sqrt(best);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (used[i] && i != pivot) col[i] = 0.0;
    }
    l.col(rank) = col;
    diag -= col.cwiseAbs2();
    diag[pivot] = 0.0;
    ++rank;
  }
  return l.leftCols(rank);
}

}  // namespace nordic
