#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace nordic {

enum class KernelKind { kRbf, kLinear };

// RBF: exp(-|x - x'|^2 / (2 width^2)). Linear: <x, x'>.
struct KernelSpec {
  KernelKind kind = KernelKind::kRbf;
  double width = 1.0;

  static KernelSpec rbf(double width);
  static KernelSpec linear();

  bool is_rbf() const { return kind == KernelKind::kRbf; }
  void validate() const;
  std::string name() const;
};

// Entry (i, j) = k(rows_a[i], rows_b[j]).
Eigen::MatrixXd gram(const Eigen::MatrixXd& rows_a, const Eigen::MatrixXd& rows_b, const KernelSpec& spec);
inline Eigen::MatrixXd gram(const Eigen::MatrixXd& rows, const KernelSpec& spec) { return gram(rows, rows, spec); }

// 10%, 50% and 90% quantiles (linear interpolation) of the pairwise
// Euclidean distances between rows.
std::array<double, 3> bandwidth_candidates(const Eigen::MatrixXd& rows);

// Ridge used wherever a Gram inverse or full rank is required:
// 1e-8 * trace / n.
double ridge_jitter(const Eigen::MatrixXd& gram_matrix);

// Diagonally pivoted Cholesky: L (n x r) with gram ~ L L', stopping once the
// largest residual diagonal falls below tol. Returns an empty matrix if the
// rank would exceed max_rank. `pivots` receives the row chosen for each column.
Eigen::MatrixXd pivoted_cholesky(const Eigen::MatrixXd& gram_matrix, double tol, int max_rank,
                                 std::vector<Eigen::Index>* pivots = nullptr);

}  // namespace nordic
