#pragma once

#include "nordic/data.hpp"
#include "nordic/milp.hpp"
#include "nordic/model.hpp"
#include "nordic/qp.hpp"

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nordic {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DualVariant { kNordic0, kNordic1 };

// theta = (alpha; phi; gamma): alpha has K-1 blocks of n, phi K-2 blocks of
// n, gamma K-2 entries. Block k of alpha pairs with subproblem k+1.
struct DualSolution {
  int n = 0;
  int num_classes = 2;
  Eigen::VectorXd alpha, phi, gamma;

  auto alpha_block(int k) const { return alpha.segment(static_cast<Eigen::Index>(k) * n, n); }
  auto phi_block(int k) const { return phi.segment(static_cast<Eigen::Index>(k) * n, n); }
};

// Throws TrainingError naming k when subproblem k has a single sign.
void check_subproblems(const OrdinalDataset& data);

// Minimization form of the Wolfe dual: Q = R'(I (x) K)R, c = -1 on alpha,
// one equality per subproblem, 0 <= alpha <= C, phi >= 0, gamma >= 0.
// NORDIC-0 works with J = K + eps I and weights the phi block by J^-1.
// With `gram_factor` L (K ~ L L', NORDIC-1 only) the Hessian is returned in
// factored form.
QpProblem assemble_dual(const OrdinalDataset& data, const Eigen::MatrixXd& gram, double C, DualVariant variant,
                        const Eigen::MatrixXd* gram_factor = nullptr);

// Splits theta and snaps multipliers within 1e-10 of a bound onto it.
DualSolution split_dual(const Eigen::VectorXd& theta, int n, int num_classes, double C);

// Equality-row residual of a dual point (inf-norm).
double dual_equality_residual(const DualSolution& dual, const OrdinalDataset& data);

// omega_k = Y_k alpha_k + T (D phi)_k with T = I (NORDIC-1) or J^-1
// (NORDIC-0). Rows of the result are omega_k.
Eigen::MatrixXd recover_omega(const DualSolution& dual, DualVariant variant, const OrdinalDataset& data,
                              const Eigen::MatrixXd& gram);

// Canonical bias: with g_k = K omega_k fixed, minimize C sum xi subject to
// the hinge rows and (when ordered) b_k >= b_{k+1}. Solved through its
// (K-1)-row dual; b is read from the equality multipliers.
Eigen::VectorXd recover_bias(const OrdinalDataset& data, const Eigen::MatrixXd& scores, double C, bool ordered = true);

// Same LP solved directly over (b, xi); slower, used to cross-check.
Eigen::VectorXd recover_bias_primal(const OrdinalDataset& data, const Eigen::MatrixXd& scores, double C,
                                    bool ordered = true);

// Diagnostic support-vector route: per subproblem, the mean of
// y_i - g_k(x_i) over 1e-6 C < alpha_ki < C - 1e-6 C; nullopt when there is
// no interior support vector.
std::vector<std::optional<double>> recover_bias_sv(const DualSolution& dual, const OrdinalDataset& data,
                                                   const Eigen::MatrixXd& scores, double C);

// Hinge objective C sum_k sum_i (1 - y f)_+ for given scores and bias.
double hinge_total(const OrdinalDataset& data, const Eigen::MatrixXd& scores, const Eigen::VectorXd& bias, double C);

struct Nordic2Config {
  // Big-M constants; zero selects the data-driven default.
  double M1 = 0.0;
  double M2 = 0.0;
  bool reduce_binaries = false;
  // Strict margin on the logical rows so signs hold under sign(0) = +1.
  double margin = 1e-6;
  MilpOptions milp;
};

struct TrainOptions {
  QpOptions qp;
  Nordic2Config nordic2;
  // Dual problems with at least this many variables try the low-rank
  // Hessian path.
  int low_rank_min_vars = 1200;
};

// design: gram over the training points (kernel) or the feature matrix
// (linear kernel). Variable order: omega+, omega-, b, xi, z.
MilpProblem assemble_milp_nordic2(const OrdinalDataset& data, const Eigen::MatrixXd& design, double lambda,
                                  const Nordic2Config& config);

// 10 (1 + max_i sum_j |design_ij|) max(1, |omega|_inf, |b|_inf), where
// (omega, b) solves the same L1 problem without the logical rows.
double default_big_m(const OrdinalDataset& data, const Eigen::MatrixXd& design, double lambda);

OrdinalModel train_nordic0(const OrdinalDataset& data, const HyperParams& params, const TrainOptions& options = {});
OrdinalModel train_nordic1(const OrdinalDataset& data, const HyperParams& params, const TrainOptions& options = {});
OrdinalModel train_nordic2(const OrdinalDataset& data, const HyperParams& params, const TrainOptions& options = {});
OrdinalModel train_bsvm(const OrdinalDataset& data, const HyperParams& params, const TrainOptions& options = {});
OrdinalModel train_ck(const OrdinalDataset& data, const HyperParams& params, const TrainOptions& options = {});
OrdinalModel train(const OrdinalDataset& data, Method method, const HyperParams& params,
                   const TrainOptions& options = {});

}  // namespace nordic
