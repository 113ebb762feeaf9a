#include "nordic/nordic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nordic {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string context(const char* method, const OrdinalDataset& data) {
  return std::string(method) + " (n=" + std::to_string(data.size()) + ", K=" + std::to_string(data.num_classes()) + ")";
}

// Low-rank factor of the Gram matrix when it is small enough to pay off.
Eigen::MatrixXd gram_factor(const OrdinalDataset& data, const Eigen::MatrixXd& gram, const KernelSpec& kernel,
                            int vars, int blocks, const TrainOptions& options) {
  if (vars < options.low_rank_min_vars) return {};
  const int max_rank = static_cast<int>(options.qp.low_rank_fraction * vars / blocks) - 1;
  if (max_rank < 1) return {};
  if (!kernel.is_rbf()) {
    if (data.dim() > max_rank) return {};
    return data.features();
  }
  return pivoted_cholesky(gram, 1e-12 * gram.diagonal().maxCoeff(), max_rank);
}

OrdinalModel package(Method method, const OrdinalDataset& data, const HyperParams& params, const Eigen::MatrixXd& omega,
                     const Eigen::VectorXd& bias) {
  OrdinalModel model;
  model.method = method;
  model.kernel = params.kernel;
  model.num_classes = data.num_classes();
  model.bias = bias;
  if (params.kernel.is_rbf()) {
    model.support = data.features();
    model.omega = omega;
  } else {
    model.omega = omega * data.features();
  }
  return model;
}

double quadratic_term(const Eigen::MatrixXd& omega, const Eigen::MatrixXd& scores) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < omega.rows(); ++k) total += 0.5 * omega.row(k).dot(scores.row(k));
  return total;
}

OrdinalModel train_dual(Method method, DualVariant variant, const OrdinalDataset& data, const HyperParams& params,
                        const TrainOptions& options) {
  params.validate();
  const char* name = variant == DualVariant::kNordic0 ? "NORDIC-0" : "NORDIC-1";
  if (variant == DualVariant::kNordic0 && !params.kernel.is_rbf()) {
    throw TrainingError("NORDIC-0 requires a nonnegative kernel; the linear kernel is not supported");
  }
  check_subproblems(data);
  const int n = data.size();
  const int m = data.num_classes() - 1;
  const Eigen::MatrixXd k = gram(data.features(), params.kernel);
  const int vars = n * m + n * (m - 1) + (m - 1);
  Eigen::MatrixXd factor;
  if (variant == DualVariant::kNordic1) factor = gram_factor(data, k, params.kernel, vars, m, options);
  const QpProblem qp = assemble_dual(data, k, params.C, variant, factor.size() ? &factor : nullptr);
  const QpSolution sol = solve_qp(qp, options.qp);
  if (sol.status != SolveStatus::kOptimal) {
    throw TrainingError(std::string(name) + " dual solve failed: " + to_string(sol.status) + " " + context(name, data));
  }
  const DualSolution dual = split_dual(sol.theta, n, data.num_classes(), params.C);
  Eigen::MatrixXd omega = recover_omega(dual, variant, data, k);

  double max_clip = 0.0;
  if (variant == DualVariant::kNordic0) {
    for (int r = 1; r < m; ++r) {
      for (int i = 0; i < n; ++i) {
        const double excess = omega(r, i) - omega(r - 1, i);
        if (excess > 0.0) {
          max_clip = std::max(max_clip, excess);
          omega(r, i) = omega(r - 1, i);
        }
      }
    }
  }
  const Eigen::MatrixXd scores = omega * k;
  const Eigen::VectorXd bias = recover_bias(data, scores, params.C, true);

  OrdinalModel model = package(method, data, params, omega, bias);
  model.info.solver_status = to_string(sol.status);
  model.info.iterations = sol.iterations;
  model.info.dual_objective = -sol.objective;
  model.info.objective = quadratic_term(omega, scores) + hinge_total(data, scores, bias, params.C);
  model.info.max_clip = max_clip;
  return model;
}

}  // namespace

OrdinalModel train_nordic0(const OrdinalDataset& data, const HyperParams& params, const TrainOptions& options) {
  return train_dual(Method::kNordic0, DualVariant::kNordic0, data, params, options);
}

OrdinalModel train_nordic1(const OrdinalDataset& data, const HyperParams& params, const TrainOptions& options) {
  return train_dual(Method::kNordic1, DualVariant::kNordic1, data, params, options);
}

OrdinalModel train_bsvm(const OrdinalDataset& data, const HyperParams& params, const TrainOptions& options) {
  params.validate();
  check_subproblems(data);
  const int n = data.size();
  const int m = data.num_classes() - 1;
  const Eigen::MatrixXd k = gram(data.features(), params.kernel);
  const Eigen::MatrixXd factor = gram_factor(data, k, params.kernel, n, 1, options);
  Eigen::MatrixXd omega(m, n);
  int iterations = 0;
  double dual_total = 0.0;
  for (int r = 0; r < m; ++r) {
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = data.labels()[i] <= r + 1 ? 1 : 2;
    const OrdinalDataset binary(data.features(), labels, 2);
    const QpProblem qp = assemble_dual(binary, k, params.C, DualVariant::kNordic1, factor.size() ? &factor : nullptr);
    const QpSolution sol = solve_qp(qp, options.qp);
    if (sol.status != SolveStatus::kOptimal) {
      throw TrainingError("BSVM subproblem k=" + std::to_string(r + 1) + " failed: " + to_string(sol.status) + " " +
                          context("BSVM", data));
    }
    const DualSolution dual = split_dual(sol.theta, n, 2, params.C);
    omega.row(r) = recover_omega(dual, DualVariant::kNordic1, binary, k).row(0);
    iterations += sol.iterations;
    dual_total -= sol.objective;
  }
  const Eigen::MatrixXd scores = omega * k;
  const Eigen::VectorXd bias = recover_bias(data, scores, params.C, false);
  OrdinalModel model = package(Method::kBsvm, data, params, omega, bias);
  model.info.solver_status = "optimal";
  model.info.iterations = iterations;
  model.info.dual_objective = dual_total;
  model.info.objective = quadratic_term(omega, scores) + hinge_total(data, scores, bias, params.C);
  return model;
}

OrdinalModel train_ck(const OrdinalDataset& data, const HyperParams& params, const TrainOptions& options) {
  params.validate();
  check_subproblems(data);
  const int n = data.size();
  const int m = data.num_classes() - 1;
  const bool linear = !params.kernel.is_rbf();
  // Kernel CK runs as a linear CK on pivoted Cholesky features F (K ~ F F').
  Eigen::MatrixXd design;
  std::vector<Eigen::Index> pivots;
  if (linear) {
    design = data.features();
  } else {
    const Eigen::MatrixXd k = gram(data.features(), params.kernel);
    design = pivoted_cholesky(k, 1e-12 * k.diagonal().maxCoeff(), n, &pivots);
  }
  const int w = static_cast<int>(design.cols());
  const int p = w + m + n * m;

  QpProblem qp = QpProblem::with_vars(p);
  qp.Q.topLeftCorner(w, w).setIdentity();
  qp.c.tail(n * m).setConstant(params.C);
  qp.lower.tail(n * m).setZero();
  const int rows = n * m + m - 1;
  qp.A_in = Eigen::MatrixXd::Zero(rows, p);
  qp.b_in = Eigen::VectorXd::Zero(rows);
  for (int k = 0; k < m; ++k) {
    const auto y = dummy_labels(data.labels(), k + 1, data.num_classes());
    for (int i = 0; i < n; ++i) {
      const int row = k * n + i;
      qp.A_in.row(row).head(w) = -y[i] * design.row(i);
      qp.A_in(row, w + k) = -y[i];
      qp.A_in(row, w + m + row) = -1.0;
      qp.b_in[row] = -1.0;
    }
  }
  for (int k = 0; k + 1 < m; ++k) {
    qp.A_in(n * m + k, w + k) = -1.0;
    qp.A_in(n * m + k, w + k + 1) = 1.0;
  }
  const QpSolution sol = solve_qp(qp, options.qp);
  if (sol.status != SolveStatus::kOptimal) {
    throw TrainingError("CK solve failed: " + to_string(sol.status) + " " + context("CK", data));
  }
  Eigen::VectorXd bias = sol.theta.segment(w, m);
  for (int k = 1; k < m; ++k) bias[k] = std::min(bias[k], bias[k - 1]);

  OrdinalModel model;
  model.method = Method::kCk;
  model.kernel = params.kernel;
  model.num_classes = data.num_classes();
  Eigen::VectorXd coef = sol.theta.head(w);
  if (!linear) {
    // F's pivot rows are lower triangular and F = K(:, P) F(P, :)^-T.
    Eigen::MatrixXd fp(w, w);
    for (int r = 0; r < w; ++r) fp.row(r) = design.row(pivots[r]);
    const Eigen::VectorXd beta_p = fp.transpose().triangularView<Eigen::Upper>().solve(coef);
    coef = Eigen::VectorXd::Zero(n);
    for (int r = 0; r < w; ++r) coef[pivots[r]] = beta_p[r];
    model.support = data.features();
  }
  model.omega = coef.transpose().replicate(m, 1);
  model.bias = bias;
  model.info.solver_status = to_string(sol.status);
  model.info.iterations = sol.iterations;
  model.info.objective = sol.objective;
  model.info.dual_objective = qp_dual_objective(qp, sol);
  return model;
}

OrdinalModel train(const OrdinalDataset& data, Method method, const HyperParams& params, const TrainOptions& options) {
  switch (method) {
    case Method::kNordic0:
      return train_nordic0(data, params, options);
    case Method::kNordic1:
      return train_nordic1(data, params, options);
    case Method::kNordic2:
      return train_nordic2(data, params, options);
    case Method::kBsvm:
      return train_bsvm(data, params, options);
    case Method::kCk:
      return train_ck(data, params, options);
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace nordic
