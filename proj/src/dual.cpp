#include "nordic/nordic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nordic {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Eigen::VectorXd> all_dummies(const OrdinalDataset& data) {
  std::vector<Eigen::VectorXd> y;
  for (int k = 1; k < data.num_classes(); ++k) y.push_back(dummy_labels(data.labels(), k, data.num_classes()));
  return y;
}

Eigen::MatrixXd jittered(const Eigen::MatrixXd& gram) {
  Eigen::MatrixXd j = gram;
  j.diagonal().array() += ridge_jitter(gram);
  return j;
}
}  // namespace

void check_subproblems(const OrdinalDataset& data) {
  const auto counts = data.class_counts();
  int below = 0;
  for (int k = 1; k < data.num_classes(); ++k) {
    below += counts[k - 1];
    if (below == 0 || below == data.size()) {
      throw TrainingError("subproblem k=" + std::to_string(k) + " has a single class (n=" +
                          std::to_string(data.size()) + ", K=" + std::to_string(data.num_classes()) + ")");
    }
  }
}

QpProblem assemble_dual(const OrdinalDataset& data, const Eigen::MatrixXd& gram, double C, DualVariant variant,
                        const Eigen::MatrixXd* gram_factor) {
  if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
  const int n = data.size();
  if (gram.rows() != n || gram.cols() != n) throw std::invalid_argument("assemble_dual: gram must be n x n");
  check_subproblems(data);
  const int m = data.num_classes() - 1;
  const int nphi = m - 1;
  const int p = n * m + n * nphi + nphi;
  const auto y = all_dummies(data);
  const auto a_off = [&](int k) { return static_cast<Eigen::Index>(k) * n; };
  const auto f_off = [&](int j) { return static_cast<Eigen::Index>(n) * m + static_cast<Eigen::Index>(j) * n; };
  const Eigen::Index g_off = static_cast<Eigen::Index>(n) * m + static_cast<Eigen::Index>(n) * nphi;

  QpProblem qp = QpProblem::with_vars(p);
  if (gram_factor != nullptr) {
    if (variant != DualVariant::kNordic1) throw std::invalid_argument("factored dual is NORDIC-1 only");
    const Eigen::MatrixXd& l = *gram_factor;
    const Eigen::Index r = l.cols();
    qp.Q.resize(0, 0);
    qp.Q_factor = Eigen::MatrixXd::Zero(r * m, p);
    for (int k = 0; k < m; ++k) {
      auto vk = qp.Q_factor.middleRows(k * r, r);
      for (int i = 0; i < n; ++i) {
        const auto li = l.row(i).transpose();
        vk.col(a_off(k) + i) = y[k][i] * li;
        if (k < nphi) vk.col(f_off(k) + i) = li;
        if (k >= 1) vk.col(f_off(k - 1) + i) = -li;
      }
    }
  } else {
    Eigen::MatrixXd g, cross, h;
    if (variant == DualVariant::kNordic1) {
      g = gram;
      cross = gram;
      h = gram;
    } else {
      g = jittered(gram);
      cross = Eigen::MatrixXd::Identity(n, n);
      h = g.llt().solve(Eigen::MatrixXd::Identity(n, n));
      h = (0.5 * (h + h.transpose())).eval();
    }
    for (int k = 0; k < m; ++k) {
      qp.Q.block(a_off(k), a_off(k), n, n) = y[k].asDiagonal() * g * y[k].asDiagonal();
      for (int j = 0; j < nphi; ++j) {
        double sign = 0.0;
        if (j == k) sign = 1.0;
        else if (j == k - 1) sign = -1.0;
        if (sign == 0.0) continue;
        const Eigen::MatrixXd blk = sign * (y[k].asDiagonal() * cross);
        qp.Q.block(a_off(k), f_off(j), n, n) = blk;
        qp.Q.block(f_off(j), a_off(k), n, n) = blk.transpose();
      }
    }
    for (int j = 0; j < nphi; ++j) {
      qp.Q.block(f_off(j), f_off(j), n, n) = 2.0 * h;
      if (j + 1 < nphi) {
        qp.Q.block(f_off(j), f_off(j + 1), n, n) = -h;
        qp.Q.block(f_off(j + 1), f_off(j), n, n) = -h.transpose();
      }
    }
  }

  qp.c.head(static_cast<Eigen::Index>(n) * m).setConstant(-1.0);
  qp.A_eq = Eigen::MatrixXd::Zero(m, p);
  qp.b_eq = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < m; ++k) {
    qp.A_eq.row(k).segment(a_off(k), n) = -y[k].transpose();
    if (k < nphi) qp.A_eq(k, g_off + k) = -1.0;
    if (k >= 1) qp.A_eq(k, g_off + k - 1) = 1.0;
  }
  qp.lower.setZero();
  qp.upper.setConstant(kInf);
  qp.upper.head(static_cast<Eigen::Index>(n) * m).setConstant(C);
  return qp;
}

DualSolution split_dual(const Eigen::VectorXd& theta, int n, int num_classes, double C) {
  const int m = num_classes - 1;
  const int nphi = m - 1;
  if (theta.size() != static_cast<Eigen::Index>(n) * m + static_cast<Eigen::Index>(n) * nphi + nphi) {
    throw std::invalid_argument("split_dual: theta length does not match n and K");
  }
  DualSolution d;
  d.n = n;
  d.num_classes = num_classes;
  d.alpha = theta.head(static_cast<Eigen::Index>(n) * m);
  d.phi = theta.segment(static_cast<Eigen::Index>(n) * m, static_cast<Eigen::Index>(n) * nphi);
  d.gamma = theta.tail(nphi);
  for (auto& v : d.alpha) v = v < 1e-10 ? 0.0 : (v > C - 1e-10 ? C : v);
  for (auto& v : d.phi) v = v < 1e-10 ? 0.0 : v;
  for (auto& v : d.gamma) v = v < 1e-10 ? 0.0 : v;
  return d;
}

double dual_equality_residual(const DualSolution& dual, const OrdinalDataset& data) {
  const int m = data.num_classes() - 1;
  const int nphi = m - 1;
  double worst = 0.0;
  for (int k = 0; k < m; ++k) {
    const auto y = dummy_labels(data.labels(), k + 1, data.num_classes());
    double r = -y.dot(dual.alpha_block(k));
    if (k < nphi) r -= dual.gamma[k];
    if (k >= 1) r += dual.gamma[k - 1];
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

Eigen::MatrixXd recover_omega(const DualSolution& dual, DualVariant variant, const OrdinalDataset& data,
                              const Eigen::MatrixXd& gram) {
  const int n = dual.n;
  const int m = dual.num_classes - 1;
  const int nphi = m - 1;
  Eigen::MatrixXd omega(m, n);
  Eigen::LLT<Eigen::MatrixXd> jllt;
  if (variant == DualVariant::kNordic0 && nphi > 0) jllt.compute(jittered(gram));
  for (int k = 0; k < m; ++k) {
    const auto y = dummy_labels(data.labels(), k + 1, data.num_classes());
    Eigen::VectorXd dphi = Eigen::VectorXd::Zero(n);
    if (k < nphi) dphi += dual.phi_block(k);
    if (k >= 1) dphi -= dual.phi_block(k - 1);
    if (variant == DualVariant::kNordic0 && nphi > 0) dphi = jllt.solve(dphi);
    omega.row(k) = (y.cwiseProduct(dual.alpha_block(k)) + dphi).transpose();
  }
  return omega;
}

Eigen::VectorXd recover_bias(const OrdinalDataset& data, const Eigen::MatrixXd& scores, double C, bool ordered) {
  const int n = data.size();
  const int m = data.num_classes() - 1;
  if (scores.rows() != m || scores.cols() != n) throw std::invalid_argument("recover_bias: scores must be (K-1) x n");
  const int ng = ordered ? m - 1 : 0;
  const int p = n * m + ng;
  LpProblem lp = LpProblem::with_vars(p);
  lp.A_eq = Eigen::MatrixXd::Zero(m, p);
  lp.b_eq = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < m; ++k) {
    const auto y = dummy_labels(data.labels(), k + 1, data.num_classes());
    for (int i = 0; i < n; ++i) {
      const int j = k * n + i;
      lp.c[j] = -(1.0 - y[i] * scores(k, i));
      lp.A_eq(k, j) = y[i];
      lp.lower[j] = 0.0;
      lp.upper[j] = C;
    }
    if (k < ng) lp.A_eq(k, n * m + k) = 1.0;
    if (k >= 1 && k - 1 < ng) lp.A_eq(k, n * m + k - 1) = -1.0;
  }
  for (int k = 0; k < ng; ++k) lp.lower[n * m + k] = 0.0;
  const LpSolution sol = solve_lp(lp);
  if (sol.status != SolveStatus::kOptimal) {
    throw TrainingError("bias LP failed: " + to_string(sol.status));
  }
  Eigen::VectorXd b = -sol.eq_duals;
  if (ordered) {
    for (int k = 1; k < m; ++k) b[k] = std::min(b[k], b[k - 1]);
  }
  return b;
}

Eigen::VectorXd recover_bias_primal(const OrdinalDataset& data, const Eigen::MatrixXd& scores, double C,
                                    bool ordered) {
  const int n = data.size();
  const int m = data.num_classes() - 1;
  const int p = m + n * m;
  LpProblem lp = LpProblem::with_vars(p);
  const int rows = n * m + (ordered ? m - 1 : 0);
  lp.A_in = Eigen::MatrixXd::Zero(rows, p);
  lp.b_in = Eigen::VectorXd::Zero(rows);
  for (int k = 0; k < m; ++k) {
    const auto y = dummy_labels(data.labels(), k + 1, data.num_classes());
    for (int i = 0; i < n; ++i) {
      const int row = k * n + i;
      const int xi = m + row;
      lp.c[xi] = C;
      lp.lower[xi] = 0.0;
      lp.A_in(row, k) = -y[i];
      lp.A_in(row, xi) = -1.0;
      lp.b_in[row] = -(1.0 - y[i] * scores(k, i));
    }
  }
  if (ordered) {
    for (int k = 0; k + 1 < m; ++k) {
      lp.A_in(n * m + k, k) = -1.0;
      lp.A_in(n * m + k, k + 1) = 1.0;
    }
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status != SolveStatus::kOptimal) throw TrainingError("bias LP failed: " + to_string(sol.status));
  return sol.x.head(m);
}

std::vector<std::optional<double>> recover_bias_sv(const DualSolution& dual, const OrdinalDataset& data,
                                                   const Eigen::MatrixXd& scores, double C) {
  const int m = data.num_classes() - 1;
  const double delta = 1e-6 * C;
  std::vector<std::optional<double>> out(m);
  for (int k = 0; k < m; ++k) {
    const auto y = dummy_labels(data.labels(), k + 1, data.num_classes());
    const auto a = dual.alpha_block(k);
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < dual.n; ++i) {
      if (a[i] > delta && a[i] < C - delta) {
        sum += y[i] - scores(k, i);
        ++count;
      }
    }
    if (count > 0) out[k] = sum / count;
  }
  return out;
}

double hinge_total(const OrdinalDataset& data, const Eigen::MatrixXd& scores, const Eigen::VectorXd& bias, double C) {
  double total = 0.0;
  for (int k = 0; k + 1 < data.num_classes(); ++k) {
    const auto y = dummy_labels(data.labels(), k + 1, data.num_classes());
    for (int i = 0; i < data.size(); ++i) total += std::max(0.0, 1.0 - y[i] * (scores(k, i) + bias[k]));
  }
  return C * total;
}

}  // namespace nordic
