#include "nordic/nordic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nordic {

namespace {
struct Layout {
  int n, m, cols;
  int wp(int k, int j) const { return k * cols + j; }
  int wm(int k, int j) const { return m * cols + k * cols + j; }
  int b(int k) const { return 2 * m * cols + k; }
  int xi(int k, int i) const { return 2 * m * cols + m + k * n + i; }
  int z0() const { return 2 * m * cols + m + n * m; }
};

// f_k(x_i) as a row over the MILP variables.
void put_score(Eigen::MatrixXd& a, int r, const Layout& at, const Eigen::MatrixXd& design, int k, int i, double scale) {
  for (int j = 0; j < at.cols; ++j) {
    a(r, at.wp(k, j)) += scale * design(i, j);
    a(r, at.wm(k, j)) -= scale * design(i, j);
  }
  a(r, at.b(k)) += scale;
}

MilpProblem build(const OrdinalDataset& data, const Eigen::MatrixXd& design, double lambda, double m1, double m2,
                  bool reduce, double margin, bool logical) {
  const int n = data.size();
  const int m = data.num_classes() - 1;
  if (design.rows() != n) throw std::invalid_argument("NORDIC-2 design must have one row per training point");
  const Layout at{n, m, static_cast<int>(design.cols())};
  const int pairs = logical ? n * (m - 1) : 0;
  const int nz = reduce ? pairs : 2 * pairs;
  const int p = at.z0() + nz;

  MilpProblem milp = MilpProblem::with_vars(p);
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < at.cols; ++j) {
      milp.c[at.wp(k, j)] = lambda;
      milp.c[at.wm(k, j)] = lambda;
      milp.lower[at.wp(k, j)] = 0.0;
      milp.lower[at.wm(k, j)] = 0.0;
    }
    for (int i = 0; i < n; ++i) {
      milp.c[at.xi(k, i)] = 1.0;
      milp.lower[at.xi(k, i)] = 0.0;
    }
  }
  for (int z = at.z0(); z < p; ++z) {
    milp.lower[z] = 0.0;
    milp.upper[z] = 1.0;
    milp.binary[z] = 1;
  }

  const int rows = n * m + (reduce ? 2 * pairs : 3 * pairs);
  milp.A_in = Eigen::MatrixXd::Zero(rows, p);
  milp.b_in = Eigen::VectorXd::Zero(rows);
  int r = 0;
  for (int k = 0; k < m; ++k) {
    const auto y = dummy_labels(data.labels(), k + 1, data.num_classes());
    for (int i = 0; i < n; ++i, ++r) {
      put_score(milp.A_in, r, at, design, k, i, -y[i]);
      milp.A_in(r, at.xi(k, i)) = -1.0;
      milp.b_in[r] = -1.0;
    }
  }
  if (logical) {
    for (int k = 0; k + 1 < m; ++k) {
      for (int i = 0; i < n; ++i) {
        const int pair = k * n + i;
        if (reduce) {
          const int z = at.z0() + pair;
          put_score(milp.A_in, r, at, design, k, i, -1.0);
          milp.A_in(r, z) = -m1;
          milp.b_in[r++] = -margin;
          put_score(milp.A_in, r, at, design, k + 1, i, 1.0);
          milp.A_in(r, z) = m2;
          milp.b_in[r++] = m2 - margin;
        } else {
          const int z1 = at.z0() + 2 * pair;
          const int z2 = z1 + 1;
          put_score(milp.A_in, r, at, design, k, i, -1.0);
          milp.A_in(r, z1) = -m1;
          milp.b_in[r++] = -margin;
          put_score(milp.A_in, r, at, design, k + 1, i, 1.0);
          milp.A_in(r, z2) = -m2;
          milp.b_in[r++] = -margin;
          milp.A_in(r, z1) = 1.0;
          milp.A_in(r, z2) = 1.0;
          milp.b_in[r++] = 1.0;
        }
      }
    }
  }
  return milp;
}

// L1 problem without the logical rows.
LpSolution l1_start(const OrdinalDataset& data, const Eigen::MatrixXd& design, double lambda) {
  const MilpProblem base = build(data, design, lambda, 1.0, 1.0, false, 0.0, false);
  LpSolution sol = solve_lp(base.relaxation());
  if (sol.status != SolveStatus::kOptimal) throw TrainingError("NORDIC-2 L1 start failed: " + to_string(sol.status));
  return sol;
}

double big_m_from(const OrdinalDataset& data, const Eigen::MatrixXd& design, const LpSolution& start) {
  const Layout at{data.size(), data.num_classes() - 1, static_cast<int>(design.cols())};
  double coef = 1.0;
  for (int k = 0; k < at.m; ++k) {
    for (int j = 0; j < at.cols; ++j) coef = std::max(coef, std::abs(start.x[at.wp(k, j)] - start.x[at.wm(k, j)]));
    coef = std::max(coef, std::abs(start.x[at.b(k)]));
  }
  const double row_sum = design.cwiseAbs().rowwise().sum().maxCoeff();
  return 10.0 * (1.0 + row_sum) * coef;
}

// Extends the optimal L1 basis to the full relaxation. Each logical row gets
// its own basic variable (a binary or the row slack), so the duals of the new
// rows are zero and the extended basis stays dual feasible.
LpBasis extend_basis(const OrdinalDataset& data, const Eigen::MatrixXd& design, const LpSolution& start,
                     const MilpProblem& milp, const Nordic2Config& config) {
  const Layout at{data.size(), data.num_classes() - 1, static_cast<int>(design.cols())};
  const int p1 = at.z0();
  const int r1 = at.n * at.m;
  const int p = milp.num_vars();
  const int r = static_cast<int>(milp.A_in.rows());
  if (static_cast<int>(start.basis.basic.size()) != r1) return {};
  auto map_col = [&](int j) {
    if (j < p1) return j;
    if (j < p1 + r1) return p + (j - p1);
    return p + r + (j - p1 - r1);
  };
  LpBasis basis;
  basis.basic.assign(r, -1);
  basis.state.assign(p + 2 * r, 1);  // nonbasic at lower
  for (int j = 0; j < p1 + 2 * r1; ++j) basis.state[map_col(j)] = start.basis.state[j];
  for (int i = 0; i < r1; ++i) basis.basic[i] = map_col(start.basis.basic[i]);

  auto f = [&](int k, int i) {
    double v = start.x[at.b(k)];
    for (int j = 0; j < at.cols; ++j) v += design(i, j) * (start.x[at.wp(k, j)] - start.x[at.wm(k, j)]);
    return v;
  };
  auto make_basic = [&](int row, int col) {
    basis.basic[row] = col;
    basis.state[col] = 0;
  };
  int row = r1;
  for (int k = 0; k + 1 < at.m; ++k) {
    for (int i = 0; i < at.n; ++i) {
      const int pair = k * at.n + i;
      const bool need1 = f(k, i) < config.margin;
      if (config.reduce_binaries) {
        const int z = p1 + pair;
        make_basic(row, need1 ? z : p + row);
        ++row;
        make_basic(row, p + row);
        ++row;
      } else {
        const bool need2 = f(k + 1, i) > -config.margin;
        const int z1 = p1 + 2 * pair;
        make_basic(row, need1 ? z1 : p + row);
        ++row;
        make_basic(row, need2 ? z1 + 1 : p + row);
        ++row;
        make_basic(row, p + row);
        ++row;
      }
    }
  }
  return basis;
}

Eigen::MatrixXd design_matrix(const OrdinalDataset& data, const KernelSpec& kernel) {
  return kernel.is_rbf() ? gram(data.features(), kernel) : data.features();
}
}  // namespace

MilpProblem assemble_milp_nordic2(const OrdinalDataset& data, const Eigen::MatrixXd& design, double lambda,
                                  const Nordic2Config& config) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(config.M1 >= 1.0) || !(config.M2 >= 1.0)) throw std::invalid_argument("M1 and M2 must be at least 1");
  if (!(config.margin >= 0.0)) throw std::invalid_argument("margin must be nonnegative");
  return build(data, design, lambda, config.M1, config.M2, config.reduce_binaries, config.margin, true);
}

double default_big_m(const OrdinalDataset& data, const Eigen::MatrixXd& design, double lambda) {
  return big_m_from(data, design, l1_start(data, design, lambda));
}

OrdinalModel train_nordic2(const OrdinalDataset& data, const HyperParams& params, const TrainOptions& options) {
  params.validate();
  check_subproblems(data);
  const Eigen::MatrixXd design = design_matrix(data, params.kernel);
  Nordic2Config config = options.nordic2;
  const LpSolution start = l1_start(data, design, params.lambda);
  const double big_m = big_m_from(data, design, start);
  if (config.M1 == 0.0) config.M1 = big_m;
  if (config.M2 == 0.0) config.M2 = big_m;

  const MilpProblem milp = assemble_milp_nordic2(data, design, params.lambda, config);
  const LpBasis root = extend_basis(data, design, start, milp, config);
  const MilpSolution sol = solve_milp(milp, config.milp, root.empty() ? nullptr : &root);
  if (sol.status == MilpStatus::kInfeasible || sol.x.size() == 0) {
    throw TrainingError("NORDIC-2 MILP found no incumbent (n=" + std::to_string(data.size()) +
                        ", K=" + std::to_string(data.num_classes()) + ")");
  }
  const int m = data.num_classes() - 1;
  const Layout at{data.size(), m, static_cast<int>(design.cols())};
  Eigen::MatrixXd omega(m, at.cols);
  Eigen::VectorXd bias(m);
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < at.cols; ++j) omega(k, j) = sol.x[at.wp(k, j)] - sol.x[at.wm(k, j)];
    bias[k] = sol.x[at.b(k)];
  }

  OrdinalModel model;
  model.method = Method::kNordic2;
  model.kernel = params.kernel;
  model.num_classes = data.num_classes();
  model.omega = omega;
  model.bias = bias;
  if (params.kernel.is_rbf()) model.support = data.features();
  model.info.solver_status = to_string(sol.status);
  model.info.objective = sol.objective;
  model.info.nodes = sol.nodes_explored;
  model.info.gap = sol.gap;
  model.info.big_m = std::max(config.M1, config.M2);
  return model;
}

}  // namespace nordic
