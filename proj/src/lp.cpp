#include "nordic/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nordic {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnbounded:
      return "unbounded";
    case SolveStatus::kMaxIter:
      return "max_iter";
  }
  return "unknown";
}

LpProblem LpProblem::with_vars(int p) {
  LpProblem lp;
  lp.c = Eigen::VectorXd::Zero(p);
  lp.A_eq.resize(0, p);
  lp.b_eq.resize(0);
  lp.A_in.resize(0, p);
  lp.b_in.resize(0);
  lp.lower = Eigen::VectorXd::Constant(p, -kInf);
  lp.upper = Eigen::VectorXd::Constant(p, kInf);
  return lp;
}

void LpProblem::validate() const {
  const auto p = c.size();
  if (A_eq.cols() != p || A_in.cols() != p) throw std::invalid_argument("LP: constraint width differs from c");
  if (A_eq.rows() != b_eq.size() || A_in.rows() != b_in.size()) {
    throw std::invalid_argument("LP: right-hand side length mismatch");
  }
  if (lower.size() != p || upper.size() != p) throw std::invalid_argument("LP: bound length mismatch");
  for (Eigen::Index j = 0; j < p; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j]) {
      throw std::invalid_argument("LP: invalid bounds at variable " + std::to_string(j));
    }
  }
  if (!c.allFinite() || !A_eq.allFinite() || !A_in.allFinite() || !b_eq.allFinite() || !b_in.allFinite()) {
    throw std::invalid_argument("LP: non-finite data");
  }
}

SimplexSolver::SimplexSolver(const LpProblem& problem, LpOptions options) : opt_(options) {
  problem.validate();
  p_ = problem.num_vars();
  q_ = static_cast<int>(problem.A_eq.rows());
  r_ = static_cast<int>(problem.A_in.rows());
  m_ = q_ + r_;
  n_ = p_ + r_ + m_;
  A_ = Eigen::MatrixXd::Zero(m_, n_);
  if (q_ > 0) A_.block(0, 0, q_, p_) = problem.A_eq;
  if (r_ > 0) A_.block(q_, 0, r_, p_) = problem.A_in;
  for (int i = 0; i < r_; ++i) A_(q_ + i, p_ + i) = 1.0;
  for (int i = 0; i < m_; ++i) A_(i, p_ + r_ + i) = 1.0;
  b_.resize(m_);
  b_ << problem.b_eq, problem.b_in;
  cost_ = Eigen::VectorXd::Zero(n_);
  cost_.head(p_) = problem.c;
  lo_.resize(n_);
  up_.resize(n_);
  x_ = Eigen::VectorXd::Zero(n_);
  state_.assign(n_, kLower);
  head_.assign(m_, -1);
  nnz_.assign(n_, 0);
  for (int j = 0; j < p_ + r_; ++j) {
    for (int i = 0; i < m_; ++i) nnz_[j] += A_(i, j) != 0.0;
  }
  lower0_ = problem.lower;
  upper0_ = problem.upper;
  reset_bounds(lower0_, upper0_);
  sync_sparse();
}

void SimplexSolver::sync_sparse() { As_ = A_.sparseView(); }

void SimplexSolver::reset_bounds(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (lower.size() != p_ || upper.size() != p_) throw std::invalid_argument("simplex: bound length mismatch");
  lo_.head(p_) = lower;
  up_.head(p_) = upper;
  lo_.segment(p_, r_).setZero();
  up_.segment(p_, r_).setConstant(kInf);
  lo_.tail(m_).setZero();
  up_.tail(m_).setZero();
}

void SimplexSolver::place_nonbasic(int j) {
  switch (state_[j]) {
    case kLower:
      x_[j] = lo_[j];
      break;
    case kUpper:
      x_[j] = up_[j];
      break;
    case kZero:
      x_[j] = 0.0;
      break;
    default:
      break;
  }
}

void SimplexSolver::refactor() {
  since_refactor_ = 0;
  if (m_ == 0) {
    binv_.resize(0, 0);
    return;
  }
  Eigen::MatrixXd basis(m_, m_);
  for (int i = 0; i < m_; ++i) basis.col(i) = A_.col(head_[i]);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
  binv_ = lu.inverse();
  Eigen::VectorXd probe(m_);
  for (int i = 0; i < m_; ++i) probe[i] = 1.0 + (i % 7) / 7.0;
  const double err = (basis * (binv_ * probe) - probe).cwiseAbs().maxCoeff() / 2.0;
  if (!std::isfinite(err) || err > 1e-6) throw std::runtime_error("simplex: singular basis");
}

void SimplexSolver::compute_primal() {
  Eigen::VectorXd xn = x_;
  for (int i = 0; i < m_; ++i) xn[head_[i]] = 0.0;
  const Eigen::VectorXd xb = binv_ * (b_ - As_ * xn);
  for (int i = 0; i < m_; ++i) x_[head_[i]] = xb[i];
}

void SimplexSolver::compute_duals(const Eigen::VectorXd& cost) {
  Eigen::VectorXd cb(m_);
  for (int i = 0; i < m_; ++i) cb[i] = cost[head_[i]];
  y_ = binv_.transpose() * cb;
  d_ = cost - As_.transpose() * y_;
  for (int i = 0; i < m_; ++i) d_[head_[i]] = 0.0;
}

void SimplexSolver::pivot(int row, int entering, const Eigen::VectorXd& column) {
  const Eigen::RowVectorXd prow = binv_.row(row) / column[row];
  binv_.noalias() -= column * prow;
  binv_.row(row) = prow;
  head_[row] = entering;
  state_[entering] = kBasic;
  ++since_refactor_;
}

void SimplexSolver::crash() {
  for (int j = 0; j < n_; ++j) {
    if (std::isfinite(lo_[j])) state_[j] = kLower;
    else if (std::isfinite(up_[j])) state_[j] = kUpper;
    else state_[j] = kZero;
    place_nonbasic(j);
  }
  // Artificial columns start closed; rows that need one reopen it below.
  for (int i = 0; i < m_; ++i) A_(i, p_ + r_ + i) = 1.0;

  const Eigen::VectorXd residual = b_ - A_.leftCols(p_) * x_.head(p_);
  std::vector<std::vector<int>> singletons(m_);
  for (int j = 0; j < p_; ++j) {
    if (nnz_[j] != 1) continue;
    for (int i = 0; i < m_; ++i) {
      if (A_(i, j) != 0.0) {
        singletons[i].push_back(j);
        break;
      }
    }
  }
  for (int i = 0; i < m_; ++i) {
    const double tol = opt_.feas_tol * (1.0 + std::abs(b_[i]));
    if (i >= q_ && residual[i] >= -tol) {
      head_[i] = p_ + (i - q_);
      state_[head_[i]] = kBasic;
      continue;
    }
    int chosen = -1;
    for (int j : singletons[i]) {
      if (state_[j] == kBasic) continue;
      const double value = x_[j] + residual[i] / A_(i, j);
      if (value >= lo_[j] - tol && value <= up_[j] + tol) {
        chosen = j;
        break;
      }
    }
    if (chosen < 0) {
      chosen = p_ + r_ + i;
      A_(i, chosen) = residual[i] >= 0.0 ? 1.0 : -1.0;
      up_[chosen] = kInf;
    }
    head_[i] = chosen;
    state_[chosen] = kBasic;
  }
  sync_sparse();
}

SolveStatus SimplexSolver::primal_loop(const Eigen::VectorXd& cost, int& iterations) {
  int degenerate = 0;
  bool bland = false;
  Eigen::VectorXd column(m_);
  while (true) {
    if (iterations >= opt_.max_iter) return SolveStatus::kMaxIter;
    if (since_refactor_ >= opt_.refactor_every) refactor();
    compute_primal();
    compute_duals(cost);

    int entering = -1;
    double best = 0.0;
    for (int j = 0; j < n_; ++j) {
      if (state_[j] == kBasic || !movable(j)) continue;
      const double dj = d_[j];
      double gain = 0.0;
      if (state_[j] == kLower && dj < -opt_.opt_tol) gain = -dj;
      else if (state_[j] == kUpper && dj > opt_.opt_tol) gain = dj;
      else if (state_[j] == kZero && std::abs(dj) > opt_.opt_tol) gain = std::abs(dj);
      if (gain <= 0.0) continue;
      if (bland) {
        entering = j;
        break;
      }
      if (gain > best) {
        best = gain;
        entering = j;
      }
    }
    if (entering < 0) {
      if (since_refactor_ > 0) {
        refactor();
        continue;
      }
      return SolveStatus::kOptimal;
    }

    const bool increase = state_[entering] == kLower || (state_[entering] == kZero && d_[entering] < 0.0);
    const double dir = increase ? 1.0 : -1.0;
    column.noalias() = binv_ * A_.col(entering);

    double step = (std::isfinite(lo_[entering]) && std::isfinite(up_[entering])) ? up_[entering] - lo_[entering] : kInf;
    int leave = -1;
    bool leave_upper = false;
    for (int i = 0; i < m_; ++i) {
      const double a = dir * column[i];
      if (std::abs(a) <= opt_.pivot_tol) continue;
      const int j = head_[i];
      double t;
      bool to_upper;
      if (a > 0.0) {
        if (!std::isfinite(lo_[j])) continue;
        t = (x_[j] - lo_[j]) / a;
        to_upper = false;
      } else {
        if (!std::isfinite(up_[j])) continue;
        t = (up_[j] - x_[j]) / (-a);
        to_upper = true;
      }
      t = std::max(t, 0.0);
      const double tie = std::isfinite(step) ? 1e-12 * std::max(1.0, std::abs(step)) : 0.0;
      bool take = t < step - tie;
      if (!take && leave >= 0 && std::abs(t - step) <= tie) {
        if (bland) take = j < head_[leave];
        else take = std::abs(column[i]) > std::abs(column[leave]) + 1e-12 ||
                    (std::abs(std::abs(column[i]) - std::abs(column[leave])) <= 1e-12 && j < head_[leave]);
      }
      if (take) {
        step = t;
        leave = i;
        leave_upper = to_upper;
      }
    }
    if (!std::isfinite(step)) return SolveStatus::kUnbounded;

    if (leave < 0) {
      state_[entering] = increase ? kUpper : kLower;
      place_nonbasic(entering);
    } else {
      const int out = head_[leave];
      state_[out] = leave_upper ? kUpper : kLower;
      place_nonbasic(out);
      x_[entering] += dir * step;
      pivot(leave, entering, column);
    }
    degenerate = step <= 1e-12 ? degenerate + 1 : 0;
    bland = degenerate > opt_.bland_after;
    ++iterations;
  }
}

SolveStatus SimplexSolver::dual_loop(const Eigen::VectorXd& cost, int& iterations) {
  Eigen::VectorXd column(m_);
  Eigen::RowVectorXd alpha(n_);
  while (true) {
    if (iterations >= opt_.max_iter) return SolveStatus::kMaxIter;
    if (since_refactor_ >= opt_.refactor_every) refactor();
    compute_primal();
    compute_duals(cost);

    int row = -1;
    double worst = 0.0;
    for (int i = 0; i < m_; ++i) {
      const int j = head_[i];
      double viol = 0.0;
      if (x_[j] < lo_[j] - opt_.feas_tol * (1.0 + std::abs(lo_[j]))) viol = lo_[j] - x_[j];
      else if (x_[j] > up_[j] + opt_.feas_tol * (1.0 + std::abs(up_[j]))) viol = x_[j] - up_[j];
      if (viol > worst) {
        worst = viol;
        row = i;
      }
    }
    if (row < 0) {
      if (since_refactor_ > 0) {
        refactor();
        continue;
      }
      return SolveStatus::kOptimal;
    }
    const int out = head_[row];
    const bool below = x_[out] < lo_[out];
    alpha = (As_.transpose() * binv_.row(row).transpose()).transpose();

    int entering = -1;
    double best = kInf;
    for (int j = 0; j < n_; ++j) {
      if (state_[j] == kBasic || !movable(j)) continue;
      const double a = alpha[j];
      if (std::abs(a) <= opt_.pivot_tol) continue;
      double ratio;
      if (state_[j] == kZero) {
        ratio = std::abs(d_[j]) / std::abs(a);
      } else if (below) {
        if (!((state_[j] == kLower && a < 0.0) || (state_[j] == kUpper && a > 0.0))) continue;
        ratio = d_[j] / (-a);
      } else {
        if (!((state_[j] == kLower && a > 0.0) || (state_[j] == kUpper && a < 0.0))) continue;
        ratio = d_[j] / a;
      }
      ratio = std::max(ratio, 0.0);
      const double tie = 1e-12 * std::max(1.0, best == kInf ? 1.0 : best);
      bool take = ratio < best - tie;
      if (!take && entering >= 0 && std::abs(ratio - best) <= tie) {
        take = std::abs(a) > std::abs(alpha[entering]) + 1e-12;
      }
      if (take) {
        best = ratio;
        entering = j;
      }
    }
    if (entering < 0) return SolveStatus::kInfeasible;

    column.noalias() = binv_ * A_.col(entering);
    state_[out] = below ? kLower : kUpper;
    place_nonbasic(out);
    pivot(row, entering, column);
    ++iterations;
  }
}

bool SimplexSolver::make_dual_feasible(const Eigen::VectorXd& cost) {
  compute_duals(cost);
  for (int j = 0; j < n_; ++j) {
    if (state_[j] == kBasic || !movable(j)) continue;
    const double tol = opt_.opt_tol;
    if (state_[j] == kLower && d_[j] < -tol) {
      if (!std::isfinite(up_[j])) return false;
      state_[j] = kUpper;
    } else if (state_[j] == kUpper && d_[j] > tol) {
      if (!std::isfinite(lo_[j])) return false;
      state_[j] = kLower;
    } else if (state_[j] == kZero && std::abs(d_[j]) > tol) {
      return false;
    }
    place_nonbasic(j);
  }
  return true;
}

void SimplexSolver::drive_out_artificials() {
  for (int row = 0; row < m_; ++row) {
    if (head_[row] < p_ + r_) continue;
    const Eigen::VectorXd alpha = As_.transpose() * binv_.row(row).transpose();
    int entering = -1;
    double best = 1e-7;
    for (int j = 0; j < p_ + r_; ++j) {
      if (state_[j] == kBasic || !movable(j)) continue;
      if (std::abs(alpha[j]) > best) {
        best = std::abs(alpha[j]);
        entering = j;
      }
    }
    if (entering < 0) continue;  // redundant row; the artificial stays fixed at zero
    const int out = head_[row];
    const Eigen::VectorXd column = binv_ * A_.col(entering);
    state_[out] = kLower;
    place_nonbasic(out);
    pivot(row, entering, column);
  }
}

LpSolution SimplexSolver::finish(SolveStatus status, int iterations) {
  LpSolution s;
  s.status = status;
  s.iterations = iterations;
  if (m_ > 0) refactor();
  compute_primal();
  compute_duals(cost_);
  s.x = x_.head(p_);
  s.objective = cost_.head(p_).dot(s.x);
  s.eq_duals = y_.head(q_);
  s.in_duals = -y_.segment(q_, r_);
  s.reduced_costs = d_.head(p_);
  s.basis.basic = head_;
  s.basis.state = state_;
  return s;
}

LpSolution SimplexSolver::solve() {
  reset_bounds(lower0_, upper0_);
  crash();
  int iterations = 0;
  try {
    refactor();
    bool opened = false;
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n_);
    for (int i = 0; i < m_; ++i) {
      const int a = p_ + r_ + i;
      if (std::isinf(up_[a])) {
        phase1[a] = 1.0;
        opened = true;
      }
    }
    if (opened) {
      const SolveStatus st = primal_loop(phase1, iterations);
      if (st == SolveStatus::kMaxIter) return finish(st, iterations);
      compute_primal();
      double infeasibility = 0.0;
      for (int i = 0; i < m_; ++i) infeasibility += std::max(0.0, x_[p_ + r_ + i]);
      const double scale = 1.0 + (m_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0);
      if (infeasibility > 1e-7 * scale) return finish(SolveStatus::kInfeasible, iterations);
      for (int i = 0; i < m_; ++i) {
        const int a = p_ + r_ + i;
        up_[a] = 0.0;
        if (state_[a] != kBasic) {
          state_[a] = kLower;
          place_nonbasic(a);
        }
      }
      drive_out_artificials();
      refactor();
    }
    return finish(primal_loop(cost_, iterations), iterations);
  } catch (const std::runtime_error&) {
    LpSolution failed;
    failed.status = SolveStatus::kMaxIter;
    failed.iterations = iterations;
    failed.x = x_.head(p_);
    return failed;
  }
}

LpSolution SimplexSolver::resolve(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, const LpBasis& warm) {
  lower0_ = lower;
  upper0_ = upper;
  if (warm.empty() || static_cast<int>(warm.basic.size()) != m_ || static_cast<int>(warm.state.size()) != n_) {
    return solve();
  }
  reset_bounds(lower, upper);
  head_ = warm.basic;
  state_ = warm.state;
  for (int j = 0; j < n_; ++j) {
    if (state_[j] == kBasic) continue;
    if (state_[j] == kLower && !std::isfinite(lo_[j])) state_[j] = std::isfinite(up_[j]) ? kUpper : kZero;
    if (state_[j] == kUpper && !std::isfinite(up_[j])) state_[j] = std::isfinite(lo_[j]) ? kLower : kZero;
    if (state_[j] == kZero && std::isfinite(lo_[j])) state_[j] = kLower;
    place_nonbasic(j);
  }
  int iterations = 0;
  try {
    refactor();
    if (!make_dual_feasible(cost_)) return solve();
    SolveStatus st = dual_loop(cost_, iterations);
    if (st == SolveStatus::kOptimal) st = primal_loop(cost_, iterations);
    if (st != SolveStatus::kOptimal) return solve();
    return finish(st, iterations);
  } catch (const std::runtime_error&) {
    return solve();
  }
}

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options) {
  SimplexSolver solver(problem, options);
  return solver.solve();
}

}  // namespace nordic
