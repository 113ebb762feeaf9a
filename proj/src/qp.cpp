#include "nordic/qp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace nordic {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Newton matrix M = H + A_in' W A_in + diag(d) + delta I together with the
// equality rows. Dense problems factor the quasidefinite system
// [M A'; A -eps I] with LDLT after Jacobi scaling; a low-rank H = V'V goes
// through Sherman-Morrison-Woodbury and a Schur complement on A. Both refine
// against the exact product.
class NewtonSystem {
 public:
  NewtonSystem(const QpProblem& problem, const QpOptions& options) : pr_(problem), opt_(options) {
    const int p = problem.num_vars();
    low_rank_ = problem.factored() && problem.Q_factor.rows() + problem.A_in.rows() <= options.low_rank_fraction * p;
    if (!low_rank_) hess_ = problem.hessian();
    hess_scale_ = 1.0 + (low_rank_ ? problem.Q_factor.colwise().squaredNorm().maxCoeff()
                                   : (hess_.size() ? hess_.diagonal().cwiseAbs().maxCoeff() : 0.0));
  }

  void factor(const Eigen::VectorXd& d, const Eigen::VectorXd& w) {
    d_ = d;
    w_ = w;
    if (try_factor(opt_.regularization, 0.0)) return;
    // Escalate relative to the Hessian scale; the barrier diagonal spans too
    // many orders of magnitude to serve as the reference.
    for (double rel = 1e-14; rel <= 1e-4; rel *= 100.0) {
      if (try_factor(opt_.regularization, rel)) return;
    }
    throw std::runtime_error("QP: Newton matrix is not positive definite");
  }

  // Solves M dtheta - A' dy = rhs, A dtheta = -req.
  void solve(const Eigen::VectorXd& rhs, const Eigen::VectorXd& req, Eigen::VectorXd& dtheta,
             Eigen::VectorXd& dy) const {
    const auto q = pr_.A_eq.rows();
    base_step(rhs, -req, dtheta, dy);
    auto residual = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y, Eigen::VectorXd& r1, Eigen::VectorXd& r2) {
      r1 = rhs - apply(x);
      if (q) r1.noalias() += pr_.A_eq.transpose() * y;
      r2 = q ? Eigen::VectorXd(-req - pr_.A_eq * x) : Eigen::VectorXd();
      return std::max(inf_norm(r1), inf_norm(r2));
    };
    Eigen::VectorXd r1, r2;
    double norm = residual(dtheta, dy, r1, r2);
    const double target = 1e-15 * (1.0 + std::max(inf_norm(rhs), inf_norm(req)));
    for (int round = 0; round < 4 && norm > target; ++round) {
      Eigen::VectorXd cx, cy, n1, n2;
      base_step(r1, r2, cx, cy);
      const Eigen::VectorXd x = dtheta + cx;
      const Eigen::VectorXd y = q ? Eigen::VectorXd(dy + cy) : Eigen::VectorXd();
      const double next = residual(x, y, n1, n2);
      if (!(next < norm)) break;
      dtheta = x;
      dy = y;
      r1 = n1;
      r2 = n2;
      norm = next;
    }
  }

 private:
  // Exact (unregularized) Newton product.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out = pr_.hess_times(x) + d_.cwiseProduct(x);
    if (pr_.A_in.rows() > 0) out.noalias() += pr_.A_in.transpose() * w_.cwiseProduct(pr_.A_in * x);
    return out;
  }

  bool try_factor(double delta, double rel) {
    const int p = pr_.num_vars();
    const auto q = pr_.A_eq.rows();
    const double shift = delta + rel * hess_scale_;
    if (!low_rank_) {
      Eigen::MatrixXd m = hess_;
      if (pr_.A_in.rows() > 0) m.noalias() += pr_.A_in.transpose() * w_.asDiagonal() * pr_.A_in;
      m.diagonal() += d_;
      m.diagonal().array() += shift;
      // Symmetric Jacobi scaling; the barrier diagonal spans ~20 orders.
      equil_.resize(p + q);
      equil_.head(p) = m.diagonal().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
      Eigen::MatrixXd kkt(p + q, p + q);
      kkt.topLeftCorner(p, p) = equil_.head(p).asDiagonal() * m * equil_.head(p).asDiagonal();
      if (q) {
        const Eigen::MatrixXd a = pr_.A_eq * equil_.head(p).asDiagonal();
        for (Eigen::Index i = 0; i < q; ++i) {
          const double rmax = a.row(i).cwiseAbs().maxCoeff();
          equil_[p + i] = rmax > 0.0 ? 1.0 / rmax : 1.0;
        }
        kkt.bottomLeftCorner(q, p) = equil_.tail(q).asDiagonal() * a;
        kkt.topRightCorner(p, q) = kkt.bottomLeftCorner(q, p).transpose();
        kkt.bottomRightCorner(q, q) = Eigen::MatrixXd::Identity(q, q) * -std::max(1e-13, rel);
      }
      kkt.topLeftCorner(p, p).diagonal().array() += 1e-13;
      ldlt_.compute(kkt);
      if (ldlt_.info() != Eigen::Success) return false;
      // LDLT accepts indefinite input; check the inertia of the primal block.
      const Eigen::VectorXd dd = ldlt_.vectorD();
      int positive = 0;
      for (Eigen::Index i = 0; i < dd.size(); ++i) positive += dd[i] > 0.0;
      return positive == p && dd.allFinite();
    }
    diag_ = d_ + Eigen::VectorXd::Constant(p, shift);
    const auto vr = pr_.Q_factor.rows();
    const auto r = pr_.A_in.rows();
    v_.resize(vr + r, p);
    v_.topRows(vr) = pr_.Q_factor;
    if (r > 0) v_.bottomRows(r) = w_.cwiseSqrt().asDiagonal() * pr_.A_in;
    const Eigen::MatrixXd scaled = v_ * diag_.cwiseInverse().asDiagonal();
    Eigen::MatrixXd core = scaled * v_.transpose();
    core.diagonal().array() += 1.0;
    core_.compute(core);
    if (core_.info() != Eigen::Success) return false;
    if (q) {
      minv_at_.resize(p, q);
      for (Eigen::Index i = 0; i < q; ++i) minv_at_.col(i) = smw(pr_.A_eq.row(i).transpose());
      Eigen::MatrixXd sm = pr_.A_eq * minv_at_;
      sm.diagonal().array() += 1e-14 * sm.diagonal().cwiseAbs().maxCoeff();
      schur_.compute(sm);
    }
    return true;
  }

  Eigen::VectorXd smw(const Eigen::VectorXd& rhs) const {
    const Eigen::VectorXd z = rhs.cwiseQuotient(diag_);
    const Eigen::VectorXd t = core_.solve(v_ * z);
    return z - (v_.transpose() * t).cwiseQuotient(diag_);
  }

  // One pass with the (regularized) factorization: M x - A' y = r1, A x = r2.
  void base_step(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    const int p = pr_.num_vars();
    const auto q = pr_.A_eq.rows();
    if (!low_rank_) {
      Eigen::VectorXd rhs(p + q);
      rhs.head(p) = r1;
      if (q) rhs.tail(q) = r2;
      const Eigen::VectorXd sol = equil_.cwiseProduct(ldlt_.solve(equil_.cwiseProduct(rhs)));
      x = sol.head(p);
      y = q ? Eigen::VectorXd(-sol.tail(q)) : Eigen::VectorXd();
      return;
    }
    const Eigen::VectorXd base = smw(r1);
    if (!q) {
      x = base;
      y = Eigen::VectorXd();
      return;
    }
    y = schur_.solve(r2 - pr_.A_eq * base);
    x = base + minv_at_ * y;
  }

  const QpProblem& pr_;
  const QpOptions& opt_;
  bool low_rank_ = false;
  double hess_scale_ = 1.0;
  Eigen::MatrixXd hess_;
  Eigen::VectorXd d_, w_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  Eigen::VectorXd equil_;
  Eigen::VectorXd diag_;
  Eigen::MatrixXd v_;
  Eigen::LLT<Eigen::MatrixXd> core_;
  Eigen::MatrixXd minv_at_;
  Eigen::LDLT<Eigen::MatrixXd> schur_;
};

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv, const std::vector<char>* mask = nullptr) {
  double alpha = kInf;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

LpProblem as_lp(const QpProblem& problem) {
  LpProblem lp;
  lp.c = problem.c;
  lp.A_eq = problem.A_eq;
  lp.b_eq = problem.b_eq;
  lp.A_in = problem.A_in;
  lp.b_in = problem.b_in;
  lp.lower = problem.lower;
  lp.upper = problem.upper;
  return lp;
}

}  // namespace

QpProblem QpProblem::with_vars(int p) {
  QpProblem qp;
  qp.Q = Eigen::MatrixXd::Zero(p, p);
  qp.c = Eigen::VectorXd::Zero(p);
  qp.A_eq.resize(0, p);
  qp.b_eq.resize(0);
  qp.A_in.resize(0, p);
  qp.b_in.resize(0);
  qp.lower = Eigen::VectorXd::Constant(p, -kInf);
  qp.upper = Eigen::VectorXd::Constant(p, kInf);
  return qp;
}

Eigen::VectorXd QpProblem::hess_times(const Eigen::VectorXd& v) const {
  if (factored()) return Q_factor.transpose() * (Q_factor * v);
  return Q * v;
}

Eigen::MatrixXd QpProblem::hessian() const {
  if (factored()) return Q_factor.transpose() * Q_factor;
  return Q;
}

double QpProblem::objective(const Eigen::VectorXd& theta) const {
  return 0.5 * theta.dot(hess_times(theta)) + c.dot(theta);
}

void QpProblem::validate() const {
  const auto p = c.size();
  if (factored()) {
    if (Q_factor.cols() != p) throw std::invalid_argument("QP: factor width differs from c");
  } else {
    if (Q.rows() != p || Q.cols() != p) throw std::invalid_argument("QP: Q must be p x p");
    const double scale = 1.0 + (p ? Q.cwiseAbs().maxCoeff() : 0.0);
    if (p && (Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw std::invalid_argument("QP: Q is not symmetric");
    }
  }
  LpProblem lp = as_lp(*this);
  lp.validate();
}

namespace {

QpSolution interior_point(const QpProblem& problem, const QpOptions& options) {
  const int p = problem.num_vars();
  const int q = static_cast<int>(problem.A_eq.rows());
  const int r = static_cast<int>(problem.A_in.rows());
  const auto& lo = problem.lower;
  const auto& up = problem.upper;

  std::vector<char> has_lo(p), has_up(p);
  int ncomp = r;
  for (int j = 0; j < p; ++j) {
    has_lo[j] = std::isfinite(lo[j]);
    has_up[j] = std::isfinite(up[j]);
    ncomp += has_lo[j] + has_up[j];
  }
  const Eigen::VectorXd mask_lo = Eigen::Map<const Eigen::Array<char, Eigen::Dynamic, 1>>(has_lo.data(), p).cast<double>();
  const Eigen::VectorXd mask_up = Eigen::Map<const Eigen::Array<char, Eigen::Dynamic, 1>>(has_up.data(), p).cast<double>();

  // Starting point strictly inside the bounds.
  Eigen::VectorXd theta(p);
  for (int j = 0; j < p; ++j) {
    if (has_lo[j] && has_up[j]) theta[j] = lo[j] == up[j] ? lo[j] : 0.5 * (lo[j] + up[j]);
    else if (has_lo[j]) theta[j] = lo[j] + 1.0;
    else if (has_up[j]) theta[j] = up[j] - 1.0;
    else theta[j] = 0.0;
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd s = r ? Eigen::VectorXd((problem.b_in - problem.A_in * theta).cwiseMax(1.0)) : Eigen::VectorXd();
  Eigen::VectorXd lam = Eigen::VectorXd::Ones(r);
  Eigen::VectorXd zl = mask_lo, zu = mask_up;

  const double scale = 1.0 + inf_norm(problem.c);
  NewtonSystem newton(problem, options);
  const Eigen::MatrixXd q_abs = problem.factored() ? problem.Q_factor.cwiseAbs() : problem.Q.cwiseAbs();
  const Eigen::MatrixXd eq_abs = problem.A_eq.cwiseAbs().transpose();
  const Eigen::MatrixXd in_abs = problem.A_in.cwiseAbs().transpose();
  double dres_cw = 0.0;

  QpSolution best;
  double best_merit = kInf;
  QpSolution out;
  int stall = 0;
  int best_it = 0;

  auto snapshot = [&](QpSolution& sol, double pres, double dres, double comp, double gap, int it) {
    sol.theta = theta;
    sol.eq_duals = y;
    sol.in_duals = lam;
    sol.bound_duals = zl - zu;
    sol.objective = problem.objective(theta);
    sol.primal_residual = pres;
    sol.dual_residual = dres;
    sol.dual_backward_error = dres_cw;
    sol.complementarity = comp;
    sol.gap = gap;
    sol.iterations = it;
  };

  for (int it = 0;; ++it) {
    const Eigen::VectorXd htheta = problem.hess_times(theta);
    Eigen::VectorXd rd = htheta + problem.c - zl + zu;
    if (q) rd.noalias() -= problem.A_eq.transpose() * y;
    if (r) rd.noalias() += problem.A_in.transpose() * lam;
    const Eigen::VectorXd req = q ? Eigen::VectorXd(problem.A_eq * theta - problem.b_eq) : Eigen::VectorXd();
    const Eigen::VectorXd rin = r ? Eigen::VectorXd(problem.A_in * theta + s - problem.b_in) : Eigen::VectorXd();
    Eigen::VectorXd tl(p), tu(p);
    for (int j = 0; j < p; ++j) {
      tl[j] = has_lo[j] ? theta[j] - lo[j] : 1.0;
      tu[j] = has_up[j] ? up[j] - theta[j] : 1.0;
    }
    const Eigen::VectorXd cl = tl.cwiseProduct(zl), cu = tu.cwiseProduct(zu);
    const Eigen::VectorXd cs = r ? Eigen::VectorXd(s.cwiseProduct(lam)) : Eigen::VectorXd();
    const double total_comp = cl.sum() + cu.sum() + (r ? cs.sum() : 0.0);
    const double mu = ncomp ? total_comp / ncomp : 0.0;
    const double comp = std::max({inf_norm(cl), inf_norm(cu), inf_norm(cs)});

    const double quad = 0.5 * theta.dot(htheta);
    const double pobj = quad + problem.c.dot(theta);
    double dobj = -quad + problem.b_eq.dot(y) - problem.b_in.dot(lam);
    for (int j = 0; j < p; ++j) {
      if (has_lo[j]) dobj += lo[j] * zl[j];
      if (has_up[j]) dobj -= up[j] * zu[j];
    }
    // Residuals relative to the magnitude of the terms that produce them.
    double pscale = scale;
    if (q) pscale = std::max({pscale, 1.0 + inf_norm(problem.b_eq), 1.0 + inf_norm(Eigen::VectorXd(problem.A_eq * theta))});
    if (r) pscale = std::max({pscale, 1.0 + inf_norm(problem.b_in), 1.0 + inf_norm(s)});
    double dscale = std::max({scale, 1.0 + inf_norm(htheta), 1.0 + inf_norm(zl), 1.0 + inf_norm(zu)});
    if (q) dscale = std::max(dscale, 1.0 + inf_norm(Eigen::VectorXd(problem.A_eq.transpose() * y)));
    if (r) dscale = std::max(dscale, 1.0 + inf_norm(Eigen::VectorXd(problem.A_in.transpose() * lam)));
    const double pres = std::max(inf_norm(req), inf_norm(rin)) / pscale;
    const double dres = inf_norm(rd) / dscale;
    {
      const Eigen::VectorXd t = theta.cwiseAbs();
      Eigen::VectorXd mag = problem.factored() ? Eigen::VectorXd(q_abs.transpose() * (q_abs * t)) : Eigen::VectorXd(q_abs * t);
      mag += problem.c.cwiseAbs() + zl + zu;
      if (q) mag.noalias() += eq_abs * y.cwiseAbs();
      if (r) mag.noalias() += in_abs * lam;
      dres_cw = rd.cwiseAbs().cwiseQuotient(mag.array().abs().matrix() + Eigen::VectorXd::Ones(p)).maxCoeff();
    }
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    const double merit = std::max({pres, dres, comp / scale, gap});
    if (merit < best_merit) {
      best_merit = merit;
      best_it = it;
      snapshot(best, pres, dres, comp, gap, it);
    }
    if (pres <= options.tol && dres <= options.tol && comp <= options.tol * scale && gap <= 10.0 * options.tol) {
      snapshot(out, pres, dres, comp, gap, it);
      out.status = SolveStatus::kOptimal;
      return out;
    }
    if (it >= options.max_iter || stall >= 5 || (best_merit < 1e-4 && it - best_it >= 10) || !theta.allFinite() || inf_norm(theta) > 1e15) break;

    const Eigen::VectorXd d = zl.cwiseQuotient(tl).cwiseProduct(mask_lo) + zu.cwiseQuotient(tu).cwiseProduct(mask_up);
    const Eigen::VectorXd w = r ? Eigen::VectorXd(lam.cwiseQuotient(s)) : Eigen::VectorXd();
    try {
      newton.factor(d, w);
    } catch (const std::runtime_error&) {
      break;
    }
    struct Step {
      Eigen::VectorXd dtheta, dy, ds, dlam, dzl, dzu;
    };
    // Solves the Newton system for the given complementarity right-hand sides.
    auto direction = [&](const Eigen::VectorXd& rs, const Eigen::VectorXd& rl, const Eigen::VectorXd& ru) {
      Step st;
      Eigen::VectorXd rhs = -rd + rl.cwiseQuotient(tl).cwiseProduct(mask_lo) - ru.cwiseQuotient(tu).cwiseProduct(mask_up);
      if (r) rhs.noalias() -= problem.A_in.transpose() * (rs + lam.cwiseProduct(rin)).cwiseQuotient(s);
      newton.solve(rhs, q ? req : Eigen::VectorXd(), st.dtheta, st.dy);
      if (r) {
        st.ds = -rin - problem.A_in * st.dtheta;
        st.dlam = (rs - lam.cwiseProduct(st.ds)).cwiseQuotient(s);
      }
      st.dzl = (rl - zl.cwiseProduct(st.dtheta)).cwiseQuotient(tl).cwiseProduct(mask_lo);
      st.dzu = (ru + zu.cwiseProduct(st.dtheta)).cwiseQuotient(tu).cwiseProduct(mask_up);
      return st;
    };
    auto step_length = [&](const Step& st) {
      double a = max_step(tl, st.dtheta, &has_lo);
      a = std::min(a, max_step(tu, -st.dtheta, &has_up));
      a = std::min(a, max_step(zl, st.dzl, &has_lo));
      a = std::min(a, max_step(zu, st.dzu, &has_up));
      if (r) {
        a = std::min(a, max_step(s, st.ds));
        a = std::min(a, max_step(lam, st.dlam));
      }
      return a;
    };

    const Eigen::VectorXd rs_aff = r ? Eigen::VectorXd(-cs) : Eigen::VectorXd();
    const Step aff = direction(rs_aff, -cl, -cu);
    const double a_aff = std::min(1.0, step_length(aff));
    double mu_aff = 0.0;
    if (ncomp) {
      double sum = 0.0;
      for (int j = 0; j < p; ++j) {
        if (has_lo[j]) sum += (tl[j] + a_aff * aff.dtheta[j]) * (zl[j] + a_aff * aff.dzl[j]);
        if (has_up[j]) sum += (tu[j] - a_aff * aff.dtheta[j]) * (zu[j] + a_aff * aff.dzu[j]);
      }
      for (int i = 0; i < r; ++i) sum += (s[i] + a_aff * aff.ds[i]) * (lam[i] + a_aff * aff.dlam[i]);
      mu_aff = sum / ncomp;
    }
    const double sigma = mu > 0.0 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3) : 0.0;
    const double target = sigma * mu;

    Eigen::VectorXd rs, rl(p), ru(p);
    if (r) rs = (Eigen::VectorXd::Constant(r, target) - cs - aff.ds.cwiseProduct(aff.dlam));
    for (int j = 0; j < p; ++j) {
      rl[j] = has_lo[j] ? target - cl[j] - aff.dtheta[j] * aff.dzl[j] : 0.0;
      ru[j] = has_up[j] ? target - cu[j] + aff.dtheta[j] * aff.dzu[j] : 0.0;
    }
    const Step cor = direction(rs, rl, ru);
    const double alpha = std::min(1.0, 0.995 * step_length(cor));
    stall = alpha < 1e-10 ? stall + 1 : 0;

    theta += alpha * cor.dtheta;
    if (q) y += alpha * cor.dy;
    if (r) {
      s += alpha * cor.ds;
      lam += alpha * cor.dlam;
    }
    zl += alpha * cor.dzl;
    zu += alpha * cor.dzu;
  }

  // Round-off can stall the last digits; a best iterate within 10x of every
  // tolerance, or whose dual residual is at the componentwise round-off
  // level, is still reported optimal.
  if (best.primal_residual <= 10.0 * options.tol &&
      (best.dual_residual <= 10.0 * options.tol || best.dual_backward_error <= options.tol) &&
      best.complementarity <= 10.0 * options.tol * scale && best.gap <= 100.0 * options.tol) {
    best.status = SolveStatus::kOptimal;
    return best;
  }
  best.status = SolveStatus::kMaxIter;
  // Distinguish an empty feasible set from slow convergence.
  LpProblem feas = as_lp(problem);
  feas.c.setZero();
  if (solve_lp(feas).status == SolveStatus::kInfeasible) best.status = SolveStatus::kInfeasible;
  return best;
}

}  // namespace

QpSolution solve_qp(const QpProblem& problem, const QpOptions& options) {
  problem.validate();
  const int p = problem.num_vars();
  std::vector<int> free_vars, fixed_vars;
  for (int j = 0; j < p; ++j) (problem.lower[j] == problem.upper[j] ? fixed_vars : free_vars).push_back(j);
  if (fixed_vars.empty()) return interior_point(problem, options);

  // Substitute fixed variables and solve over the rest.
  Eigen::VectorXd fixed_x = Eigen::VectorXd::Zero(p);
  for (int j : fixed_vars) fixed_x[j] = problem.lower[j];
  const Eigen::VectorXd h_fixed = problem.hess_times(fixed_x);
  const auto nf = static_cast<Eigen::Index>(free_vars.size());
  QpProblem red;
  red.c.resize(nf);
  red.lower.resize(nf);
  red.upper.resize(nf);
  red.A_eq.resize(problem.A_eq.rows(), nf);
  red.A_in.resize(problem.A_in.rows(), nf);
  if (problem.factored()) red.Q_factor.resize(problem.Q_factor.rows(), nf);
  else red.Q.resize(nf, nf);
  for (Eigen::Index a = 0; a < nf; ++a) {
    const int j = free_vars[a];
    red.c[a] = problem.c[j] + h_fixed[j];
    red.lower[a] = problem.lower[j];
    red.upper[a] = problem.upper[j];
    red.A_eq.col(a) = problem.A_eq.col(j);
    red.A_in.col(a) = problem.A_in.col(j);
    if (problem.factored()) red.Q_factor.col(a) = problem.Q_factor.col(j);
    else
      for (Eigen::Index b = 0; b < nf; ++b) red.Q(a, b) = problem.Q(j, free_vars[b]);
  }
  red.b_eq = problem.b_eq - problem.A_eq * fixed_x;
  red.b_in = problem.b_in - problem.A_in * fixed_x;

  QpSolution sub = nf > 0 ? interior_point(red, options) : QpSolution{};
  if (nf == 0) {
    sub.status = SolveStatus::kOptimal;
    sub.eq_duals = Eigen::VectorXd::Zero(problem.A_eq.rows());
    sub.in_duals = Eigen::VectorXd::Zero(problem.A_in.rows());
  }
  QpSolution out = sub;
  out.theta = fixed_x;
  for (Eigen::Index a = 0; a < nf; ++a) out.theta[free_vars[a]] = sub.theta[a];
  out.objective = problem.objective(out.theta);
  // Fixed variables absorb the stationarity residual as their bound dual.
  Eigen::VectorXd g = problem.hess_times(out.theta) + problem.c;
  if (problem.A_eq.rows()) g -= problem.A_eq.transpose() * out.eq_duals;
  if (problem.A_in.rows()) g += problem.A_in.transpose() * out.in_duals;
  out.bound_duals = g;
  for (Eigen::Index a = 0; a < nf; ++a) out.bound_duals[free_vars[a]] = sub.bound_duals[a];
  if (nf == 0 && ((problem.A_eq.rows() && inf_norm(red.b_eq) > options.tol) ||
                  (problem.A_in.rows() && red.b_in.minCoeff() < -options.tol))) {
    out.status = SolveStatus::kInfeasible;
  }
  return out;
}

QpSolution solve_lp_via_qp(const QpProblem& problem, const LpOptions& options) {
  problem.validate();
  if (problem.factored() || (problem.Q.size() && problem.Q.cwiseAbs().maxCoeff() != 0.0)) {
    throw std::invalid_argument("solve_lp_via_qp: Q must be zero");
  }
  const LpSolution lp = solve_lp(as_lp(problem), options);
  QpSolution out;
  out.theta = lp.x;
  out.objective = lp.objective;
  out.status = lp.status;
  out.eq_duals = lp.eq_duals;
  out.in_duals = lp.in_duals;
  out.bound_duals = lp.reduced_costs;
  out.iterations = lp.iterations;
  return out;
}

double qp_dual_objective(const QpProblem& problem, const QpSolution& solution) {
  const auto& t = solution.theta;
  double d = -0.5 * t.dot(problem.hess_times(t));
  if (solution.eq_duals.size()) d += problem.b_eq.dot(solution.eq_duals);
  if (solution.in_duals.size()) d -= problem.b_in.dot(solution.in_duals);
  for (Eigen::Index j = 0; j < t.size(); ++j) {
    const double z = solution.bound_duals[j];
    if (z > 0.0 && std::isfinite(problem.lower[j])) d += problem.lower[j] * z;
    else if (z < 0.0 && std::isfinite(problem.upper[j])) d += problem.upper[j] * z;
  }
  return d;
}

KktReport kkt_residuals(const QpProblem& problem, const QpSolution& solution) {
  KktReport rep;
  const auto& t = solution.theta;
  Eigen::VectorXd g = problem.hess_times(t) + problem.c - solution.bound_duals;
  if (problem.A_eq.rows()) g -= problem.A_eq.transpose() * solution.eq_duals;
  if (problem.A_in.rows()) g += problem.A_in.transpose() * solution.in_duals;
  rep.stationarity = inf_norm(g);
  if (problem.A_eq.rows()) rep.primal = inf_norm(problem.A_eq * t - problem.b_eq);
  if (problem.A_in.rows()) {
    const Eigen::VectorXd slack = problem.b_in - problem.A_in * t;
    rep.primal = std::max(rep.primal, std::max(0.0, -slack.minCoeff()));
    rep.complementarity = inf_norm(slack.cwiseProduct(solution.in_duals));
  }
  for (Eigen::Index j = 0; j < t.size(); ++j) {
    rep.primal = std::max({rep.primal, problem.lower[j] - t[j], t[j] - problem.upper[j]});
    const double z = solution.bound_duals[j];
    double gap = 0.0;
    if (z > 0.0) gap = std::isfinite(problem.lower[j]) ? z * (t[j] - problem.lower[j]) : kInf;
    else if (z < 0.0) gap = std::isfinite(problem.upper[j]) ? -z * (problem.upper[j] - t[j]) : kInf;
    rep.complementarity = std::max(rep.complementarity, gap);
  }
  return rep;
}

namespace {

void write_block(std::ostream& out, const std::string& name, const Eigen::MatrixXd& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << m(i, j);
    }
    out << '\n';
  }
}

double read_value(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw std::runtime_error("problem dump truncated");
  if (tok == "inf") return kInf;
  if (tok == "-inf") return -kInf;
  return std::stod(tok);
}

Eigen::MatrixXd read_block(std::istream& in, const std::string& name) {
  std::string tag;
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> tag >> rows >> cols) || tag != name) throw std::runtime_error("problem dump: expected block " + name);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = read_value(in);
  return m;
}

}  // namespace

void write_qp(std::ostream& out, const QpProblem& problem) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  out << "qp " << problem.num_vars() << ' ' << problem.A_eq.rows() << ' ' << problem.A_in.rows() << '\n';
  write_block(out, "Q", problem.hessian());
  write_block(out, "c", problem.c.transpose());
  write_block(out, "A_eq", problem.A_eq);
  write_block(out, "b_eq", problem.b_eq.transpose());
  write_block(out, "A_in", problem.A_in);
  write_block(out, "b_in", problem.b_in.transpose());
  write_block(out, "lower", problem.lower.transpose());
  write_block(out, "upper", problem.upper.transpose());
  out.flags(flags);
  out.precision(prec);
}

QpProblem read_qp(std::istream& in) {
  std::string tag;
  int p = 0, q = 0, r = 0;
  if (!(in >> tag >> p >> q >> r) || tag != "qp") throw std::runtime_error("problem dump: missing qp header");
  QpProblem qp;
  qp.Q = read_block(in, "Q");
  qp.c = read_block(in, "c").transpose();
  qp.A_eq = read_block(in, "A_eq");
  qp.b_eq = read_block(in, "b_eq").transpose();
  qp.A_in = read_block(in, "A_in");
  qp.b_in = read_block(in, "b_in").transpose();
  qp.lower = read_block(in, "lower").transpose();
  qp.upper = read_block(in, "upper").transpose();
  if (qp.num_vars() != p || qp.A_eq.rows() != q || qp.A_in.rows() != r) {
    throw std::runtime_error("problem dump: header does not match blocks");
  }
  // Zero-row blocks are read back with zero columns.
  if (q == 0) qp.A_eq.resize(0, p);
  if (r == 0) qp.A_in.resize(0, p);
  qp.validate();
  return qp;
}

}  // namespace nordic
