#pragma once

#include "nordic/lp.hpp"

#include <Eigen/Dense>

#include <iosfwd>

namespace nordic {

// min 1/2 t'Qt + c't  s.t.  A_eq t = b_eq,  A_in t <= b_in,  lower <= t <= upper.
//
// The Hessian is either the dense matrix Q or, when Q is empty, the product
// V'V of a wide factor V (Q_factor). The factor form lets the Newton systems
// use a Sherman-Morrison-Woodbury solve when V has few rows.
struct QpProblem {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd Q_factor;
  Eigen::VectorXd c;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_in;
  Eigen::VectorXd b_in;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static QpProblem with_vars(int p);
  int num_vars() const { return static_cast<int>(c.size()); }
  bool factored() const { return Q.size() == 0 && Q_factor.size() > 0; }
  Eigen::VectorXd hess_times(const Eigen::VectorXd& v) const;
  // Dense Hessian, materialized from the factor when needed.
  Eigen::MatrixXd hessian() const;
  double objective(const Eigen::VectorXd& theta) const;
  void validate() const;
};

struct QpOptions {
  double tol = 1e-8;
  int max_iter = 200;
  double regularization = 1e-10;
  // Use the low-rank Newton solve when the factor has at most this fraction
  // of p rows.
  double low_rank_fraction = 0.25;
};

struct QpSolution {
  Eigen::VectorXd theta;
  double objective = 0.0;
  SolveStatus status = SolveStatus::kMaxIter;
  Eigen::VectorXd eq_duals;     // y
  Eigen::VectorXd in_duals;     // l >= 0
  Eigen::VectorXd bound_duals;  // z_lower - z_upper
  // Qt + c - A_eq'y + A_in'l - bound_duals = 0 at optimality.
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  // max_j |r_j| / (1 + sum of |terms| in row j); floors at round-off when Q is ill-conditioned.
  double dual_backward_error = 0.0;
  double complementarity = 0.0;
  double gap = 0.0;
};

// Primal-dual interior point, Mehrotra predictor-corrector.
QpSolution solve_qp(const QpProblem& problem, const QpOptions& options = {});

// Linear case (Q == 0) through the simplex engine.
QpSolution solve_lp_via_qp(const QpProblem& problem, const LpOptions& options = {});

// -1/2 t'Qt + b_eq'y - b_in'l + sum of bound terms, using the returned
// multipliers. Equals the objective at an exact KKT point.
double qp_dual_objective(const QpProblem& problem, const QpSolution& solution);

// Stationarity, feasibility and complementarity residuals in the inf-norm.
struct KktReport {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;
};
KktReport kkt_residuals(const QpProblem& problem, const QpSolution& solution);

// Plain-text canonical dump: a header line "qp p q r" followed by labelled
// dense row-major blocks. Infinite bounds are written as inf/-inf.
void write_qp(std::ostream& out, const QpProblem& problem);
QpProblem read_qp(std::istream& in);

}  // namespace nordic
