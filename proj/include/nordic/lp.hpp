#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace nordic {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kMaxIter };

std::string to_string(SolveStatus status);

// min c'x  s.t.  A_eq x = b_eq,  A_in x <= b_in,  lower <= x <= upper.
// Bounds may be infinite. Either constraint block may have zero rows.
struct LpProblem {
  Eigen::VectorXd c;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_in;
  Eigen::VectorXd b_in;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  // Zero-row constraint blocks and infinite bounds for p variables.
  static LpProblem with_vars(int p);
  int num_vars() const { return static_cast<int>(c.size()); }
  void validate() const;
};

struct LpOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  double pivot_tol = 1e-9;
  int max_iter = 200000;
  int refactor_every = 64;
  // Consecutive degenerate pivots before switching to Bland's rule.
  int bland_after = 50;
};

// Basis snapshot for warm restarts. `state` covers structural, slack and
// artificial columns of the solver's internal standard form.
struct LpBasis {
  std::vector<int> basic;
  std::vector<signed char> state;
  bool empty() const { return basic.empty(); }
};

struct LpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  SolveStatus status = SolveStatus::kMaxIter;
  Eigen::VectorXd eq_duals;       // y with c - A_eq'y + A_in'l = reduced costs
  Eigen::VectorXd in_duals;       // l >= 0
  Eigen::VectorXd reduced_costs;  // per structural variable
  int iterations = 0;
  LpBasis basis;
};

// Bounded-variable revised simplex on a dense explicit basis inverse.
// solve() runs two phases from a slack/singleton crash basis with Dantzig
// pricing (lowest index on ties) and Bland's rule after stalling.
// resolve() reuses a basis after bound changes via the dual simplex and
// falls back to solve() when the basis cannot be reused.
class SimplexSolver {
 public:
  explicit SimplexSolver(const LpProblem& problem, LpOptions options = {});

  LpSolution solve();
  LpSolution resolve(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, const LpBasis& warm);

  int num_rows() const { return m_; }

 private:
  enum State : signed char { kBasic = 0, kLower = 1, kUpper = 2, kZero = 3 };

  void sync_sparse();
  void reset_bounds(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);
  void refactor();
  void compute_primal();
  void compute_duals(const Eigen::VectorXd& cost);
  void place_nonbasic(int j);
  void pivot(int row, int entering, const Eigen::VectorXd& column);
  bool movable(int j) const { return lo_[j] < up_[j]; }

  void crash();
  // Primal simplex on `cost` from a primal feasible basis.
  SolveStatus primal_loop(const Eigen::VectorXd& cost, int& iterations);
  SolveStatus dual_loop(const Eigen::VectorXd& cost, int& iterations);
  bool make_dual_feasible(const Eigen::VectorXd& cost);
  void drive_out_artificials();
  LpSolution finish(SolveStatus status, int iterations);

  LpOptions opt_;
  int p_ = 0;   // structural
  int q_ = 0;   // equality rows
  int r_ = 0;   // inequality rows (one slack each)
  int m_ = 0;   // rows
  int n_ = 0;   // all columns: structural, slack, artificial
  Eigen::MatrixXd A_;
  Eigen::SparseMatrix<double> As_;  // same entries, for products
  Eigen::VectorXd b_;
  Eigen::VectorXd cost_;  // phase-2 cost over all columns
  Eigen::VectorXd lo_, up_, x_;
  Eigen::VectorXd lower0_, upper0_;  // structural bounds of the current problem
  std::vector<signed char> state_;
  std::vector<int> head_;
  std::vector<int> nnz_;  // nonzeros per column, for the singleton crash
  Eigen::MatrixXd binv_;
  Eigen::VectorXd y_, d_;
  int since_refactor_ = 0;
};

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

}  // namespace nordic
