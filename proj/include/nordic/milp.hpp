#pragma once

#include "nordic/lp.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace nordic {

// min c'x  s.t.  A_eq x = b_eq,  A_in x <= b_in,  lower <= x <= upper,
// x_j in {0, 1} wherever binary[j].
struct MilpProblem {
  Eigen::VectorXd c;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_in;
  Eigen::VectorXd b_in;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<char> binary;

  static MilpProblem with_vars(int p);
  int num_vars() const { return static_cast<int>(c.size()); }
  int num_binaries() const;
  void validate() const;
  LpProblem relaxation() const;
};

enum class MilpStatus { kOptimal, kInfeasible, kGapLimit };

std::string to_string(MilpStatus status);

struct MilpOptions {
  double gap_tol = 1e-9;
  std::int64_t node_limit = 1000000;
  double int_tol = 1e-6;
  // Every dive_every-th node is taken depth-first instead of best-bound.
  int dive_every = 8;
  LpOptions lp;
};

struct MilpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  MilpStatus status = MilpStatus::kInfeasible;
  double bound = 0.0;       // global lower bound at termination
  double root_bound = 0.0;  // LP relaxation objective
  double gap = 0.0;         // (objective - bound) / max(1, |objective|)
  std::int64_t nodes_explored = 0;
};

// LP-relaxation branch and bound. Nodes warm-start from their parent basis.
// At every node a rounding repair keeps the continuous LP values and tries
// to choose binaries that satisfy all rows; when it succeeds the node is
// solved outright. Branching takes the most fractional binary among those in
// rows the repair could not satisfy (lowest index on ties), else the most
// fractional overall. `root_basis` optionally warm-starts the root LP.
MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& options = {},
                        const LpBasis* root_basis = nullptr);

// Canonical dump: as write_qp without Q, plus a binary-mask line.
void write_milp(std::ostream& out, const MilpProblem& problem);
MilpProblem read_milp(std::istream& in);

}  // namespace nordic
