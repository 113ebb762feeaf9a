#include "nordic/milp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

namespace nordic {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Rows touching binaries, for the rounding repair.
struct RowIndex {
  std::vector<std::vector<std::pair<int, double>>> row_bins;  // row -> (binary var, coefficient)
  std::vector<std::vector<int>> bin_rows;                     // var -> rows
};

class Repair {
 public:
  Repair(const MilpProblem& problem) : pr_(problem), q_(static_cast<int>(problem.A_eq.rows())) {
    const int m = q_ + static_cast<int>(problem.A_in.rows());
    const int p = problem.num_vars();
    idx_.row_bins.resize(m);
    idx_.bin_rows.resize(p);
    for (int j = 0; j < p; ++j) {
      if (!problem.binary[j]) continue;
      bins_.push_back(j);
      for (int i = 0; i < m; ++i) {
        const double a = coef(i, j);
        if (a != 0.0) {
          idx_.row_bins[i].emplace_back(j, a);
          idx_.bin_rows[j].push_back(i);
        }
      }
    }
  }

  // Returns true and fills `out` when binaries can be chosen to satisfy all
  // rows with the continuous part of x held fixed. On failure `failed`
  // receives the rows that ruled out both values of some binary.
  bool run(const Eigen::VectorXd& x, Eigen::VectorXd& out, std::vector<int>& failed) const {
    const int m = static_cast<int>(idx_.row_bins.size());
    out = x;
    for (int j : bins_) out[j] = 0.0;
    // Optimistic activity range per row given undecided binaries.
    std::vector<double> lo(m), hi(m);
    for (int i = 0; i < m; ++i) {
      const double base = activity(i, out);
      lo[i] = hi[i] = base;
      for (const auto& [j, a] : idx_.row_bins[i]) {
        lo[i] += std::min(0.0, a);
        hi[i] += std::max(0.0, a);
      }
    }
    failed.clear();
    for (int j : bins_) {
      const double first = pr_.c[j] < 0.0 ? 1.0 : 0.0;
      bool placed = false;
      for (double v : {first, 1.0 - first}) {
        if (v < pr_.lower[j] - 1e-12 || v > pr_.upper[j] + 1e-12) continue;
        bool ok = true;
        for (int i : idx_.bin_rows[j]) {
          const double a = coef(i, j);
          const double nlo = lo[i] - std::min(0.0, a) + a * v;
          const double nhi = hi[i] - std::max(0.0, a) + a * v;
          const double b = rhs(i);
          const double tol = 1e-9 * (1.0 + std::abs(b));
          if (nlo > b + tol || (i < q_ && nhi < b - tol)) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        for (int i : idx_.bin_rows[j]) {
          const double a = coef(i, j);
          lo[i] += -std::min(0.0, a) + a * v;
          hi[i] += -std::max(0.0, a) + a * v;
        }
        out[j] = v;
        placed = true;
        break;
      }
      if (!placed) {
        failed = idx_.bin_rows[j];
        return false;
      }
    }
    // Rows without binaries must hold for the LP point already; recheck all.
    for (int i = 0; i < m; ++i) {
      const double act = activity(i, out);
      const double b = rhs(i);
      const double tol = 1e-8 * (1.0 + std::abs(b));
      if (act > b + tol || (i < q_ && act < b - tol)) {
        failed.push_back(i);
        return false;
      }
    }
    return true;
  }

  const std::vector<std::pair<int, double>>& row_bins(int i) const { return idx_.row_bins[i]; }

 private:
  double coef(int i, int j) const { return i < q_ ? pr_.A_eq(i, j) : pr_.A_in(i - q_, j); }
  double rhs(int i) const { return i < q_ ? pr_.b_eq[i] : pr_.b_in[i - q_]; }
  double activity(int i, const Eigen::VectorXd& x) const {
    return i < q_ ? pr_.A_eq.row(i).dot(x) : pr_.A_in.row(i - q_).dot(x);
  }

  const MilpProblem& pr_;
  int q_;
  RowIndex idx_;
  std::vector<int> bins_;
};

struct Node {
  Eigen::VectorXd lower, upper;
  double bound = -kInf;
  LpBasis basis;
};

double frac_score(double v) { return 0.5 - std::abs(v - std::floor(v) - 0.5); }

}  // namespace

std::string to_string(MilpStatus status) {
  switch (status) {
    case MilpStatus::kOptimal:
      return "optimal";
    case MilpStatus::kInfeasible:
      return "infeasible";
    case MilpStatus::kGapLimit:
      return "gap_limit";
  }
  return "unknown";
}

MilpProblem MilpProblem::with_vars(int p) {
  MilpProblem m;
  const auto lp = LpProblem::with_vars(p);
  m.c = lp.c;
  m.A_eq = lp.A_eq;
  m.b_eq = lp.b_eq;
  m.A_in = lp.A_in;
  m.b_in = lp.b_in;
  m.lower = lp.lower;
  m.upper = lp.upper;
  m.binary.assign(p, 0);
  return m;
}

int MilpProblem::num_binaries() const { return static_cast<int>(std::count(binary.begin(), binary.end(), 1)); }

void MilpProblem::validate() const {
  relaxation().validate();
  if (static_cast<int>(binary.size()) != num_vars()) throw std::invalid_argument("MILP: binary mask length mismatch");
  for (int j = 0; j < num_vars(); ++j) {
    if (binary[j] && (lower[j] < 0.0 || upper[j] > 1.0)) {
      throw std::invalid_argument("MILP: binary variable " + std::to_string(j) + " has bounds outside [0,1]");
    }
  }
}

LpProblem MilpProblem::relaxation() const {
  LpProblem lp;
  lp.c = c;
  lp.A_eq = A_eq;
  lp.b_eq = b_eq;
  lp.A_in = A_in;
  lp.b_in = b_in;
  lp.lower = lower;
  lp.upper = upper;
  return lp;
}

MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& options, const LpBasis* root_basis) {
  problem.validate();
  const int p = problem.num_vars();
  SimplexSolver solver(problem.relaxation(), options.lp);
  const Repair repair(problem);

  MilpSolution best;
  best.objective = kInf;
  auto tolerance = [&](double inc) { return options.gap_tol * std::max(1.0, std::abs(inc)); };

  std::map<std::int64_t, Node> open;
  std::set<std::pair<double, std::int64_t>> by_bound;
  std::int64_t next_id = 0;
  auto push = [&](Node node) {
    by_bound.emplace(node.bound, next_id);
    open.emplace(next_id, std::move(node));
    ++next_id;
  };
  push(Node{problem.lower, problem.upper, -kInf, {}});

  bool root = true;
  std::int64_t explored = 0;
  Eigen::VectorXd repaired;
  std::vector<int> failed;

  while (!open.empty()) {
    if (explored >= options.node_limit) break;
    auto it = open.begin();
    if (options.dive_every > 0 && (explored + 1) % options.dive_every == 0) it = std::prev(open.end());
    else it = open.find(by_bound.begin()->second);
    Node node = std::move(it->second);
    by_bound.erase({node.bound, it->first});
    open.erase(it);
    if (node.bound >= best.objective - tolerance(best.objective)) continue;
    ++explored;

    LpSolution lp = !root                  ? solver.resolve(node.lower, node.upper, node.basis)
                     : root_basis != nullptr ? solver.resolve(node.lower, node.upper, *root_basis)
                                             : solver.solve();
    if (root) {
      best.root_bound = lp.objective;
      root = false;
      if (lp.status == SolveStatus::kUnbounded) throw std::runtime_error("MILP: LP relaxation is unbounded");
    }
    if (lp.status == SolveStatus::kInfeasible) continue;
    if (lp.status != SolveStatus::kOptimal) throw std::runtime_error("MILP: node LP failed (" + to_string(lp.status) + ")");
    if (lp.objective >= best.objective - tolerance(best.objective)) continue;

    int most = -1;
    double most_score = options.int_tol;
    for (int j = 0; j < p; ++j) {
      if (!problem.binary[j]) continue;
      const double sc = frac_score(lp.x[j]);
      if (sc > most_score) {
        most_score = sc;
        most = j;
      }
    }
    if (most < 0) {
      Eigen::VectorXd x = lp.x;
      for (int j = 0; j < p; ++j)
        if (problem.binary[j]) x[j] = std::round(x[j]);
      best.x = x;
      best.objective = problem.c.dot(x);
      continue;
    }

    int branch = -1;
    if (repair.run(lp.x, repaired, failed)) {
      const double value = problem.c.dot(repaired);
      if (value < best.objective) {
        best.objective = value;
        best.x = repaired;
      }
      if (value <= lp.objective + tolerance(lp.objective)) continue;
    } else {
      double score = options.int_tol;
      for (int i : failed) {
        for (const auto& [j, a] : repair.row_bins(i)) {
          (void)a;
          const double sc = frac_score(lp.x[j]);
          if (sc > score || (sc == score && branch >= 0 && j < branch)) {
            score = sc;
            branch = j;
          }
        }
      }
    }
    if (branch < 0) branch = most;

    Node down{node.lower, node.upper, lp.objective, lp.basis};
    down.upper[branch] = 0.0;
    Node up{std::move(node.lower), std::move(node.upper), lp.objective, std::move(lp.basis)};
    up.lower[branch] = 1.0;
    // The child on the rounding side gets the later id, so dives follow it.
    if (lp.x[branch] >= 0.5) {
      push(std::move(down));
      push(std::move(up));
    } else {
      push(std::move(up));
      push(std::move(down));
    }
  }

  best.nodes_explored = explored;
  if (!std::isfinite(best.objective)) {
    best.status = open.empty() ? MilpStatus::kInfeasible : MilpStatus::kGapLimit;
    best.bound = open.empty() ? kInf : by_bound.begin()->first;
    best.gap = kInf;
    return best;
  }
  best.bound = open.empty() ? best.objective : std::min(best.objective, by_bound.begin()->first);
  best.gap = (best.objective - best.bound) / std::max(1.0, std::abs(best.objective));
  best.status = open.empty() || best.gap <= options.gap_tol ? MilpStatus::kOptimal : MilpStatus::kGapLimit;
  return best;
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

Eigen::MatrixXd read_block(std::istream& in, const std::string& name) {
  std::string tag;
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> tag >> rows >> cols) || tag != name) throw std::runtime_error("problem dump: expected block " + name);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::string tok;
      if (!(in >> tok)) throw std::runtime_error("problem dump truncated");
      m(i, j) = tok == "inf" ? kInf : tok == "-inf" ? -kInf : std::stod(tok);
    }
  }
  return m;
}

}  // namespace

void write_milp(std::ostream& out, const MilpProblem& problem) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  out << "milp " << problem.num_vars() << ' ' << problem.A_eq.rows() << ' ' << problem.A_in.rows() << '\n';
  write_block(out, "c", problem.c.transpose());
  write_block(out, "A_eq", problem.A_eq);
  write_block(out, "b_eq", problem.b_eq.transpose());
  write_block(out, "A_in", problem.A_in);
  write_block(out, "b_in", problem.b_in.transpose());
  write_block(out, "lower", problem.lower.transpose());
  write_block(out, "upper", problem.upper.transpose());
  out << "binary";
  for (char b : problem.binary) out << ' ' << (b ? 1 : 0);
  out << '\n';
  out.flags(flags);
  out.precision(prec);
}

MilpProblem read_milp(std::istream& in) {
  std::string tag;
  int p = 0, q = 0, r = 0;
  if (!(in >> tag >> p >> q >> r) || tag != "milp") throw std::runtime_error("problem dump: missing milp header");
  MilpProblem m;
  m.c = read_block(in, "c").transpose();
  m.A_eq = read_block(in, "A_eq");
  m.b_eq = read_block(in, "b_eq").transpose();
  m.A_in = read_block(in, "A_in");
  m.b_in = read_block(in, "b_in").transpose();
  m.lower = read_block(in, "lower").transpose();
  m.upper = read_block(in, "upper").transpose();
  if (m.num_vars() != p || m.A_eq.rows() != q || m.A_in.rows() != r) {
    throw std::runtime_error("problem dump: header does not match blocks");
  }
  if (q == 0) m.A_eq.resize(0, p);
  if (r == 0) m.A_in.resize(0, p);
  if (!(in >> tag) || tag != "binary") throw std::runtime_error("problem dump: missing binary mask");
  m.binary.resize(p);
  for (int j = 0; j < p; ++j) {
    int b = 0;
    if (!(in >> b)) throw std::runtime_error("problem dump: short binary mask");
    m.binary[j] = static_cast<char>(b != 0);
  }
  m.validate();
  return m;
}

}  // namespace nordic
