#include "doctest.h"
#include "fixture.hpp"

#include "nordic/lp.hpp"

#include <cmath>
#include <limits>

using nordic::LpProblem;
using nordic::SolveStatus;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double max_violation(const LpProblem& lp, const Eigen::VectorXd& x) {
  double v = 0.0;
  if (lp.A_eq.rows()) v = std::max(v, (lp.A_eq * x - lp.b_eq).cwiseAbs().maxCoeff());
  if (lp.A_in.rows()) v = std::max(v, (lp.A_in * x - lp.b_in).maxCoeff());
  v = std::max(v, (lp.lower - x).maxCoeff());
  v = std::max(v, (x - lp.upper).maxCoeff());
  return v;
}
}  // namespace

TEST_CASE("bound-active LP") {
  auto lp = LpProblem::with_vars(1);
  lp.c << -1.0;
  lp.lower << 0.0;
  lp.upper << 3.0;
  const auto s = nordic::solve_lp(lp);
  CHECK(s.status == SolveStatus::kOptimal);
  CHECK(s.x[0] == doctest::Approx(3.0));
  CHECK(s.objective == doctest::Approx(-3.0));
}

TEST_CASE("inactive hinge") {
  // min xi  s.t.  xi >= 1 - 2,  xi >= 0
  auto lp = LpProblem::with_vars(1);
  lp.c << 1.0;
  lp.A_in.resize(1, 1);
  lp.A_in << -1.0;
  lp.b_in.resize(1);
  lp.b_in << 1.0;
  lp.lower << 0.0;
  const auto s = nordic::solve_lp(lp);
  CHECK(s.status == SolveStatus::kOptimal);
  CHECK(s.x[0] == doctest::Approx(0.0));
}

TEST_CASE("infeasible and unbounded") {
  auto lp = LpProblem::with_vars(2);
  lp.c << 1.0, 1.0;
  lp.A_eq.resize(1, 2);
  lp.A_eq << 1.0, 1.0;
  lp.b_eq.resize(1);
  lp.b_eq << 5.0;
  lp.lower << 0.0, 0.0;
  lp.upper << 1.0, 1.0;
  CHECK(nordic::solve_lp(lp).status == SolveStatus::kInfeasible);

  auto un = LpProblem::with_vars(2);
  un.c << -1.0, 0.0;
  un.A_in.resize(1, 2);
  un.A_in << 0.0, 1.0;
  un.b_in.resize(1);
  un.b_in << 1.0;
  un.lower << 0.0, 0.0;
  CHECK(nordic::solve_lp(un).status == SolveStatus::kUnbounded);
}

TEST_CASE("free variables and duals satisfy KKT") {
  // min x0 + 2 x1  s.t.  x0 + x1 = 1, x0 - x1 <= 0.5, x free
  auto lp = LpProblem::with_vars(2);
  lp.c << 1.0, 2.0;
  lp.A_eq.resize(1, 2);
  lp.A_eq << 1.0, 1.0;
  lp.b_eq.resize(1);
  lp.b_eq << 1.0;
  lp.A_in.resize(1, 2);
  lp.A_in << 1.0, -1.0;
  lp.b_in.resize(1);
  lp.b_in << 0.5;
  const auto s = nordic::solve_lp(lp);
  REQUIRE(s.status == SolveStatus::kOptimal);
  CHECK(s.x[0] == doctest::Approx(0.75));
  CHECK(s.x[1] == doctest::Approx(0.25));
  const Eigen::VectorXd stat = lp.c - lp.A_eq.transpose() * s.eq_duals + lp.A_in.transpose() * s.in_duals;
  CHECK(stat.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(s.in_duals[0] >= 0.0);
  // Strong duality: b_eq'y - b_in'l equals the primal optimum.
  CHECK(lp.b_eq.dot(s.eq_duals) - lp.b_in.dot(s.in_duals) == doctest::Approx(s.objective));
}

TEST_CASE("degenerate redundant equalities") {
  auto lp = LpProblem::with_vars(3);
  lp.c << 1.0, 1.0, 1.0;
  lp.A_eq.resize(2, 3);
  lp.A_eq << 1.0, 1.0, 0.0, 2.0, 2.0, 0.0;
  lp.b_eq.resize(2);
  lp.b_eq << 1.0, 2.0;
  lp.lower.setZero();
  const auto s = nordic::solve_lp(lp);
  REQUIRE(s.status == SolveStatus::kOptimal);
  CHECK(s.objective == doctest::Approx(1.0));
  CHECK(max_violation(lp, s.x) < 1e-9);
}

TEST_CASE("random LPs agree with vertex enumeration") {
  FixtureReader f("lp_vertex.txt");
  const int count = f.integer();
  const int p = f.integer(), q = f.integer(), r = f.integer();
  for (int t = 0; t < count; ++t) {
    LpProblem lp;
    lp.c = f.vec(p);
    lp.A_eq = f.mat(q, p);
    lp.b_eq = f.vec(q);
    lp.A_in = f.mat(r, p);
    lp.b_in = f.vec(r);
    lp.lower = f.vec(p);
    lp.upper = f.vec(p);
    const double expected = f.num();
    const auto s = nordic::solve_lp(lp);
    CAPTURE(t);
    REQUIRE(s.status == SolveStatus::kOptimal);
    CHECK(std::abs(s.objective - expected) <= 1e-8);
    CHECK(max_violation(lp, s.x) < 1e-9);
  }
}

TEST_CASE("warm resolve after bound changes matches a cold solve") {
  FixtureReader f("lp_vertex.txt");
  const int count = f.integer();
  const int p = f.integer(), q = f.integer(), r = f.integer();
  for (int t = 0; t < count; ++t) {
    LpProblem lp;
    lp.c = f.vec(p);
    lp.A_eq = f.mat(q, p);
    lp.b_eq = f.vec(q);
    lp.A_in = f.mat(r, p);
    lp.b_in = f.vec(r);
    lp.lower = f.vec(p);
    lp.upper = f.vec(p);
    f.num();
    nordic::SimplexSolver solver(lp);
    const auto first = solver.solve();
    REQUIRE(first.status == SolveStatus::kOptimal);
    // Tighten the box around the first solution's opposite corner.
    Eigen::VectorXd lo = lp.lower, up = lp.upper;
    const int j = t % p;
    if (first.x[j] > 0.5 * (lo[j] + up[j])) up[j] = 0.5 * (lo[j] + up[j]);
    else lo[j] = 0.5 * (lo[j] + up[j]);
    const auto warm = solver.resolve(lo, up, first.basis);
    LpProblem tight = lp;
    tight.lower = lo;
    tight.upper = up;
    const auto cold = nordic::solve_lp(tight);
    CAPTURE(t);
    REQUIRE(warm.status == cold.status);
    if (cold.status == SolveStatus::kOptimal) {
      CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-9));
      CHECK(warm.objective >= first.objective - 1e-9);
    }
  }
}
