#include "doctest.h"
#include "fixture.hpp"

#include "nordic/qp.hpp"
#include "nordic/rng.hpp"

#include <cmath>
#include <limits>
#include <sstream>

using nordic::QpProblem;
using nordic::SolveStatus;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Instance {
  QpProblem qp;
  Eigen::VectorXd theta;
  double objective;
};

std::vector<Instance> load_pg() {
  FixtureReader f("qp_pg.txt");
  const int count = f.integer();
  std::vector<Instance> out;
  for (int t = 0; t < count; ++t) {
    const int p = f.integer();
    Instance in{QpProblem::with_vars(p), {}, 0.0};
    in.qp.Q = f.mat(p, p);
    in.qp.c = f.vec(p);
    in.qp.A_eq = f.vec(p).transpose();
    in.qp.b_eq = f.vec(1);
    in.qp.lower = f.vec(p);
    in.qp.upper = f.vec(p);
    in.theta = f.vec(p);
    in.objective = f.num();
    out.push_back(std::move(in));
  }
  return out;
}

QpProblem random_box_qp(nordic::Rng& rng, int p, int rank) {
  auto qp = QpProblem::with_vars(p);
  Eigen::MatrixXd b(rank, p);
  for (int i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
  qp.Q = b.transpose() * b;
  for (int j = 0; j < p; ++j) {
    qp.c[j] = rng.normal();
    qp.lower[j] = -rng.uniform(0.1, 1.0);
    qp.upper[j] = rng.uniform(0.1, 1.0);
  }
  return qp;
}
}  // namespace

TEST_CASE("interior minimum") {
  auto qp = QpProblem::with_vars(1);
  qp.Q << 1.0;
  qp.c << -1.0;
  qp.lower << 0.0;
  qp.upper << 10.0;
  const auto s = nordic::solve_qp(qp);
  REQUIRE(s.status == SolveStatus::kOptimal);
  CHECK(s.theta[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.objective == doctest::Approx(-0.5).epsilon(1e-8));
}

TEST_CASE("symmetric equality") {
  auto qp = QpProblem::with_vars(2);
  qp.Q.setIdentity();
  qp.A_eq = Eigen::RowVector2d(1.0, 1.0);
  qp.b_eq = Eigen::VectorXd::Ones(1);
  const auto s = nordic::solve_qp(qp);
  REQUIRE(s.status == SolveStatus::kOptimal);
  CHECK(s.theta[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(s.theta[1] == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("random instances match the projected-gradient oracle") {
  for (const auto& in : load_pg()) {
    const auto s = nordic::solve_qp(in.qp);
    REQUIRE(s.status == SolveStatus::kOptimal);
    CHECK((s.theta - in.theta).cwiseAbs().maxCoeff() <= 1e-4);
    CHECK(std::abs(s.objective - in.objective) <= 1e-6);
    const double dual = nordic::qp_dual_objective(in.qp, s);
    CHECK(std::abs(s.objective - dual) <= 1e-6 * (1.0 + std::abs(s.objective)));
    const auto kkt = nordic::kkt_residuals(in.qp, s);
    const double scale = 1.0 + in.qp.c.cwiseAbs().maxCoeff();
    CHECK(kkt.stationarity <= 1e-8 * scale);
    CHECK(kkt.primal <= 1e-8 * scale);
    CHECK(kkt.complementarity <= 1e-8 * scale);
  }
}

TEST_CASE("inequality rows") {
  // min 1/2|t|^2 - t0 - t1  s.t.  t0 + 2 t1 <= 1
  auto qp = QpProblem::with_vars(2);
  qp.Q.setIdentity();
  qp.c << -1.0, -1.0;
  qp.A_in = Eigen::RowVector2d(1.0, 2.0);
  qp.b_in = Eigen::VectorXd::Ones(1);
  const auto s = nordic::solve_qp(qp);
  REQUIRE(s.status == SolveStatus::kOptimal);
  // Projection of (1,1) onto the half-plane: (1,1) - (2/5)(1,2).
  CHECK(s.theta[0] == doctest::Approx(0.6).epsilon(1e-8));
  CHECK(s.theta[1] == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(s.in_duals[0] == doctest::Approx(0.4).epsilon(1e-7));
}

TEST_CASE("scaling equivariance and bound monotonicity") {
  nordic::Rng rng(11);
  for (int t = 0; t < 10; ++t) {
    auto qp = random_box_qp(rng, 6, 6);
    const auto base = nordic::solve_qp(qp);
    REQUIRE(base.status == SolveStatus::kOptimal);
    auto scaled = qp;
    scaled.Q *= 3.5;
    scaled.c *= 3.5;
    const auto s2 = nordic::solve_qp(scaled);
    REQUIRE(s2.status == SolveStatus::kOptimal);
    CHECK(s2.objective == doctest::Approx(3.5 * base.objective).epsilon(1e-7));
    CHECK((s2.theta - base.theta).cwiseAbs().maxCoeff() < 1e-6);

    auto tight = qp;
    tight.upper[t % 6] = 0.5 * (tight.lower[t % 6] + tight.upper[t % 6]);
    const auto s3 = nordic::solve_qp(tight);
    REQUIRE(s3.status == SolveStatus::kOptimal);
    CHECK(s3.objective >= base.objective - 1e-8);
  }
}

TEST_CASE("rank-deficient Hessian") {
  nordic::Rng rng(12);
  auto qp = random_box_qp(rng, 8, 2);
  qp.A_eq = Eigen::RowVectorXd::Ones(8);
  qp.b_eq = Eigen::VectorXd::Zero(1);
  const auto s = nordic::solve_qp(qp);
  REQUIRE(s.status == SolveStatus::kOptimal);
  CHECK(std::abs(s.objective - nordic::qp_dual_objective(qp, s)) <= 1e-6 * (1.0 + std::abs(s.objective)));
}

TEST_CASE("low-rank factor path agrees with the dense path") {
  nordic::Rng rng(13);
  const int p = 60;
  Eigen::MatrixXd v(5, p);
  for (int i = 0; i < v.size(); ++i) v.data()[i] = rng.normal();
  auto dense = QpProblem::with_vars(p);
  dense.Q = v.transpose() * v;
  for (int j = 0; j < p; ++j) dense.c[j] = rng.normal();
  dense.lower.setZero();
  dense.upper.setConstant(2.0);
  dense.A_eq = Eigen::MatrixXd::Zero(2, p);
  for (int j = 0; j < p; ++j) dense.A_eq(j % 2, j) = j % 3 == 0 ? -1.0 : 1.0;
  dense.b_eq = Eigen::VectorXd::Zero(2);
  auto low = dense;
  low.Q.resize(0, 0);
  low.Q_factor = v;
  const auto a = nordic::solve_qp(dense);
  const auto b = nordic::solve_qp(low);
  REQUIRE(a.status == SolveStatus::kOptimal);
  REQUIRE(b.status == SolveStatus::kOptimal);
  CHECK(b.objective == doctest::Approx(a.objective).epsilon(1e-8));
}

TEST_CASE("fixed variables are substituted") {
  auto qp = QpProblem::with_vars(2);
  qp.Q.setIdentity();
  qp.c << -1.0, -1.0;
  qp.lower << 0.25, -kInf;
  qp.upper << 0.25, kInf;
  qp.A_eq = Eigen::RowVector2d(1.0, 1.0);
  qp.b_eq = Eigen::VectorXd::Ones(1);
  const auto s = nordic::solve_qp(qp);
  REQUIRE(s.status == SolveStatus::kOptimal);
  CHECK(s.theta[0] == 0.25);
  CHECK(s.theta[1] == doctest::Approx(0.75));
  CHECK(nordic::kkt_residuals(qp, s).stationarity < 1e-8);
}

TEST_CASE("infeasible constraints are certified") {
  auto qp = QpProblem::with_vars(2);
  qp.Q.setIdentity();
  qp.lower.setZero();
  qp.upper.setOnes();
  qp.A_eq = Eigen::RowVector2d(1.0, 1.0);
  qp.b_eq = Eigen::VectorXd::Constant(1, 3.0);
  CHECK(nordic::solve_qp(qp).status == SolveStatus::kInfeasible);
}

TEST_CASE("linear programs through the simplex path") {
  auto lp = QpProblem::with_vars(1);
  lp.c << -1.0;
  lp.lower << 0.0;
  lp.upper << 3.0;
  const auto s = nordic::solve_lp_via_qp(lp);
  REQUIRE(s.status == SolveStatus::kOptimal);
  CHECK(s.theta[0] == 3.0);

  auto hinge = QpProblem::with_vars(1);
  hinge.c << 1.0;
  hinge.A_in = Eigen::MatrixXd::Constant(1, 1, -1.0);
  hinge.b_in = Eigen::VectorXd::Constant(1, 2.0 - 1.0);  // -xi <= m - 1
  hinge.lower << 0.0;
  CHECK(nordic::solve_lp_via_qp(hinge).theta[0] == 0.0);

  auto unb = QpProblem::with_vars(1);
  unb.c << -1.0;
  CHECK(nordic::solve_lp_via_qp(unb).status == SolveStatus::kUnbounded);

  auto bad = QpProblem::with_vars(1);
  bad.Q << 1.0;
  CHECK_THROWS_AS(nordic::solve_lp_via_qp(bad), std::invalid_argument);
}

TEST_CASE("canonical dump round trip") {
  const auto inst = load_pg().front();
  std::stringstream ss;
  nordic::write_qp(ss, inst.qp);
  const auto back = nordic::read_qp(ss);
  CHECK(back.Q == inst.qp.Q);
  CHECK(back.c == inst.qp.c);
  CHECK(back.A_eq == inst.qp.A_eq);
  CHECK(back.lower == inst.qp.lower);

  auto open = QpProblem::with_vars(2);
  open.Q.setIdentity();
  std::stringstream s2;
  nordic::write_qp(s2, open);
  const auto back2 = nordic::read_qp(s2);
  CHECK(std::isinf(back2.upper[1]));
  CHECK(back2.A_in.rows() == 0);
}

TEST_CASE("input validation") {
  auto qp = QpProblem::with_vars(2);
  qp.Q(0, 1) = 1.0;
  CHECK_THROWS_AS(nordic::solve_qp(qp), std::invalid_argument);
  auto qp2 = QpProblem::with_vars(2);
  qp2.lower[0] = 1.0;
  qp2.upper[0] = 0.0;
  CHECK_THROWS_AS(nordic::solve_qp(qp2), std::invalid_argument);
}
