#include "doctest.h"

#include "nordic/eval.hpp"

#include <cstdio>
#include <fstream>
#include <vector>

using namespace nordic;

using Labels = std::vector<int>;

TEST_CASE("error rate") {
  CHECK(error_rate(Labels{1, 2, 3}, Labels{1, 2, 3}) == 0.0);
  CHECK(error_rate(Labels{2, 3, 1}, Labels{1, 2, 3}) == 1.0);
  CHECK(error_rate(Labels{1, 1, 1, 1, 1, 1, 1, 2, 2, 2}, Labels(10, 1)) == doctest::Approx(0.3));
  CHECK_THROWS_AS(error_rate(Labels{}, Labels{}), std::invalid_argument);
  CHECK_THROWS_AS(error_rate(Labels{1}, Labels{1, 2}), std::invalid_argument);
}

TEST_CASE("donut costs") {
  const CostMatrix c = CostMatrix::preset("donut-costs", 3);
  CHECK(c(1, 3) == 3.0);
  CHECK(c(2, 1) == 1.0);
  CHECK(c(3, 1) == 1.0);
  CHECK(c(1, 2) == 2.0);
  CHECK(c(3, 2) == 2.0);
  CHECK(c(2, 3) == 1.0);
  CHECK(c(1, 3) == c(2, 3) + c(1, 2));
  CHECK(c.entries().diagonal().isZero());
  CHECK(weighted_error(Labels{1}, Labels{3}, c) == 3.0);
}

TEST_CASE("balance costs") {
  const CostMatrix c = CostMatrix::preset("balance-costs", 3);
  CHECK(c(3, 1) == 2.0);
  CHECK(c(2, 1) == 1.0);
  CHECK(c(1, 3) == 2.0);
  CHECK(c(2, 3) == 1.0);
  CHECK(c(1, 2) == 1.0);
  CHECK_THROWS_AS(CostMatrix::preset("balance-costs", 4), std::invalid_argument);
  CHECK_THROWS_AS(CostMatrix::preset("nope", 3), std::invalid_argument);
}

TEST_CASE("weighted error") {
  const CostMatrix d = CostMatrix::preset("donut-costs", 3);
  // truth:     1 2 3 3 1
  // predicted: 1 1 1 2 3  costs 0 2 3 1 1
  CHECK(weighted_error(Labels{1, 1, 1, 2, 3}, Labels{1, 2, 3, 3, 1}, d) == doctest::Approx(7.0 / 5.0));
  CHECK_THROWS_AS(weighted_error(Labels{4}, Labels{1}, d), std::out_of_range);

  const Labels p{1, 2, 3, 3, 2, 1, 1};
  const Labels t{1, 3, 3, 1, 2, 2, 1};
  CHECK(weighted_error(p, t, CostMatrix::zero_one(3)) == error_rate(p, t));
}

TEST_CASE("cost matrix validation") {
  CHECK_THROWS_AS(CostMatrix(Eigen::MatrixXd::Ones(2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(CostMatrix(Eigen::MatrixXd::Ones(2, 2)), std::invalid_argument);
  Eigen::MatrixXd neg = Eigen::MatrixXd::Zero(2, 2);
  neg(0, 1) = -1.0;
  CHECK_THROWS_AS(CostMatrix{neg}, std::invalid_argument);
}

TEST_CASE("cost matrix from file") {
  const std::string path = "test_eval_costs.txt";
  {
    std::ofstream out(path);
    out << "0, 2, 3\n1 0 1\n\n1,2,0\n";
  }
  const CostMatrix c = CostMatrix::from_file(path);
  CHECK(c.entries() == CostMatrix::preset("donut-costs", 3).entries());
  {
    std::ofstream out(path);
    out << "0 1\n1 0 4\n";
  }
  CHECK_THROWS(CostMatrix::from_file(path));
  std::remove(path.c_str());
  CHECK_THROWS(CostMatrix::from_file("missing_costs.txt"));
}

TEST_CASE("confusion matrix") {
  const ConfusionMatrix perfect = confusion(Labels{1, 2, 3, 3}, Labels{1, 2, 3, 3}, 3);
  CHECK(perfect.counts.isDiagonal());
  CHECK(perfect.counts(2, 2) == 2);

  const ConfusionMatrix one = confusion(Labels{3}, Labels{2}, 3);
  CHECK(one.counts(2, 1) == 1);
  CHECK(one.total() == 1);

  const Labels p{1, 2, 2, 3, 1, 3, 2};
  const Labels t{1, 1, 2, 3, 3, 3, 2};
  const ConfusionMatrix c = confusion(p, t, 3);
  CHECK(c.total() == 7);
  CHECK(error_rate(p, t) == doctest::Approx(1.0 - c.counts.trace() / 7.0));
  const Eigen::MatrixXd norm = c.normalized();
  for (int j = 0; j < 3; ++j) CHECK(norm.col(j).sum() == doctest::Approx(1.0));

  CHECK(confusion(Labels{1}, Labels{1}, 3).normalized().col(1).isZero());
  CHECK_THROWS_AS(confusion(Labels{0}, Labels{1}, 3), std::out_of_range);
}

TEST_CASE("distance loss") {
  CHECK(distance_loss(Labels{1, 2}, Labels{1, 2}) == 0.0);
  CHECK(distance_loss(Labels{3}, Labels{1}) == 2.0);
  CHECK(distance_loss(Labels{2, 1, 4, 3}, Labels{1, 2, 3, 4}) == 1.0);
}
