#include "doctest.h"

#include "nordic/model.hpp"
#include "nordic/nordic.hpp"
#include "nordic/predict.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>

using namespace nordic;

namespace {

OrdinalModel sample_model() {
  OrdinalModel m;
  m.method = Method::kNordic2;
  m.kernel = KernelSpec::rbf(0.1 + 1.0 / 3.0);
  m.num_classes = 3;
  m.support = (Eigen::MatrixXd(2, 2) << 0.1, 1e-300, -2.0 / 3.0, 12345.678901234567).finished();
  m.omega = (Eigen::MatrixXd(2, 2) << std::sqrt(2.0), -0.0, 1e20, 5e-324).finished();
  m.bias = (Eigen::VectorXd(2) << 0.3, -std::acos(-1.0)).finished();
  m.info.solver_status = "optimal";
  m.info.objective = 1.0 / 7.0;
  m.info.dual_objective = std::numeric_limits<double>::quiet_NaN();
  m.info.nodes = 42;
  m.info.big_m = 1e6;
  return m;
}

}  // namespace

TEST_CASE("method names") {
  for (Method m : {Method::kNordic0, Method::kNordic1, Method::kNordic2, Method::kBsvm, Method::kCk})
    CHECK(parse_method(to_string(m)) == m);
  CHECK(parse_method("NORDIC-2") == Method::kNordic2);
  CHECK(parse_method("nordic_0") == Method::kNordic0);
  CHECK_THROWS_AS(parse_method("svr"), std::invalid_argument);
}

TEST_CASE("JSON round trip is bit stable") {
  const OrdinalModel m = sample_model();
  const std::string text = model_to_json(m);
  const OrdinalModel r = model_from_json(text);
  CHECK(r.method == m.method);
  CHECK(r.kernel.width == m.kernel.width);
  CHECK(r.num_classes == 3);
  CHECK(r.support == m.support);
  CHECK(r.omega == m.omega);
  CHECK(r.bias == m.bias);
  CHECK(std::signbit(r.omega(0, 1)));
  CHECK(r.info.objective == m.info.objective);
  CHECK(std::isnan(r.info.dual_objective));
  CHECK(r.info.nodes == 42);
  CHECK(model_to_json(r) == text);

  const auto j = nlohmann::json::parse(text);
  CHECK(j["format"] == "nordic-model");
  CHECK(j["version"] == 1);
  CHECK(j["info"]["dual_objective"].is_null());
}

TEST_CASE("linear model round trip") {
  OrdinalModel m;
  m.method = Method::kCk;
  m.kernel = KernelSpec::linear();
  m.num_classes = 2;
  m.omega = (Eigen::MatrixXd(1, 3) << 1.0, 2.0, 3.0).finished();
  m.bias = Eigen::VectorXd::Constant(1, -1.0);
  const OrdinalModel r = model_from_json(model_to_json(m));
  CHECK(r.linear_primal());
  CHECK(r.input_dim() == 3);
  CHECK(r.omega == m.omega);
}

TEST_CASE("malformed records are rejected") {
  CHECK_THROWS(model_from_json("{}"));
  CHECK_THROWS(model_from_json("not json"));
  auto j = nlohmann::json::parse(model_to_json(sample_model()));
  j["version"] = 2;
  CHECK_THROWS(model_from_json(j.dump()));
  j = nlohmann::json::parse(model_to_json(sample_model()));
  j["bias"] = {1.0};
  CHECK_THROWS(model_from_json(j.dump()));
}

TEST_CASE("saved model predicts identically") {
  Eigen::MatrixXd x(9, 1);
  x << -2.1, -2.0, -1.9, 0.0, 0.1, -0.1, 2.0, 2.1, 1.9;
  const OrdinalDataset data(x, {1, 1, 1, 2, 2, 2, 3, 3, 3}, 3);
  HyperParams hp;
  hp.kernel = KernelSpec::rbf(1.0);
  const OrdinalModel m = train_nordic1(data, hp);
  const std::string path = "test_model_roundtrip.json";
  save_model(path, m);
  const OrdinalModel r = load_model(path);
  std::remove(path.c_str());
  const Eigen::MatrixXd probe = Eigen::VectorXd::LinSpaced(50, -3.0, 3.0);
  CHECK(decision_values(m, probe) == decision_values(r, probe));
  CHECK_THROWS(load_model("missing_model.json"));
}
