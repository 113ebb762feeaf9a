#include "nordic/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nordic {

namespace {
using nlohmann::json;

constexpr int kFormatVersion = 1;

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& rows, Eigen::Index cols_if_empty = 0) {
  if (!rows.is_array()) throw std::runtime_error("model: matrix must be an array of rows");
  if (rows.empty()) return Eigen::MatrixXd(0, cols_if_empty);
  const auto cols = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw std::runtime_error("model: ragged matrix");
    }
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number_or_nan(const json& v) { return v.is_null() ? std::nan("") : v.get<double>(); }
}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kNordic0:
      return "nordic0";
    case Method::kNordic1:
      return "nordic1";
    case Method::kNordic2:
      return "nordic2";
    case Method::kBsvm:
      return "bsvm";
    case Method::kCk:
      return "ck";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  std::string key;
  for (char ch : name) {
    if (ch == '-' || ch == '_') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  for (Method m : {Method::kNordic0, Method::kNordic1, Method::kNordic2, Method::kBsvm, Method::kCk}) {
    if (key == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected nordic0, nordic1, nordic2, bsvm, ck)");
}

void HyperParams::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw std::invalid_argument("C must be positive");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be positive");
  kernel.validate();
}

void HyperParams::set_penalty(Method method, double value) {
  if (method == Method::kNordic2) {
    lambda = value;
  } else {
    C = value;
  }
}

std::string model_to_json(const OrdinalModel& model) {
  json j;
  j["format"] = "nordic-model";
  j["version"] = kFormatVersion;
  j["method"] = to_string(model.method);
  j["kernel"] = {{"type", model.kernel.is_rbf() ? "rbf" : "linear"}};
  if (model.kernel.is_rbf()) j["kernel"]["width"] = model.kernel.width;
  j["num_classes"] = model.num_classes;
  j["input_dim"] = model.input_dim();
  j["support"] = matrix_json(model.support);
  j["omega"] = matrix_json(model.omega);
  j["bias"] = std::vector<double>(model.bias.data(), model.bias.data() + model.bias.size());
  j["info"] = {{"solver_status", model.info.solver_status},
               {"objective", finite_or_null(model.info.objective)},
               {"dual_objective", finite_or_null(model.info.dual_objective)},
               {"iterations", model.info.iterations},
               {"nodes", model.info.nodes},
               {"gap", finite_or_null(model.info.gap)},
               {"big_m", finite_or_null(model.info.big_m)},
               {"max_clip", finite_or_null(model.info.max_clip)}};
  return j.dump(1);
}

OrdinalModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model: invalid JSON: ") + e.what());
  }
  try {
    if (j.value("format", "") != "nordic-model") throw std::runtime_error("model: not a nordic-model record");
    const int version = j.at("version").get<int>();
    if (version != kFormatVersion) throw std::runtime_error("model: unsupported version " + std::to_string(version));
    OrdinalModel model;
    model.method = parse_method(j.at("method").get<std::string>());
    const json& kernel = j.at("kernel");
    const std::string kind = kernel.at("type").get<std::string>();
    if (kind == "rbf") {
      model.kernel = KernelSpec::rbf(kernel.at("width").get<double>());
    } else if (kind == "linear") {
      model.kernel = KernelSpec::linear();
    } else {
      throw std::runtime_error("model: unknown kernel '" + kind + "'");
    }
    model.num_classes = j.at("num_classes").get<int>();
    const auto dim = static_cast<Eigen::Index>(j.value("input_dim", 0));
    model.support = matrix_from(j.at("support"), dim);
    model.omega = matrix_from(j.at("omega"));
    const auto bias = j.at("bias").get<std::vector<double>>();
    model.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
    if (model.num_classes < 2) throw std::runtime_error("model: num_classes must be at least 2");
    const Eigen::Index m = model.num_classes - 1;
    if (model.bias.size() != m || model.omega.rows() != m) {
      throw std::runtime_error("model: omega and bias must have K-1 rows");
    }
    if (!model.linear_primal() && model.omega.cols() != model.support.rows()) {
      throw std::runtime_error("model: omega columns must match support points");
    }
    if (model.linear_primal() && model.kernel.is_rbf()) throw std::runtime_error("model: RBF model without support");
    if (j.contains("info")) {
      const json& info = j["info"];
      model.info.solver_status = info.value("solver_status", "");
      model.info.objective = number_or_nan(info.value("objective", json(nullptr)));
      model.info.dual_objective = number_or_nan(info.value("dual_objective", json(nullptr)));
      model.info.iterations = info.value("iterations", 0);
      model.info.nodes = info.value("nodes", std::int64_t{0});
      model.info.gap = number_or_nan(info.value("gap", json(nullptr)));
      model.info.big_m = number_or_nan(info.value("big_m", json(nullptr)));
      model.info.max_clip = number_or_nan(info.value("max_clip", json(nullptr)));
    }
    return model;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model: malformed record: ") + e.what());
  }
}

void save_model(const std::string& path, const OrdinalModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file '" + path + "'");
  out << model_to_json(model) << '\n';
  if (!out) throw std::runtime_error("failed writing model file '" + path + "'");
}

OrdinalModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read model file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return model_from_json(text.str());
}

}  // namespace nordic
