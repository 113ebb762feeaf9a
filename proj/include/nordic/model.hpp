#pragma once

#include "nordic/kernel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>

namespace nordic {

enum class Method { kNordic0, kNordic1, kNordic2, kBsvm, kCk };

std::string to_string(Method method);
Method parse_method(std::string_view name);

struct HyperParams {
  double C = 1.0;       // slack cost: NORDIC-0/1, BSVM, CK
  double lambda = 1.0;  // L1 penalty weight: NORDIC-2
  KernelSpec kernel;

  void validate() const;
  // The tuned quantity of a method: lambda for NORDIC-2, C otherwise.
  double penalty(Method method) const { return method == Method::kNordic2 ? lambda : C; }
  void set_penalty(Method method, double value);
};

struct TrainInfo {
  std::string solver_status;
  double objective = 0.0;       // primal objective of the trained method
  double dual_objective = 0.0;  // QP methods only
  int iterations = 0;
  std::int64_t nodes = 0;  // NORDIC-2 branch-and-bound nodes
  double gap = 0.0;        // NORDIC-2 relative optimality gap
  double big_m = 0.0;      // NORDIC-2
  double max_clip = 0.0;   // NORDIC-0 largest monotonicity repair applied to omega
};

// f_k(x) = sum_j omega(k, j) k(support_j, x) + b_k for kernel models, or
// omega.row(k) x + b_k when `support` is empty (linear primal form).
struct OrdinalModel {
  Method method = Method::kNordic1;
  KernelSpec kernel;
  int num_classes = 2;
  Eigen::MatrixXd support;
  Eigen::MatrixXd omega;
  Eigen::VectorXd bias;
  TrainInfo info;

  bool linear_primal() const { return support.size() == 0; }
  int input_dim() const { return static_cast<int>(linear_primal() ? omega.cols() : support.cols()); }
};

// Versioned JSON record with round-trip number formatting.
std::string model_to_json(const OrdinalModel& model);
OrdinalModel model_from_json(const std::string& text);
void save_model(const std::string& path, const OrdinalModel& model);
OrdinalModel load_model(const std::string& path);

}  // namespace nordic
