#pragma once

#include "nordic/eval.hpp"
#include "nordic/model.hpp"
#include "nordic/nordic.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace nordic {

// Keys mirror the flat config file (see README). n_train / n_tune may hold
// several entries; each pair is one case.
struct ExperimentConfig {
  std::string name = "experiment";
  std::string dataset = "nonlinear3";  // nonlinear3 | donut | balance | csv
  std::string path;                    // balance and csv datasets
  int num_classes = 0;                 // csv: 0 infers from the labels
  int d = 2;
  double sigma = 0.0;
  std::vector<int> n_train{100};
  std::vector<int> n_tune{100};
  int n_test = 10000;  // generators only; file datasets test on the remainder
  std::vector<Method> methods{Method::kNordic0, Method::kNordic1, Method::kNordic2, Method::kBsvm, Method::kCk};
  std::string kernel = "rbf";
  std::vector<double> grid_penalty;  // empty: 2^-4..2^4
  std::vector<double> grid_width;    // empty: distance quantiles of each training set
  std::string cost = "zero-one";     // preset name, "file", or a path
  std::string cost_file;
  std::string tune_metric = "error";  // error | weighted
  int replications = 1;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = "results";

  int num_cases() const { return static_cast<int>(n_train.size()); }
  int case_tune(int c) const { return n_tune.size() == 1 ? n_tune[0] : n_tune[c]; }
  KernelSpec kernel_spec() const;
  CostMatrix cost_matrix(int num_classes) const;
  void validate() const;
};

// Flat `key = value` text (TOML subset: scalars, quoted strings, one-line
// arrays, # comments) or a JSON object.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

struct CellResult {
  int case_index = 0;
  int n_train = 0;
  int n_tune = 0;
  int n_test = 0;
  int replication = 0;
  std::uint64_t seed = 0;
  Method method = Method::kNordic1;
  bool ok = false;
  std::string message;
  double penalty = 0.0;
  double width = 0.0;
  double tune_score = 0.0;
  int tune_failed = 0;
  double error = 0.0;
  double weighted_error = 0.0;
  double distance_loss = 0.0;
  double ambiguity = 0.0;
  int value_crossings = 0;
  int sign_crossings = 0;
  std::string solver_status;
  Eigen::MatrixXi confusion;
  double seconds = 0.0;  // tuning + final training, wall clock
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<CellResult> cells;  // sorted by case, replication, method order

  int failed() const;
};

using ProgressFn = std::function<void(const CellResult&)>;

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

// One row per cell; deterministic given (config, seed).
void write_results_csv(std::ostream& out, const ExperimentResult& result);
void write_timings_csv(std::ostream& out, const ExperimentResult& result);
// Per case and method: mean and standard error of every metric.
nlohmann::ordered_json summarize(const ExperimentResult& result);
void print_tables(std::ostream& out, const ExperimentResult& result);

// results.csv, timings.csv and summary.json under `dir`.
void write_outputs(const std::string& dir, const ExperimentResult& result);

}  // namespace nordic
