#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace nordic {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Feature matrix (one row per observation) with ordinal labels in 1..K.
// Immutable after construction. Classes may be empty.
class OrdinalDataset {
 public:
  OrdinalDataset(Eigen::MatrixXd features, std::vector<int> labels, int num_classes);

  const Eigen::MatrixXd& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  int num_classes() const { return num_classes_; }
  int size() const { return static_cast<int>(labels_.size()); }
  int dim() const { return static_cast<int>(features_.cols()); }

  std::vector<int> class_counts() const;
  OrdinalDataset subset(std::span<const int> rows) const;

 private:
  Eigen::MatrixXd features_;
  std::vector<int> labels_;
  int num_classes_;
};

// y^(k): -1 when label <= k, +1 otherwise. Requires 1 <= k <= K-1.
Eigen::VectorXd dummy_labels(std::span<const int> labels, int k, int num_classes);

enum class GeneratorFamily { kNonlinear3, kDonut };

struct GeneratorConfig {
  GeneratorFamily family = GeneratorFamily::kNonlinear3;
  int n = 100;
  int d = 2;
  double sigma = 0.0;
  std::uint64_t seed = 1;
};

// Class scores f_1..f_3 of the three-class generator at the noiseless
// coordinates, and the matching softmax posteriors.
std::array<double, 3> nonlinear3_scores(double x1, double x2);
std::array<double, 3> nonlinear3_probabilities(double x1, double x2);

// Label of a noiseless donut point from its first two coordinates.
int donut_label(double x1, double x2);

OrdinalDataset gen_nonlinear3(const GeneratorConfig& config);
OrdinalDataset gen_donut(const GeneratorConfig& config);
OrdinalDataset generate(const GeneratorConfig& config);

// UCI balance-scale layout: "<L|B|R>,lw,ld,rw,rd" per line. L<B<R maps to 1,2,3.
OrdinalDataset load_balance_scale(const std::string& path);
OrdinalDataset parse_balance_scale(std::istream& in);

struct SplitSpec {
  int n_train = 0;
  int n_tune = 0;
  std::uint64_t seed = 1;
};

// Empty parts are std::nullopt (a dataset always holds at least one row).
struct Split {
  std::optional<OrdinalDataset> train;
  std::optional<OrdinalDataset> tune;
  std::optional<OrdinalDataset> test;
  std::vector<int> train_rows, tune_rows, test_rows;
};

// Class-stratified random partition. Per-class quotas use largest-remainder
// rounding; whatever is not drawn for train or tune becomes the test part.
Split stratified_split(const OrdinalDataset& data, const SplitSpec& spec);

// CSV with columns label,x1,...,xd and round-trip precision.
void write_dataset_csv(std::ostream& out, const OrdinalDataset& data);
void write_dataset_csv(const std::string& path, const OrdinalDataset& data);
// num_classes <= 0 infers K from the largest label.
OrdinalDataset read_dataset_csv(std::istream& in, int num_classes = 0);
OrdinalDataset read_dataset_csv(const std::string& path, int num_classes = 0);

}  // namespace nordic
