#include "nordic/data.hpp"

#include "nordic/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <sstream>

namespace nordic {

OrdinalDataset::OrdinalDataset(Eigen::MatrixXd features, std::vector<int> labels, int num_classes)
    : features_(std::move(features)), labels_(std::move(labels)), num_classes_(num_classes) {
  if (num_classes_ < 2) throw std::invalid_argument("dataset needs at least two classes");
  if (labels_.empty()) throw std::invalid_argument("dataset is empty");
  if (features_.rows() != static_cast<Eigen::Index>(labels_.size())) {
    throw std::invalid_argument("feature rows and label count differ");
  }
  for (int y : labels_) {
    if (y < 1 || y > num_classes_) {
      throw std::invalid_argument("label " + std::to_string(y) + " outside 1.." +
                                  std::to_string(num_classes_));
    }
  }
}

std::vector<int> OrdinalDataset::class_counts() const {
  std::vector<int> counts(num_classes_, 0);
  for (int y : labels_) ++counts[y - 1];
  return counts;
}

OrdinalDataset OrdinalDataset::subset(std::span<const int> rows) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), features_.cols());
  std::vector<int> y;
  y.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = features_.row(rows[i]);
    y.push_back(labels_[rows[i]]);
  }
  return OrdinalDataset(std::move(x), std::move(y), num_classes_);
}

Eigen::VectorXd dummy_labels(std::span<const int> labels, int k, int num_classes) {
  if (k < 1 || k > num_classes - 1) {
    throw std::invalid_argument("subproblem index " + std::to_string(k) + " outside 1.." +
                                std::to_string(num_classes - 1));
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) out[static_cast<Eigen::Index>(i)] = labels[i] <= k ? -1.0 : 1.0;
  return out;
}

std::array<double, 3> nonlinear3_scores(double x1, double x2) {
  const double a = x1 * x1;
  const double b = x2 * x2;
  return {-2.0 * x1 + 0.2 * a - 0.1 * b + 0.2, -0.4 * a + 0.2 * b - 0.4,
          2.0 * x1 + 0.2 * a - 0.1 * b + 0.2};
}

std::array<double, 3> nonlinear3_probabilities(double x1, double x2) {
  const auto f = nonlinear3_scores(x1, x2);
  const double top = std::max({f[0], f[1], f[2]});
  std::array<double, 3> p{};
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    p[k] = std::exp(f[k] - top);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

int donut_label(double x1, double x2) {
  const double c3 = std::sqrt(3.0) + 0.1;
  if ((x1 - c3) * (x1 - c3) + x2 * x2 <= 3.0) return 3;
  if ((x1 - 1.9) * (x1 - 1.9) + x2 * x2 <= 4.0) return 2;
  return 1;
}

namespace {

void check_generator(const GeneratorConfig& config) {
  if (config.d < 2) throw std::invalid_argument("generator needs d >= 2");
  if (config.n < 1) throw std::invalid_argument("generator needs n >= 1");
  if (!(config.sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");
}

}  // namespace

OrdinalDataset gen_nonlinear3(const GeneratorConfig& config) {
  check_generator(config);
  Rng rng(config.seed);
  Eigen::MatrixXd x(config.n, config.d);
  std::vector<int> y(config.n);
  for (int i = 0; i < config.n; ++i) {
    const double t1 = rng.uniform(-3.0, 3.0);
    const double t2 = rng.uniform(-6.0, 6.0);
    const auto p = nonlinear3_probabilities(t1, t2);
    const double u = rng.uniform();
    y[i] = u < p[0] ? 1 : (u < p[0] + p[1] ? 2 : 3);
    x(i, 0) = t1 + config.sigma * rng.normal();
    x(i, 1) = t2 + config.sigma * rng.normal();
    for (int j = 2; j < config.d; ++j) x(i, j) = rng.normal();
  }
  return OrdinalDataset(std::move(x), std::move(y), 3);
}

OrdinalDataset gen_donut(const GeneratorConfig& config) {
  check_generator(config);
  Rng rng(config.seed);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(config.n, config.d);
  std::vector<int> y(config.n);
  for (int i = 0; i < config.n; ++i) {
    const double radius = 4.0 * std::sqrt(rng.uniform());
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    x(i, 0) = radius * std::cos(angle);
    x(i, 1) = radius * std::sin(angle);
    y[i] = donut_label(x(i, 0), x(i, 1));
    for (int j = 0; j < config.d; ++j) x(i, j) += config.sigma * rng.normal();
  }
  return OrdinalDataset(std::move(x), std::move(y), 3);
}

OrdinalDataset generate(const GeneratorConfig& config) {
  switch (config.family) {
    case GeneratorFamily::kNonlinear3:
      return gen_nonlinear3(config);
    case GeneratorFamily::kDonut:
      return gen_donut(config);
  }
  throw std::invalid_argument("unknown generator family");
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, int line) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("bad number '" + s + "'", line);
  return v;
}

int parse_int(const std::string& s, int line) {
  int v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("bad integer '" + s + "'", line);
  return v;
}

}  // namespace

OrdinalDataset parse_balance_scale(std::istream& in) {
  std::vector<std::array<double, 4>> rows;
  std::vector<int> labels;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != 5) throw ParseError("expected 5 fields, got " + std::to_string(fields.size()), line_no);
    int label = 0;
    if (fields[0] == "L") label = 1;
    else if (fields[0] == "B") label = 2;
    else if (fields[0] == "R") label = 3;
    else throw ParseError("unknown class tag '" + fields[0] + "'", line_no);
    std::array<double, 4> attrs{};
    for (int j = 0; j < 4; ++j) {
      const int v = parse_int(fields[j + 1], line_no);
      if (v < 1 || v > 5) throw ParseError("attribute out of range 1..5", line_no);
      attrs[j] = v;
    }
    rows.push_back(attrs);
    labels.push_back(label);
  }
  if (rows.empty()) throw ParseError("no records", line_no);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < 4; ++j) x(static_cast<Eigen::Index>(i), j) = rows[i][j];
  }
  return OrdinalDataset(std::move(x), std::move(labels), 3);
}

OrdinalDataset load_balance_scale(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_balance_scale(in);
}

namespace {

// Largest-remainder apportionment of `total` over classes proportional to
// `weights`, never exceeding `capacity`. Ties go to the lower class index.
std::vector<int> apportion(int total, const std::vector<int>& weights, const std::vector<int>& capacity) {
  const int k = static_cast<int>(weights.size());
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> out(k, 0);
  std::vector<double> remainder(k, 0.0);
  int assigned = 0;
  for (int c = 0; c < k; ++c) {
    const double quota = total * weights[c] / sum;
    out[c] = std::min(static_cast<int>(std::floor(quota)), capacity[c]);
    remainder[c] = quota - std::floor(quota);
    assigned += out[c];
  }
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b]; });
  while (assigned < total) {
    bool progressed = false;
    for (int c : order) {
      if (assigned == total) break;
      if (out[c] < capacity[c]) {
        ++out[c];
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) throw std::invalid_argument("split does not fit the class sizes");
  }
  return out;
}

}  // namespace

Split stratified_split(const OrdinalDataset& data, const SplitSpec& spec) {
  if (spec.n_train < 0 || spec.n_tune < 0) throw std::invalid_argument("split sizes must be nonnegative");
  if (spec.n_train + spec.n_tune > data.size()) {
    throw std::invalid_argument("n_train + n_tune exceeds the dataset size");
  }
  const int k = data.num_classes();
  const auto counts = data.class_counts();
  const auto train_quota = apportion(spec.n_train, counts, counts);
  std::vector<int> room(k);
  for (int c = 0; c < k; ++c) room[c] = counts[c] - train_quota[c];
  const auto tune_quota = apportion(spec.n_tune, counts, room);

  std::vector<std::vector<int>> by_class(k);
  for (int i = 0; i < data.size(); ++i) by_class[data.labels()[i] - 1].push_back(i);

  Rng rng(spec.seed);
  Split out;
  for (int c = 0; c < k; ++c) {
    auto& rows = by_class[c];
    rng.shuffle(std::span<int>(rows));
    const int a = train_quota[c];
    const int b = a + tune_quota[c];
    out.train_rows.insert(out.train_rows.end(), rows.begin(), rows.begin() + a);
    out.tune_rows.insert(out.tune_rows.end(), rows.begin() + a, rows.begin() + b);
    out.test_rows.insert(out.test_rows.end(), rows.begin() + b, rows.end());
  }
  for (auto* part : {&out.train_rows, &out.tune_rows, &out.test_rows}) std::sort(part->begin(), part->end());

  auto take = [&](const std::vector<int>& rows) -> std::optional<OrdinalDataset> {
    if (rows.empty()) return std::nullopt;
    return data.subset(rows);
  };
  out.train = take(out.train_rows);
  out.tune = take(out.tune_rows);
  out.test = take(out.test_rows);
  return out;
}

void write_dataset_csv(std::ostream& out, const OrdinalDataset& data) {
  out << "label";
  for (int j = 0; j < data.dim(); ++j) out << ",x" << (j + 1);
  out << '\n';
  out << std::setprecision(17);
  for (int i = 0; i < data.size(); ++i) {
    out << data.labels()[i];
    for (int j = 0; j < data.dim(); ++j) out << ',' << data.features()(i, j);
    out << '\n';
  }
}

void write_dataset_csv(const std::string& path, const OrdinalDataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_dataset_csv(out, data);
}

OrdinalDataset read_dataset_csv(std::istream& in, int num_classes) {
  std::string raw;
  int line_no = 0;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  int width = -1;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("label", 0) == 0) continue;
    const auto fields = split_commas(line);
    if (fields.size() < 2) throw ParseError("expected label and at least one feature", line_no);
    if (width < 0) width = static_cast<int>(fields.size()) - 1;
    if (static_cast<int>(fields.size()) - 1 != width) throw ParseError("ragged row", line_no);
    labels.push_back(parse_int(fields[0], line_no));
    std::vector<double> row(width);
    for (int j = 0; j < width; ++j) row[j] = parse_double(fields[j + 1], line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no records", line_no);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < width; ++j) x(static_cast<Eigen::Index>(i), j) = rows[i][j];
  }
  if (num_classes <= 0) num_classes = std::max(2, *std::max_element(labels.begin(), labels.end()));
  return OrdinalDataset(std::move(x), std::move(labels), num_classes);
}

OrdinalDataset read_dataset_csv(const std::string& path, int num_classes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_dataset_csv(in, num_classes);
}

}  // namespace nordic
