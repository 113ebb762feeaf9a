#include "nordic/experiment.hpp"

#include "nordic/predict.hpp"
#include "nordic/rng.hpp"
#include "nordic/tune.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace nordic {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

json scalar(const std::string& raw, int line) {
  const std::string v = trim(raw);
  if (v.empty()) throw ParseError("missing value", line);
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') throw ParseError("unterminated string", line);
    return v.substr(1, v.size() - 2);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() + v.size()) {
    if (v.find_first_of(".eE") == std::string::npos && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
    return d;
  }
  return v;
}

// Splits on commas outside quotes.
std::vector<std::string> split_items(const std::string& s) {
  std::vector<std::string> items;
  std::string cur;
  bool quoted = false;
  for (char ch : s) {
    if (ch == '"') quoted = !quoted;
    if (ch == ',' && !quoted) {
      items.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty() || !items.empty()) items.push_back(cur);
  return items;
}

json parse_flat(const std::string& text) {
  json j = json::object();
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    bool quoted = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '"') quoted = !quoted;
      if (raw[i] == '#' && !quoted) {
        raw.resize(i);
        break;
      }
    }
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[' && s.find('=') == std::string::npos) throw ParseError("tables are not supported", line);
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line);
    const std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line);
    if (j.contains(key)) throw ParseError("duplicate key '" + key + "'", line);
    const bool bracket = !value.empty() && value.front() == '[';
    if (bracket) {
      if (value.back() != ']') throw ParseError("arrays must close on the same line", line);
      value = value.substr(1, value.size() - 2);
    }
    const auto items = split_items(value);
    if (bracket || items.size() > 1) {
      json arr = json::array();
      for (const auto& item : items) arr.push_back(scalar(item, line));
      j[key] = arr;
    } else {
      j[key] = scalar(value, line);
    }
  }
  return j;
}

template <class T>
std::vector<T> as_list(const json& v) {
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

std::vector<Method> methods_from(const json& v) {
  std::vector<Method> out;
  for (const auto& s : as_list<std::string>(v)) out.push_back(parse_method(s));
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

struct Parts {
  OrdinalDataset train, tune, test;
};

Parts make_parts(const ExperimentConfig& c, const OrdinalDataset* file_data, int n_train, int n_tune,
                 std::uint64_t seed) {
  if (file_data == nullptr) {
    GeneratorConfig g;
    g.family = c.dataset == "donut" ? GeneratorFamily::kDonut : GeneratorFamily::kNonlinear3;
    g.d = c.d;
    g.sigma = c.sigma;
    auto draw = [&](int n, Stream s) {
      g.n = n;
      g.seed = derive_seed(seed, 0, s);
      return generate(g);
    };
    return {draw(n_train, Stream::kTrain), draw(n_tune, Stream::kTune), draw(c.n_test, Stream::kTest)};
  }
  const Split s = stratified_split(*file_data, {n_train, n_tune, derive_seed(seed, 0, Stream::kSplit)});
  if (!s.train || !s.tune || !s.test) throw std::invalid_argument("split leaves an empty part");
  return {*s.train, *s.tune, *s.test};
}

}  // namespace

KernelSpec ExperimentConfig::kernel_spec() const {
  if (kernel == "rbf") return KernelSpec::rbf(1.0);
  if (kernel == "linear") return KernelSpec::linear();
  throw std::invalid_argument("unknown kernel '" + kernel + "'");
}

CostMatrix ExperimentConfig::cost_matrix(int k) const {
  if (cost == "zero-one" || cost == "donut-costs" || cost == "balance-costs") return CostMatrix::preset(cost, k);
  const CostMatrix m = CostMatrix::from_file(cost == "file" ? cost_file : cost);
  if (m.num_classes() != k) throw std::invalid_argument("cost matrix is not " + std::to_string(k) + "x" + std::to_string(k));
  return m;
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> datasets{"nonlinear3", "donut", "balance", "csv"};
  if (!datasets.count(dataset)) throw std::invalid_argument("unknown dataset '" + dataset + "'");
  if ((dataset == "balance" || dataset == "csv") && path.empty()) throw std::invalid_argument(dataset + " needs a path");
  if (replications < 1) throw std::invalid_argument("replications must be at least 1");
  if (methods.empty()) throw std::invalid_argument("methods must be nonempty");
  if (n_train.empty()) throw std::invalid_argument("n_train must be nonempty");
  if (n_tune.size() != 1 && n_tune.size() != n_train.size())
    throw std::invalid_argument("n_tune must hold one entry or one per n_train entry");
  for (int c = 0; c < num_cases(); ++c) {
    if (n_train[c] < 2 || case_tune(c) < 1) throw std::invalid_argument("n_train >= 2 and n_tune >= 1 required");
  }
  if ((dataset == "nonlinear3" || dataset == "donut") && (n_test < 1 || d < 2 || sigma < 0.0))
    throw std::invalid_argument("generator needs n_test >= 1, d >= 2, sigma >= 0");
  if (tune_metric != "error" && tune_metric != "weighted") throw std::invalid_argument("tune_metric is error or weighted");
  if (cost == "file" && cost_file.empty()) throw std::invalid_argument("cost = file needs cost_file");
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
  for (double p : grid_penalty)
    if (!(p > 0.0)) throw std::invalid_argument("grid penalties must be positive");
  for (double w : grid_width)
    if (!(w > 0.0)) throw std::invalid_argument("grid widths must be positive");
  kernel_spec();
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be an object");
  ExperimentConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "name") c.name = v.get<std::string>();
    else if (key == "dataset") c.dataset = v.get<std::string>();
    else if (key == "path") c.path = v.get<std::string>();
    else if (key == "num_classes") c.num_classes = v.get<int>();
    else if (key == "d") c.d = v.get<int>();
    else if (key == "sigma") c.sigma = v.get<double>();
    else if (key == "n_train") c.n_train = as_list<int>(v);
    else if (key == "n_tune") c.n_tune = as_list<int>(v);
    else if (key == "n_test") c.n_test = v.get<int>();
    else if (key == "methods") c.methods = methods_from(v);
    else if (key == "kernel") c.kernel = v.get<std::string>();
    else if (key == "grid_penalty") c.grid_penalty = as_list<double>(v);
    else if (key == "grid_width") c.grid_width = as_list<double>(v);
    else if (key == "cost") c.cost = v.get<std::string>();
    else if (key == "cost_file") c.cost_file = v.get<std::string>();
    else if (key == "tune_metric") c.tune_metric = v.get<std::string>();
    else if (key == "replications") c.replications = v.get<int>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "threads") c.threads = v.get<int>();
    else if (key == "out") c.out = v.get<std::string>();
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return config_from_json(json::parse(text));
  return config_from_json(parse_flat(text));
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig c;
  try {
    c = parse_config(ss.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  // data and cost paths are relative to the config file
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto rebase = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  rebase(c.path);
  rebase(c.cost_file);
  if (c.cost != "file" && c.cost != "zero-one" && c.cost != "donut-costs" && c.cost != "balance-costs") rebase(c.cost);
  return c;
}

ordered_json config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["name"] = c.name;
  j["dataset"] = c.dataset;
  if (!c.path.empty()) j["path"] = c.path;
  if (c.num_classes > 0) j["num_classes"] = c.num_classes;
  j["d"] = c.d;
  j["sigma"] = c.sigma;
  j["n_train"] = c.n_train;
  j["n_tune"] = c.n_tune;
  j["n_test"] = c.n_test;
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["kernel"] = c.kernel;
  j["grid_penalty"] = c.grid_penalty;
  j["grid_width"] = c.grid_width;
  j["cost"] = c.cost;
  if (!c.cost_file.empty()) j["cost_file"] = c.cost_file;
  j["tune_metric"] = c.tune_metric;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  return j;
}

int ExperimentResult::failed() const {
  return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](const CellResult& c) { return !c.ok; }));
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  std::optional<OrdinalDataset> file_data;
  if (config.dataset == "balance") file_data = load_balance_scale(config.path);
  if (config.dataset == "csv") file_data = read_dataset_csv(config.path, config.num_classes);
  const int classes = file_data ? file_data->num_classes() : 3;
  const CostMatrix cost = config.cost_matrix(classes);
  const CostMatrix metric = config.tune_metric == "weighted" ? cost : CostMatrix::zero_one(classes);

  ExperimentResult result;
  result.config = config;
  const int methods = static_cast<int>(config.methods.size());
  const int total = config.num_cases() * config.replications * methods;
  result.cells.resize(total);

  auto run_cell = [&](int index) {
    CellResult& cell = result.cells[index];
    const int method_index = index % methods;
    const int rep = (index / methods) % config.replications;
    const int c = index / (methods * config.replications);
    cell.case_index = c;
    cell.n_train = config.n_train[c];
    cell.n_tune = config.case_tune(c);
    cell.replication = rep;
    cell.seed = config.seed + static_cast<std::uint64_t>(rep);
    cell.method = config.methods[method_index];
    try {
      const Parts parts = make_parts(config, file_data ? &*file_data : nullptr, cell.n_train, cell.n_tune, cell.seed);
      cell.n_test = parts.test.size();
      HyperParams base;
      base.kernel = config.kernel_spec();
      TuneGrid grid = base.kernel.is_rbf() ? TuneGrid::defaults(parts.train.features()) : TuneGrid{};
      grid.penalties = config.grid_penalty.empty() ? TuneGrid::default_penalties() : config.grid_penalty;
      if (!config.grid_width.empty()) grid.widths = config.grid_width;

      const auto start = std::chrono::steady_clock::now();
      const TuneResult tuned = tune(parts.train, parts.tune, cell.method, grid, metric, base);
      const OrdinalModel model = train(parts.train, cell.method, tuned.best);
      cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      cell.penalty = tuned.best.penalty(cell.method);
      cell.width = tuned.best.kernel.is_rbf() ? tuned.best.kernel.width : 0.0;
      cell.tune_score = tuned.best_score;
      cell.tune_failed = tuned.failed();
      cell.solver_status = model.info.solver_status;

      const PredictionResult pr = predict(model, parts.test.features());
      const auto& truth = parts.test.labels();
      cell.error = error_rate(pr.labels, truth);
      cell.weighted_error = weighted_error(pr.labels, truth, cost);
      cell.distance_loss = distance_loss(pr.labels, truth);
      cell.ambiguity = pr.ambiguity_rate();
      cell.value_crossings = check_noncrossing(pr.decision_values, CrossingMode::kValues).violations;
      cell.sign_crossings = check_noncrossing(pr.decision_values, CrossingMode::kSigns).violations;
      cell.confusion = confusion(pr.labels, truth, classes).counts;
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.message = e.what();
    }
  };

  std::mutex report;
  auto finish = [&](int index) {
    if (!progress) return;
    std::lock_guard<std::mutex> lock(report);
    progress(result.cells[index]);
  };
  const int workers = std::min(config.threads, total);
  if (workers <= 1) {
    for (int i = 0; i < total; ++i) {
      run_cell(i);
      finish(i);
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < total; i = next++) {
          run_cell(i);
          finish(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  return result;
}

void write_results_csv(std::ostream& out, const ExperimentResult& result) {
  out << "case,n_train,n_tune,n_test,replication,seed,method,status,penalty_name,penalty,width,tune_score,"
         "tune_failed,error,weighted_error,distance_loss,ambiguity,value_crossings,sign_crossings,solver_status,"
         "confusion,message\n";
  out << std::setprecision(17);
  for (const CellResult& c : result.cells) {
    out << c.case_index << ',' << c.n_train << ',' << c.n_tune << ',' << c.n_test << ',' << c.replication << ','
        << c.seed << ',' << to_string(c.method) << ',' << (c.ok ? "ok" : "failed") << ','
        << (c.method == Method::kNordic2 ? "lambda" : "C") << ',';
    if (c.ok) {
      out << c.penalty << ',' << c.width << ',' << c.tune_score << ',' << c.tune_failed << ',' << c.error << ','
          << c.weighted_error << ',' << c.distance_loss << ',' << c.ambiguity << ',' << c.value_crossings << ','
          << c.sign_crossings << ',' << c.solver_status << ',';
      // row-major, predicted x truth
      for (Eigen::Index p = 0; p < c.confusion.rows(); ++p)
        for (Eigen::Index t = 0; t < c.confusion.cols(); ++t) out << (p + t ? " " : "") << c.confusion(p, t);
    } else {
      out << ",,,,,,,,,,,";
    }
    out << ',' << csv_quote(c.message) << '\n';
  }
}

void write_timings_csv(std::ostream& out, const ExperimentResult& result) {
  out << "case,replication,method,seconds\n" << std::setprecision(6);
  for (const CellResult& c : result.cells)
    out << c.case_index << ',' << c.replication << ',' << to_string(c.method) << ',' << c.seconds << '\n';
}

ordered_json summarize(const ExperimentResult& result) {
  const ExperimentConfig& cfg = result.config;
  ordered_json cases = ordered_json::array();
  for (int c = 0; c < cfg.num_cases(); ++c) {
    ordered_json methods = ordered_json::object();
    for (Method m : cfg.methods) {
      std::vector<double> err, werr, dist, amb, signs, secs;
      int failed = 0;
      for (const CellResult& cell : result.cells) {
        if (cell.case_index != c || cell.method != m) continue;
        if (!cell.ok) {
          ++failed;
          continue;
        }
        err.push_back(cell.error);
        werr.push_back(cell.weighted_error);
        dist.push_back(cell.distance_loss);
        amb.push_back(cell.ambiguity);
        signs.push_back(cell.sign_crossings);
      }
      auto stat = [](const std::vector<double>& v) { return ordered_json{{"mean", mean_of(v)}, {"se", se_of(v)}}; };
      methods[to_string(m)] = {{"replications", err.size()},
                               {"failed", failed},
                               {"error", stat(err)},
                               {"weighted_error", stat(werr)},
                               {"distance_loss", stat(dist)},
                               {"ambiguity", stat(amb)},
                               {"sign_crossings", stat(signs)}};
    }
    cases.push_back({{"case", c}, {"n_train", cfg.n_train[c]}, {"n_tune", cfg.case_tune(c)}, {"methods", methods}});
  }
  return {{"config", config_to_json(cfg)}, {"cases", cases}};
}

void print_tables(std::ostream& out, const ExperimentResult& result) {
  const ordered_json s = summarize(result);
  for (const auto& c : s["cases"]) {
    out << result.config.name << "  n_train=" << c["n_train"].get<int>() << " n_tune=" << c["n_tune"].get<int>() << '\n';
    out << std::left << std::setw(9) << "method" << std::right << std::setw(18) << "error" << std::setw(18)
        << "weighted" << std::setw(10) << "ambig" << std::setw(6) << "ok" << '\n';
    for (const auto& [name, m] : c["methods"].items()) {
      auto cell = [&](const char* key) {
        std::ostringstream ss;
        ss << std::fixed << std::setprecision(4) << m[key]["mean"].get<double>() << " (" << m[key]["se"].get<double>()
           << ")";
        return ss.str();
      };
      out << std::left << std::setw(9) << name << std::right << std::setw(18) << cell("error") << std::setw(18)
          << cell("weighted_error") << std::setw(10) << std::fixed << std::setprecision(4)
          << m["ambiguity"]["mean"].get<double>() << std::setw(6) << m["replications"].get<int>() << '\n';
      out.unsetf(std::ios::floatfield);
    }
    out << '\n';
  }
}

void write_outputs(const std::string& dir, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(fs::path(dir) / name);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    return f;
  };
  {
    auto f = open("results.csv");
    write_results_csv(f, result);
  }
  {
    auto f = open("timings.csv");
    write_timings_csv(f, result);
  }
  auto f = open("summary.json");
  f << summarize(result).dump(2) << '\n';
}

}  // namespace nordic
