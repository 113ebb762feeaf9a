#include "nordic/data.hpp"
#include "nordic/eval.hpp"
#include "nordic/experiment.hpp"
#include "nordic/model.hpp"
#include "nordic/nordic.hpp"
#include "nordic/predict.hpp"
#include "nordic/tune.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace nordic;
using nlohmann::ordered_json;

namespace {

struct Common {
  std::uint64_t seed = 1;
  std::string config;
  std::string out;
  std::string cost = "zero-one";
  std::string cost_file;
  std::string method = "nordic1";
  std::vector<double> grid_c;
  std::vector<double> grid_width;
};

void add_common(CLI::App* cmd, Common& o) {
  cmd->add_option("--seed", o.seed, "Base seed");
  cmd->add_option("--config", o.config, "Experiment config (flat key = value or JSON)");
  cmd->add_option("--out", o.out, "Output file, or directory for bench");
  cmd->add_option("--cost", o.cost, "zero-one | donut-costs | balance-costs | file | <path>");
  cmd->add_option("--cost-file", o.cost_file, "Cost matrix file used with --cost file");
  cmd->add_option("--method", o.method, "nordic0 | nordic1 | nordic2 | bsvm | ck (comma list for bench)");
  cmd->add_option("--grid-c", o.grid_c, "Penalty grid (C, or lambda for nordic2)")->delimiter(',');
  cmd->add_option("--grid-width", o.grid_width, "RBF width grid")->delimiter(',');
}

CostMatrix cost_of(const Common& o, int classes) {
  ExperimentConfig c;
  c.cost = o.cost;
  c.cost_file = o.cost_file;
  return c.cost_matrix(classes);
}

// Writes to --out, or stdout when it is empty or "-".
void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
}

struct PredictionRows {
  std::vector<int> labels;
  std::vector<char> ambiguous;
};

PredictionRows read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  PredictionRows rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("index", 0) == 0) continue;
    std::stringstream ss(line);
    std::string index, label, ambiguous;
    if (!std::getline(ss, index, ',') || !std::getline(ss, label, ',') || !std::getline(ss, ambiguous, ','))
      throw ParseError("expected index,label,ambiguous,...", line_no);
    try {
      rows.labels.push_back(std::stoi(label));
      rows.ambiguous.push_back(std::stoi(ambiguous) != 0);
    } catch (const std::exception&) {
      throw ParseError("bad prediction row", line_no);
    }
  }
  return rows;
}

ordered_json crossing_json(const CrossingReport& r) {
  ordered_json locations = ordered_json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(r.locations.size(), 20); ++i)
    locations.push_back({{"point", r.locations[i].first}, {"k", r.locations[i].second}});
  return {{"violations", r.violations}, {"worst_gap", r.worst_gap}, {"first_locations", locations}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noncrossing ordinal classification"};
  app.require_subcommand(1);

  Common gen_o, train_o, pred_o, eval_o, bench_o, verify_o;

  auto* gen = app.add_subcommand("generate", "Write a dataset as CSV (label,x1,...,xd)");
  add_common(gen, gen_o);
  std::string family = "nonlinear3", data_path;
  int gen_n = 100, gen_d = 2;
  double gen_sigma = 0.0;
  gen->add_option("--family", family, "nonlinear3 | donut | balance")
      ->check(CLI::IsMember({"nonlinear3", "donut", "balance"}));
  gen->add_option("--n", gen_n, "Number of points")->check(CLI::PositiveNumber);
  gen->add_option("--d", gen_d, "Dimension (>= 2)");
  gen->add_option("--sigma", gen_sigma, "Perturbation scale");
  gen->add_option("--path", data_path, "balance-scale.data for --family balance");

  auto* tr = app.add_subcommand("train", "Train a model and write its JSON record");
  add_common(tr, train_o);
  std::string train_data, tune_data, kernel = "rbf", tune_metric = "error";
  double c_value = 1.0, lambda = 1.0, width = 0.0;
  tr->add_option("--data", train_data, "Training CSV")->required()->check(CLI::ExistingFile);
  tr->add_option("--tune-data", tune_data, "Tuning CSV; enables the grid search")->check(CLI::ExistingFile);
  tr->add_option("--kernel", kernel, "rbf | linear")->check(CLI::IsMember({"rbf", "linear"}));
  tr->add_option("--C", c_value, "Slack cost")->check(CLI::PositiveNumber);
  tr->add_option("--lambda", lambda, "NORDIC-2 L1 weight")->check(CLI::PositiveNumber);
  tr->add_option("--width", width, "RBF width (default: median pairwise distance)");
  tr->add_option("--tune-metric", tune_metric, "error | weighted")->check(CLI::IsMember({"error", "weighted"}));

  auto* pr = app.add_subcommand("predict", "Predict a dataset CSV with a saved model");
  add_common(pr, pred_o);
  std::string model_path, pred_data;
  pr->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  pr->add_option("--data", pred_data, "Dataset CSV (labels are ignored)")->required()->check(CLI::ExistingFile);

  auto* ev = app.add_subcommand("evaluate", "Score predictions against the truth");
  add_common(ev, eval_o);
  std::string predictions, truth;
  ev->add_option("--predictions", predictions, "Predictions CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--truth", truth, "Dataset CSV with the true labels")->required()->check(CLI::ExistingFile);

  auto* bench = app.add_subcommand("bench", "Run an experiment config");
  add_common(bench, bench_o);
  int threads = 0, replications = 0;
  bool quiet = false;
  bench->add_option("--threads", threads, "Worker threads");
  bench->add_option("--replications", replications, "Override the replication count");
  bench->add_flag("--quiet", quiet, "No per-cell progress");

  auto* verify = app.add_subcommand("verify", "Noncrossing report for a model");
  add_common(verify, verify_o);
  std::string verify_model, verify_data;
  int probes = 0;
  verify->add_option("--model", verify_model, "Model JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--data", verify_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  verify->add_option("--probes", probes, "Uniform probes in the data's bounding box (0: the data points)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      OrdinalDataset data = [&] {
        if (family == "balance") {
          if (data_path.empty()) throw std::invalid_argument("--family balance needs --path");
          return load_balance_scale(data_path);
        }
        GeneratorConfig g;
        g.family = family == "donut" ? GeneratorFamily::kDonut : GeneratorFamily::kNonlinear3;
        g.n = gen_n;
        g.d = gen_d;
        g.sigma = gen_sigma;
        g.seed = gen_o.seed;
        return generate(g);
      }();
      std::ostringstream ss;
      write_dataset_csv(ss, data);
      emit(gen_o.out, ss.str());
    } else if (*tr) {
      const OrdinalDataset data = read_dataset_csv(train_data);
      const Method method = parse_method(train_o.method);
      HyperParams hp;
      hp.C = c_value;
      hp.lambda = lambda;
      if (kernel == "linear") {
        hp.kernel = KernelSpec::linear();
      } else {
        hp.kernel = KernelSpec::rbf(width > 0.0 ? width : bandwidth_candidates(data.features())[1]);
      }
      if (!tune_data.empty()) {
        const OrdinalDataset held = read_dataset_csv(tune_data, data.num_classes());
        TuneGrid grid = hp.kernel.is_rbf() ? TuneGrid::defaults(data.features()) : TuneGrid{};
        grid.penalties = train_o.grid_c.empty() ? TuneGrid::default_penalties() : train_o.grid_c;
        if (!train_o.grid_width.empty()) grid.widths = train_o.grid_width;
        const CostMatrix metric =
            tune_metric == "weighted" ? cost_of(train_o, data.num_classes()) : CostMatrix::zero_one(data.num_classes());
        const TuneResult t = tune(data, held, method, grid, metric, hp);
        hp = t.best;
        std::cerr << "tuned " << (method == Method::kNordic2 ? "lambda" : "C") << "=" << hp.penalty(method);
        if (hp.kernel.is_rbf()) std::cerr << " width=" << hp.kernel.width;
        std::cerr << " score=" << t.best_score << " failed_cells=" << t.failed() << '\n';
      }
      const OrdinalModel model = train(data, method, hp);
      emit(train_o.out, model_to_json(model) + "\n");
    } else if (*pr) {
      const OrdinalModel model = load_model(model_path);
      const OrdinalDataset data = read_dataset_csv(pred_data);
      std::ostringstream ss;
      write_predictions_csv(ss, predict(model, data.features()));
      emit(pred_o.out, ss.str());
    } else if (*ev) {
      const PredictionRows p = read_predictions(predictions);
      const OrdinalDataset t = read_dataset_csv(truth);
      const int classes = t.num_classes();
      const CostMatrix cost = cost_of(eval_o, classes);
      if (static_cast<int>(p.labels.size()) != t.size())
        throw std::invalid_argument("predictions and truth have different lengths");
      const ConfusionMatrix cm = confusion(p.labels, t.labels(), classes);
      std::vector<std::vector<int>> counts(classes, std::vector<int>(classes));
      for (int a = 0; a < classes; ++a)
        for (int b = 0; b < classes; ++b) counts[a][b] = cm.counts(a, b);
      const double ambiguity =
          p.ambiguous.empty() ? 0.0 : std::count(p.ambiguous.begin(), p.ambiguous.end(), 1) / double(p.ambiguous.size());
      ordered_json j{{"n", t.size()},
                     {"cost", eval_o.cost},
                     {"error", error_rate(p.labels, t.labels())},
                     {"weighted_error", weighted_error(p.labels, t.labels(), cost)},
                     {"distance_loss", distance_loss(p.labels, t.labels())},
                     {"ambiguity", ambiguity},
                     {"confusion", counts}};
      emit(eval_o.out, j.dump(2) + "\n");
    } else if (*bench) {
      if (bench_o.config.empty()) throw std::invalid_argument("bench needs --config");
      ExperimentConfig config = load_config(bench_o.config);
      if (bench->count("--seed")) config.seed = bench_o.seed;
      if (bench->count("--out")) config.out = bench_o.out;
      if (bench->count("--cost")) config.cost = bench_o.cost;
      if (bench->count("--cost-file")) config.cost_file = bench_o.cost_file;
      if (bench->count("--method")) {
        config.methods.clear();
        std::stringstream ss(bench_o.method);
        for (std::string m; std::getline(ss, m, ',');) config.methods.push_back(parse_method(m));
      }
      if (!bench_o.grid_c.empty()) config.grid_penalty = bench_o.grid_c;
      if (!bench_o.grid_width.empty()) config.grid_width = bench_o.grid_width;
      if (threads > 0) config.threads = threads;
      if (replications > 0) config.replications = replications;
      config.validate();
      const ExperimentResult result = run_experiment(config, [&](const CellResult& c) {
        if (quiet) return;
        std::cerr << "case " << c.case_index << " rep " << c.replication << " " << to_string(c.method) << ": "
                  << (c.ok ? "error " + std::to_string(c.error) : "failed: " + c.message) << '\n';
      });
      write_outputs(config.out, result);
      print_tables(std::cout, result);
      if (result.failed() == static_cast<int>(result.cells.size())) {
        std::cerr << "every cell failed\n";
        return 2;
      }
    } else if (*verify) {
      const OrdinalModel model = load_model(verify_model);
      const OrdinalDataset data = read_dataset_csv(verify_data);
      const Eigen::MatrixXd points =
          probes > 0 ? bounding_box_probes(data.features(), probes, verify_o.seed) : data.features();
      const Eigen::MatrixXd values = decision_values(model, points);
      ordered_json j{{"method", to_string(model.method)},
                     {"probes", points.rows()},
                     {"source", probes > 0 ? "bounding-box" : "data"},
                     {"values", crossing_json(check_noncrossing(values, CrossingMode::kValues))},
                     {"signs", crossing_json(check_noncrossing(values, CrossingMode::kSigns))},
                     {"ambiguity", aggregate(values).ambiguity_rate()}};
      emit(verify_o.out, j.dump(2) + "\n");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
