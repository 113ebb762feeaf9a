// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "nordic/data.hpp"
#include "nordic/eval.hpp"
#include "nordic/experiment.hpp"
#include "nordic/milp.hpp"
#include "nordic/nordic.hpp"
#include "nordic/predict.hpp"
#include "nordic/qp.hpp"
#include "nordic/rng.hpp"
#include "nordic/tune.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace nordic;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

class Fixture {
 public:
  explicit Fixture(const std::string& name) : in_(std::string(NORDIC_FIXTURES) + "/" + name) {
    if (!in_) throw std::runtime_error("missing fixture " + name);
  }
  double num() {
    double v;
    if (!(in_ >> v)) throw std::runtime_error("fixture truncated");
    return v;
  }
  int integer() { return static_cast<int>(num()); }
  Eigen::VectorXd vec(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = num();
    return v;
  }
  Eigen::MatrixXd mat(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = num();
    return m;
  }

 private:
  std::ifstream in_;
};

// 1. Noncrossing on 50 random datasets.
Outcome criterion1(std::uint64_t seed) {
  const auto t0 = Clock::now();
  int n0_viol = 0, n1_viol = 0, n2_viol = 0, failures = 0, ambiguous = 0;
  const double sigmas[] = {0.0, 0.2, 0.4, 0.6};
  const double penalties[] = {0.25, 1.0, 4.0};
  for (int i = 0; i < 50; ++i) {
    GeneratorConfig g;
    g.family = i % 2 ? GeneratorFamily::kDonut : GeneratorFamily::kNonlinear3;
    g.n = 60;
    g.d = 2;
    g.sigma = sigmas[i % 4];
    g.seed = derive_seed(seed, i, Stream::kTrain);
    const OrdinalDataset data = generate(g);
    HyperParams hp;
    hp.C = hp.lambda = penalties[i % 3];
    hp.kernel = KernelSpec::rbf(bandwidth_candidates(data.features())[1]);
    try {
      const OrdinalModel m0 = train(data, Method::kNordic0, hp);
      const OrdinalModel m1 = train(data, Method::kNordic1, hp);
      const OrdinalModel m2 = train(data, Method::kNordic2, hp);
      const Eigen::MatrixXd probes = bounding_box_probes(data.features(), 1000, derive_seed(seed, i, Stream::kProbe));
      n0_viol += check_noncrossing(m0, probes, CrossingMode::kValues).violations;
      n1_viol += check_noncrossing(m1, data.features(), CrossingMode::kValues).violations;
      n2_viol += check_noncrossing(m2, data.features(), CrossingMode::kSigns).violations;
      for (const OrdinalModel* m : {&m0, &m1, &m2}) ambiguous += predict(*m, data.features()).ambiguity_rate() > 0.0;
    } catch (const std::exception& e) {
      ++failures;
      std::cerr << "criterion 1 dataset " << i << ": " << e.what() << '\n';
    }
  }
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = failures == 0 && n0_viol == 0 && n1_viol == 0 && n2_viol == 0 && ambiguous == 0 && t <= 600.0;
  o.detail = "noncrossing on 50 datasets: N0 probe violations " + std::to_string(n0_viol) + ", N1 train violations " +
             std::to_string(n1_viol) + ", N2 train sign violations " + std::to_string(n2_viol) +
             ", ambiguous models " + std::to_string(ambiguous) + ", failures " + std::to_string(failures) + ", " +
             fmt("%.1f s", t) + " (limit 600 s)";
  return o;
}

// 2. QP against the projected-gradient oracle, NORDIC-2 B&B against z enumeration.
Outcome criterion2() {
  const auto t0 = Clock::now();
  double worst_gap = 0.0, worst_dist = 0.0;
  int qp_bad = 0;
  Fixture f("qp_pg.txt");
  const int count = f.integer();
  for (int t = 0; t < count; ++t) {
    const int p = f.integer();
    QpProblem qp = QpProblem::with_vars(p);
    qp.Q = f.mat(p, p);
    qp.c = f.vec(p);
    qp.A_eq = f.vec(p).transpose();
    qp.b_eq = f.vec(1);
    qp.lower = f.vec(p);
    qp.upper = f.vec(p);
    const Eigen::VectorXd oracle = f.vec(p);
    f.num();
    const QpSolution s = solve_qp(qp);
    if (s.status != SolveStatus::kOptimal) ++qp_bad;
    worst_gap = std::max(worst_gap, s.gap);
    worst_dist = std::max(worst_dist, (s.theta - oracle).cwiseAbs().maxCoeff());
  }

  double worst_obj = 0.0;
  int milp_bad = 0;
  Fixture g("milp_enum.txt");
  const int instances = g.integer();
  for (int t = 0; t < instances; ++t) {
    const int n = g.integer();
    const int d = g.integer();
    const double lambda = g.num();
    const double big_m = g.num();
    const double margin = g.num();
    const Eigen::MatrixXd x = g.mat(n, d);
    std::vector<int> labels(n);
    for (int& v : labels) v = g.integer();
    const double expected = g.num();
    Nordic2Config config;
    config.M1 = config.M2 = big_m;
    config.margin = margin;
    const MilpSolution s = solve_milp(assemble_milp_nordic2(OrdinalDataset(x, labels, 3), x, lambda, config));
    if (s.status != MilpStatus::kOptimal) ++milp_bad;
    worst_obj = std::max(worst_obj, std::abs(s.objective - expected) / std::max(1.0, std::abs(expected)));
  }
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = count == 20 && instances == 5 && qp_bad == 0 && milp_bad == 0 && worst_gap <= 1e-6 && worst_dist <= 1e-4 &&
           worst_obj <= 1e-8 && t <= 300.0;
  o.detail = "solver exactness: " + std::to_string(count) + " QPs, max gap " + fmt("%.2e", worst_gap) +
             ", max |theta - oracle| " + fmt("%.2e", worst_dist) + "; " + std::to_string(instances) +
             " MILPs, max objective deviation " + fmt("%.2e", worst_obj) + "; " + fmt("%.1f s", t) + " (limit 300 s)";
  return o;
}

// Three ordered classes along the first axis.
OrdinalDataset separated_2d(int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, 2);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = 1 + static_cast<int>(rng.below(3));
    x(i, 0) = 4.0 * y[i] + 0.5 * rng.normal();
    x(i, 1) = rng.normal();
  }
  return OrdinalDataset(x, y, 3);
}

// 3. NORDIC-1 reduces to BSVM when the binary fits already do not cross.
Outcome criterion3(std::uint64_t seed) {
  const OrdinalDataset train_set = separated_2d(90, derive_seed(seed, 0, Stream::kTrain));
  const OrdinalDataset test_set = separated_2d(1000, derive_seed(seed, 0, Stream::kTest));
  HyperParams hp;
  hp.C = 1.0;
  hp.kernel = KernelSpec::linear();
  const OrdinalModel n1 = train(train_set, Method::kNordic1, hp);
  const OrdinalModel bs = train(train_set, Method::kBsvm, hp);
  const int bsvm_cross = check_noncrossing(bs, train_set.features(), CrossingMode::kValues).violations;
  const auto a = predict(n1, test_set.features()).labels;
  const auto b = predict(bs, test_set.features()).labels;
  int same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  const double rate = static_cast<double>(same) / static_cast<double>(a.size());
  Outcome o;
  o.pass = bsvm_cross == 0 && rate >= 0.99;
  o.detail = "reduction: BSVM train crossings " + std::to_string(bsvm_cross) + ", NORDIC-1/BSVM agreement " +
             fmt("%.4f", rate) + " on 1000 points (need >= 0.99)";
  return o;
}

// 1-D mixture: equal priors, N(-2, 1), N(0, 1), N(2, 1).
constexpr double kMixMeans[] = {-2.0, 0.0, 2.0};

double normal_pdf(double x, double mu) { return std::exp(-0.5 * (x - mu) * (x - mu)) / std::sqrt(2.0 * M_PI); }

std::vector<double> mixture_eta(double x) {
  std::vector<double> eta(3);
  double total = 0.0;
  for (int k = 0; k < 3; ++k) total += eta[k] = normal_pdf(x, kMixMeans[k]);
  for (double& v : eta) v /= total;
  return eta;
}

OrdinalDataset mixture(int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, 1);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = 1 + static_cast<int>(rng.below(3));
    x(i, 0) = kMixMeans[y[i] - 1] + rng.normal();
  }
  return OrdinalDataset(x, y, 3);
}

// 4. Fisher consistency desk check.
Outcome criterion4(std::uint64_t seed) {
  // Bayes risk by midpoint quadrature on [-12, 12].
  double bayes = 0.0;
  const double h = 1e-3;
  for (double x = -12.0 + 0.5 * h; x < 12.0; x += h) {
    const auto eta = mixture_eta(x);
    double density = 0.0;
    for (double mu : kMixMeans) density += normal_pdf(x, mu) / 3.0;
    bayes += density * (1.0 - eta[bayes_ordinal(eta) - 1]) * h;
  }
  const OrdinalDataset train_set = mixture(2000, derive_seed(seed, 0, Stream::kTrain));
  const OrdinalDataset tune_set = mixture(1000, derive_seed(seed, 0, Stream::kTune));
  const OrdinalDataset test_set = mixture(10000, derive_seed(seed, 0, Stream::kTest));
  HyperParams base;
  base.kernel = KernelSpec::rbf(1.0);
  const TuneResult tuned = tune(train_set, tune_set, Method::kNordic1, TuneGrid::defaults(train_set.features()),
                                CostMatrix::zero_one(3), base);
  const OrdinalModel model = train(train_set, Method::kNordic1, tuned.best);
  const PredictionResult pr = predict(model, test_set.features());
  const double err = weighted_error(pr.labels, test_set.labels(), CostMatrix::zero_one(3));
  int agree = 0, counted = 0;
  for (int i = 0; i < test_set.size(); ++i) {
    const auto eta = mixture_eta(test_set.features()(i, 0));
    double cum = 0.0;
    for (int k = 0; k < 2; ++k) {
      cum += eta[k];
      if (std::abs(cum - 0.5) <= 0.1) continue;
      ++counted;
      agree += (pr.decision_values(k, i) >= 0.0) == (cum < 0.5);
    }
  }
  const double rate = counted ? static_cast<double>(agree) / counted : 0.0;
  Outcome o;
  o.pass = std::abs(err - bayes) <= 0.03 && rate >= 0.95;
  o.detail = "Fisher consistency: test error " + fmt("%.4f", err) + ", Bayes risk " + fmt("%.4f", bayes) +
             ", sign agreement " + fmt("%.4f", rate) + " over " + std::to_string(counted) + " (point, k) pairs";
  return o;
}

// 5. Generator and loader fidelity.
Outcome criterion5(std::uint64_t seed) {
  GeneratorConfig g;
  g.family = GeneratorFamily::kDonut;
  g.n = 100000;
  g.d = 2;
  g.seed = derive_seed(seed, 0, Stream::kTrain);
  const auto counts = generate(g).class_counts();
  const double expect[] = {0.75, 0.0625, 0.1875};
  double worst = 0.0;
  std::string props;
  for (int k = 0; k < 3; ++k) {
    const double phat = counts[k] / 100000.0;
    const double se = std::sqrt(expect[k] * (1.0 - expect[k]) / 100000.0);
    worst = std::max(worst, std::abs(phat - expect[k]) / se);
    props += (k ? "/" : "") + fmt("%.4f", phat);
  }
  const OrdinalDataset balance = load_balance_scale(std::string(NORDIC_TEST_DATA) + "/balance-scale.data");
  const auto bc = balance.class_counts();
  Outcome o;
  o.pass = worst <= 4.0 && balance.size() == 625 && bc[0] == 288 && bc[1] == 49 && bc[2] == 288;
  o.detail = "fidelity: donut proportions " + props + " (max " + fmt("%.2f", worst) + " SE), balance " +
             std::to_string(balance.size()) + " rows " + std::to_string(bc[0]) + "/" + std::to_string(bc[1]) + "/" +
             std::to_string(bc[2]);
  return o;
}

std::map<Method, double> means(const ExperimentResult& r, bool weighted, int* failed) {
  std::map<Method, std::vector<double>> by;
  for (const CellResult& c : r.cells) {
    if (!c.ok) {
      ++*failed;
      continue;
    }
    by[c.method].push_back(weighted ? c.weighted_error : c.error);
  }
  std::map<Method, double> out;
  for (const auto& [m, v] : by) {
    double s = 0.0;
    for (double e : v) s += e;
    out[m] = s / static_cast<double>(v.size());
  }
  return out;
}

struct SubRun {
  std::string name;
  ExperimentConfig config;
  std::string csv;
  double seconds = 0.0;
};

std::vector<SubRun> criterion6_configs(std::uint64_t seed) {
  std::vector<SubRun> runs(3);
  ExperimentConfig& a = runs[0].config;
  runs[0].name = "6a";
  a.name = "c6a";
  a.dataset = "nonlinear3";
  a.d = 10;
  a.sigma = 0.5;
  a.n_train = {100};
  a.n_tune = {100};
  a.n_test = 2000;
  a.methods = {Method::kNordic0, Method::kNordic1, Method::kNordic2, Method::kBsvm};
  ExperimentConfig& b = runs[1].config;
  runs[1].name = "6b";
  b = a;
  b.name = "c6b";
  b.dataset = "donut";
  b.sigma = 0.4;
  b.n_test = 10000;
  b.methods = {Method::kNordic2, Method::kBsvm, Method::kCk};
  b.cost = "donut-costs";
  b.tune_metric = "weighted";
  ExperimentConfig& c = runs[2].config;
  runs[2].name = "6c";
  c.name = "c6c";
  c.dataset = "balance";
  c.path = std::string(NORDIC_TEST_DATA) + "/balance-scale.data";
  c.n_train = {125};
  c.n_tune = {125};
  c.methods = {Method::kNordic0, Method::kNordic1, Method::kNordic2, Method::kBsvm};
  c.cost = "balance-costs";
  c.tune_metric = "weighted";
  for (SubRun& r : runs) {
    r.config.replications = 20;
    r.config.seed = seed;
  }
  return runs;
}

std::string run_csv(const ExperimentConfig& config, ExperimentResult* keep) {
  ExperimentResult r = run_experiment(config);
  std::ostringstream out;
  write_results_csv(out, r);
  if (keep) *keep = std::move(r);
  return out.str();
}

// 6. Directional reproduction of the simulation and balance-scale comparisons.
Outcome criterion6(std::vector<SubRun>& runs, const std::string& out_dir) {
  Outcome o;
  o.pass = true;
  for (SubRun& run : runs) {
    const auto t0 = Clock::now();
    ExperimentResult r;
    run.csv = run_csv(run.config, &r);
    run.seconds = seconds_since(t0);
    if (!out_dir.empty()) write_outputs(out_dir + "/" + run.config.name, r);
    int failed = 0;
    const bool weighted = run.config.cost != "zero-one";
    const auto m = means(r, weighted, &failed);
    auto get = [&](Method k) { return m.count(k) ? m.at(k) : 1e9; };
    bool ok = false;
    std::string line;
    if (run.name == "6a") {
      const double best = std::min({get(Method::kNordic0), get(Method::kNordic1), get(Method::kNordic2)});
      ok = best <= get(Method::kBsvm) + 0.01;
      line = "best NORDIC " + fmt("%.4f", best) + " vs BSVM " + fmt("%.4f", get(Method::kBsvm));
    } else if (run.name == "6b") {
      ok = get(Method::kNordic2) <= get(Method::kBsvm) && get(Method::kNordic2) <= get(Method::kCk);
      line = "NORDIC-2 " + fmt("%.4f", get(Method::kNordic2)) + " vs BSVM " + fmt("%.4f", get(Method::kBsvm)) +
             ", CK " + fmt("%.4f", get(Method::kCk));
    } else {
      ok = get(Method::kNordic0) <= get(Method::kBsvm) + 0.01 && get(Method::kNordic1) <= get(Method::kBsvm) + 0.01 &&
           get(Method::kNordic2) <= get(Method::kBsvm) + 0.01;
      line = "NORDIC-0/1/2 " + fmt("%.4f", get(Method::kNordic0)) + "/" + fmt("%.4f", get(Method::kNordic1)) + "/" +
             fmt("%.4f", get(Method::kNordic2)) + " vs BSVM " + fmt("%.4f", get(Method::kBsvm));
    }
    ok = ok && failed == 0 && run.seconds <= 1800.0;
    o.pass = o.pass && ok;
    o.detail += (o.detail.empty() ? "" : "; ") + run.name + (ok ? " ok " : " FAILED ") + line +
                (failed ? ", failed cells " + std::to_string(failed) : "") + fmt(", %.0f s", run.seconds);
  }
  o.detail = "reproduction: " + o.detail;
  return o;
}

// Separated 1-D classes at -3, 0, 3 (sd 0.5).
OrdinalDataset separated_1d(int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, 1);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = 1 + static_cast<int>(rng.below(3));
    x(i, 0) = 3.0 * (y[i] - 2) + 0.5 * rng.normal();
  }
  return OrdinalDataset(x, y, 3);
}

// 7. BSVM crossing rate shrinks with n.
Outcome criterion7(std::uint64_t seed) {
  Eigen::MatrixXd grid(401, 1);
  for (int i = 0; i < 401; ++i) grid(i, 0) = -20.0 + 0.1 * i;
  HyperParams hp;
  hp.C = 1.0;
  hp.kernel = KernelSpec::linear();
  double rate[2] = {0.0, 0.0};
  const int sizes[2] = {100, 1000};
  for (int s = 0; s < 2; ++s) {
    for (int r = 0; r < 50; ++r) {
      const OrdinalDataset data = separated_1d(sizes[s], derive_seed(seed + s, r, Stream::kTrain));
      const OrdinalModel m = train(data, Method::kBsvm, hp);
      rate[s] += check_noncrossing(m, grid, CrossingMode::kValues).violations / 401.0 / 50.0;
    }
  }
  Outcome o;
  o.pass = rate[1] < rate[0];
  o.detail = "BSVM crossing rate on [-20, 20]: n=100 " + fmt("%.4f", rate[0]) + ", n=1000 " + fmt("%.4f", rate[1]);
  return o;
}

// 8. Determinism of the criterion-6 result files.
Outcome criterion8(std::vector<SubRun>& runs) {
  Outcome o;
  o.pass = true;
  for (SubRun& run : runs) {
    if (run.csv.empty()) run.csv = run_csv(run.config, nullptr);
    const bool same = run_csv(run.config, nullptr) == run.csv;
    o.pass = o.pass && same;
    o.detail += (o.detail.empty() ? "" : ", ") + run.name + (same ? " identical" : " DIFFERS");
  }
  o.detail = "determinism of results.csv: " + o.detail;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NORDIC acceptance suite"};
  std::vector<int> only;
  std::uint64_t seed = 1;
  std::string out_dir;
  app.add_option("--only", only, "criteria to run (default: all)")->check(CLI::Range(1, 8))->delimiter(',');
  app.add_option("--seed", seed, "base seed");
  app.add_option("--out", out_dir, "directory for criterion-6 outputs");
  CLI11_PARSE(app, argc, argv);
  std::set<int> chosen(only.begin(), only.end());
  if (chosen.empty()) chosen = {1, 2, 3, 4, 5, 6, 7, 8};

  std::vector<SubRun> runs = criterion6_configs(seed);
  const std::map<int, std::function<Outcome()>> criteria = {
      {1, [&] { return criterion1(seed); }},
      {2, [&] { return criterion2(); }},
      {3, [&] { return criterion3(seed); }},
      {4, [&] { return criterion4(seed); }},
      {5, [&] { return criterion5(seed); }},
      {6, [&] { return criterion6(runs, out_dir); }},
      {7, [&] { return criterion7(seed); }},
      {8, [&] { return criterion8(runs); }},
  };
  int failed = 0;
  for (int k : chosen) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria.at(k)();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    failed += !o.pass;
    std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail
              << fmt("  [%.1f s]", seconds_since(t0)) << std::endl;
  }
  return failed ? 1 : 0;
}
