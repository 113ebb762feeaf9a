#include "nordic/data.hpp"
#include "nordic/eval.hpp"
#include "nordic/experiment.hpp"
#include "nordic/model.hpp"
#include "nordic/nordic.hpp"
#include "nordic/predict.hpp"
#include "nordic/tune.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace nordic;

namespace {

OrdinalDataset make_dataset(const Eigen::MatrixXd& x, const std::vector<int>& y, int num_classes) {
  if (num_classes <= 0) {
    num_classes = 0;
    for (int v : y) num_classes = std::max(num_classes, v);
  }
  return OrdinalDataset(x, y, num_classes);
}

py::tuple as_arrays(const OrdinalDataset& d) { return py::make_tuple(d.features(), d.labels(), d.num_classes()); }

CostMatrix cost_from(const py::object& cost, int k) {
  if (cost.is_none()) return CostMatrix::zero_one(k);
  if (py::isinstance<py::str>(cost)) return CostMatrix::preset(cost.cast<std::string>(), k);
  return CostMatrix(cost.cast<Eigen::MatrixXd>());
}

KernelSpec kernel_from(const std::string& kernel, double width) {
  return kernel == "linear" ? KernelSpec::linear() : KernelSpec::rbf(width);
}

}  // namespace

PYBIND11_MODULE(_nordic, m) {
  m.doc() = "Noncrossing ordinal classification";

  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  m.def(
      "generate",
      [](const std::string& family, int n, int d, double sigma, std::uint64_t seed) {
        GeneratorConfig g;
        if (family == "nonlinear3") g.family = GeneratorFamily::kNonlinear3;
        else if (family == "donut") g.family = GeneratorFamily::kDonut;
        else throw py::value_error("family is nonlinear3 or donut");
        g.n = n;
        g.d = d;
        g.sigma = sigma;
        g.seed = seed;
        return as_arrays(generate(g));
      },
      py::arg("family"), py::arg("n"), py::arg("d") = 2, py::arg("sigma") = 0.0, py::arg("seed") = 1,
      "Returns (X, y, K).");
  m.def("load_balance_scale", [](const std::string& path) { return as_arrays(load_balance_scale(path)); },
        py::arg("path"));
  m.def("bandwidth_candidates", &bandwidth_candidates, py::arg("x"));

  py::class_<OrdinalModel>(m, "Model")
      .def_property_readonly("method", [](const OrdinalModel& o) { return to_string(o.method); })
      .def_property_readonly("num_classes", [](const OrdinalModel& o) { return o.num_classes; })
      .def_property_readonly("kernel", [](const OrdinalModel& o) { return o.kernel.name(); })
      .def_property_readonly("omega", [](const OrdinalModel& o) { return o.omega; })
      .def_property_readonly("bias", [](const OrdinalModel& o) { return o.bias; })
      .def_property_readonly("solver_status", [](const OrdinalModel& o) { return o.info.solver_status; })
      .def("decision_function", [](const OrdinalModel& o, const Eigen::MatrixXd& x) {
        return Eigen::MatrixXd(decision_values(o, x).transpose());
      })
      .def("predict", [](const OrdinalModel& o, const Eigen::MatrixXd& x) { return predict(o, x).labels; })
      .def("predict_full",
           [](const OrdinalModel& o, const Eigen::MatrixXd& x) {
             const PredictionResult r = predict(o, x);
             std::vector<bool> amb(r.ambiguous.begin(), r.ambiguous.end());
             return py::make_tuple(r.labels, amb, Eigen::MatrixXd(r.decision_values.transpose()));
           },
           "Returns (labels, ambiguous, decision values n x (K-1)).")
      .def("crossings",
           [](const OrdinalModel& o, const Eigen::MatrixXd& x, const std::string& mode) {
             return check_noncrossing(o, x, mode == "signs" ? CrossingMode::kSigns : CrossingMode::kValues)
                 .violations;
           },
           py::arg("x"), py::arg("mode") = "values")
      .def("to_json", [](const OrdinalModel& o) { return model_to_json(o); })
      .def_static("from_json", [](const std::string& s) { return model_from_json(s); });

  m.def(
      "train",
      [](const Eigen::MatrixXd& x, const std::vector<int>& y, const std::string& method, double penalty,
         const std::string& kernel, double width, int num_classes) {
        const Method meth = parse_method(method);
        HyperParams hp;
        hp.set_penalty(meth, penalty);
        hp.kernel = kernel_from(kernel, width);
        py::gil_scoped_release release;
        return train(make_dataset(x, y, num_classes), meth, hp);
      },
      py::arg("x"), py::arg("y"), py::arg("method") = "nordic1", py::arg("penalty") = 1.0, py::arg("kernel") = "rbf",
      py::arg("width") = 1.0, py::arg("num_classes") = 0,
      "penalty is C for nordic0/nordic1/bsvm/ck and lambda for nordic2.");

  m.def(
      "tune",
      [](const Eigen::MatrixXd& x, const std::vector<int>& y, const Eigen::MatrixXd& x_tune,
         const std::vector<int>& y_tune, const std::string& method, const std::string& kernel,
         std::vector<double> penalties, std::vector<double> widths, const py::object& cost, int num_classes) {
        const OrdinalDataset train_set = make_dataset(x, y, num_classes);
        const OrdinalDataset tune_set(x_tune, y_tune, train_set.num_classes());
        TuneGrid grid = TuneGrid::defaults(x);
        if (!penalties.empty()) grid.penalties = std::move(penalties);
        if (!widths.empty()) grid.widths = std::move(widths);
        HyperParams base;
        base.kernel = kernel_from(kernel, 1.0);
        const CostMatrix metric = cost_from(cost, train_set.num_classes());
        const Method meth = parse_method(method);
        TuneResult r;
        OrdinalModel model;
        {
          py::gil_scoped_release release;
          r = tune(train_set, tune_set, meth, grid, metric, base);
          model = train(train_set, meth, r.best);
        }
        return py::make_tuple(model, r.best.penalty(meth), r.best.kernel.width, r.best_score);
      },
      py::arg("x"), py::arg("y"), py::arg("x_tune"), py::arg("y_tune"), py::arg("method") = "nordic1",
      py::arg("kernel") = "rbf", py::arg("penalties") = std::vector<double>{},
      py::arg("widths") = std::vector<double>{}, py::arg("cost") = py::none(), py::arg("num_classes") = 0,
      "Grid search on the tuning set; returns (model, penalty, width, score).");

  m.def(
      "weighted_error",
      [](const std::vector<int>& pred, const std::vector<int>& truth, const py::object& cost, int num_classes) {
        int k = num_classes;
        for (int v : truth) k = std::max(k, v);
        for (int v : pred) k = std::max(k, v);
        return weighted_error(pred, truth, cost_from(cost, k));
      },
      py::arg("predicted"), py::arg("truth"), py::arg("cost") = py::none(), py::arg("num_classes") = 0);
  m.def("cost_matrix", [](const std::string& name, int k) { return CostMatrix::preset(name, k).entries(); },
        py::arg("name"), py::arg("num_classes") = 3);

  m.def(
      "run_experiment",
      [](const std::string& config_text) {
        const ExperimentConfig c = parse_config(config_text);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(c);
        }
        std::ostringstream out;
        write_results_csv(out, r);
        return py::make_tuple(out.str(), summarize(r).dump());
      },
      py::arg("config"), "Flat or JSON config text; returns (results CSV text, summary JSON text).");
}
