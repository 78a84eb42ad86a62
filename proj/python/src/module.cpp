#include "pass/experiment.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace pass;

namespace {

py::dict glm_dict(const GlmFit& f) {
  py::dict d;
  d["coefficients"] = f.coefficients;
  d["intercept"] = f.intercept;
  d["objective"] = f.objective;
  d["loss"] = f.loss_value;
  d["converged"] = f.converged;
  d["eta_clamped"] = f.eta_clamped;
  d["kkt_max_violation"] = f.kkt_max_violation;
  d["iterations"] = f.n_iterations;
  return d;
}

py::dict alpha_dict(const AlphaFit& a) {
  py::dict d;
  d["alpha"] = a.alpha;
  d["tau"] = a.tau;
  d["alpha_init"] = a.alpha_init;
  d["support"] = a.support;
  d["mu"] = a.mu;
  d["mu_init"] = a.mu_init;
  d["bic"] = a.bic;
  d["warnings"] = a.warnings;
  return d;
}

py::dict coef_dict(const Coefficients& c) {
  py::dict d;
  d["method"] = to_string(c.method);
  d["zeta"] = c.zeta;
  d["gamma"] = c.gamma ? py::cast(*c.gamma) : py::none();
  d["beta"] = c.beta;
  d["warnings"] = c.warnings;
  return d;
}

py::dict pass_dict(const PassFit& f) {
  py::dict d;
  d["method"] = "pass";
  d["zeta"] = f.zeta;
  d["gamma"] = f.gamma;
  d["rho"] = f.rho;
  d["delta"] = f.delta;
  d["beta"] = f.beta;
  d["lambda1"] = f.lambda1;
  d["kappa"] = f.kappa;
  d["degenerate"] = f.degenerate;
  d["cv_score"] = f.cv_score;
  d["warnings"] = f.warnings;
  return d;
}

AlphaFit alpha_from(const Vector& alpha, std::optional<std::vector<Index>> support) {
  AlphaFit a;
  a.alpha = alpha;
  if (support) {
    a.support = *support;
  } else {
    for (Index j = 0; j < alpha.size(); ++j) {
      if (alpha[j] != 0.0) a.support.push_back(j);
    }
  }
  return a;
}

py::dict dataset_dict(const Dataset& ds) {
  py::dict d;
  d["X"] = ds.features;
  d["S"] = ds.surrogate;
  d["labeled_index"] = ds.labeled_index;
  d["Y"] = ds.labels;
  d["columns"] = ds.column_names;
  return d;
}

Dataset make_dataset(const Matrix& X, const Vector& S, const std::vector<Index>& labeled_index,
                     const Vector& Y) {
  Dataset ds;
  ds.features = X;
  ds.surrogate = S;
  ds.labeled_index = labeled_index;
  ds.labels = Y;
  for (Index j = 0; j < X.cols(); ++j) ds.column_names.push_back("x" + std::to_string(j + 1));
  ds.validate();
  return ds;
}

LossKind parse_loss(const std::string& loss) {
  if (loss == "linear") return LossKind::kLinear;
  if (loss == "logistic") return LossKind::kLogistic;
  throw ConfigError("loss must be 'linear' or 'logistic'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Prior adaptive semi-supervised (PASS) phenotyping estimators";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  m.def(
      "simulate",
      [](const std::string& scenario, Index n, Index N, Index p, std::uint64_t seed,
         Index test_size) {
        const Simulation sim = generate(ScenarioSpec{parse_scenario(scenario), n, N, p, seed, test_size});
        py::dict d;
        d["train"] = dataset_dict(sim.train);
        d["test"] = dataset_dict(sim.test);
        d["truth_json"] = to_json(sim.truth).dump();
        d["true_eta_test"] = true_predictors(sim.truth, sim.test);
        return d;
      },
      py::arg("scenario"), py::arg("n") = 100, py::arg("N") = 2000, py::arg("p") = 200,
      py::arg("seed") = 1, py::arg("test_size") = 2000);

  m.def(
      "fit_weighted_l1",
      [](const Matrix& X, const Vector& y, double lam, std::optional<Vector> weights,
         const std::string& loss, bool fit_intercept) {
        SolverOptions opt;
        opt.fit_intercept = fit_intercept;
        const PenaltySpec pen{lam, weights ? *weights : Vector::Ones(X.cols())};
        return glm_dict(fit_weighted_l1(parse_loss(loss), X, y, pen, opt));
      },
      py::arg("X"), py::arg("y"), py::arg("lam"), py::arg("weights") = py::none(),
      py::arg("loss") = "logistic", py::arg("fit_intercept") = true,
      "Minimize mean loss + lam * sum(w |c|); weight inf pins a coordinate at 0.");

  m.def(
      "fit_alpha",
      [](const Matrix& X, const Vector& S, int n_mu, double mu_min_ratio, double nu) {
        AlphaOptions opt;
        opt.n_mu = n_mu;
        opt.mu_min_ratio = mu_min_ratio;
        opt.nu = nu;
        return alpha_dict(fit_alpha(make_dataset(X, S, {}, Vector()), opt));
      },
      py::arg("X"), py::arg("S"), py::arg("n_mu") = 100, py::arg("mu_min_ratio") = 1e-4,
      py::arg("nu") = 1.0);

  m.def(
      "fit_pass",
      [](const Matrix& X, const Vector& S, const Vector& Y, const Vector& alpha, double lambda1,
         double kappa, std::optional<std::vector<Index>> support) {
        const LabeledData data{X, S, Y};
        return pass_dict(fit_pass(data, alpha_from(alpha, support), lambda1, kappa));
      },
      py::arg("X"), py::arg("S"), py::arg("Y"), py::arg("alpha"), py::arg("lambda1"),
      py::arg("kappa"), py::arg("support") = py::none());

  m.def(
      "tune_pass",
      [](const Matrix& X, const Vector& S, const Vector& Y, const Vector& alpha,
         std::optional<std::vector<Index>> support, int n_folds, std::uint64_t seed,
         std::optional<std::vector<double>> kappa_grid) {
        PassTuning t;
        t.n_folds = n_folds;
        t.seed = seed;
        if (kappa_grid) t.kappa_grid = *kappa_grid;
        return pass_dict(tune_pass(LabeledData{X, S, Y}, alpha_from(alpha, support), t));
      },
      py::arg("X"), py::arg("S"), py::arg("Y"), py::arg("alpha"),
      py::arg("support") = py::none(), py::arg("n_folds") = 10, py::arg("seed") = 1,
      py::arg("kappa_grid") = py::none());

  m.def(
      "fit_method",
      [](const std::string& method, const Matrix& X, const Vector& S,
         const std::vector<Index>& labeled_index, const Vector& Y, std::uint64_t seed,
         int n_folds) {
        ExperimentConfig cfg;
        cfg.n_folds = n_folds;
        const MethodName name = parse_method_name(method);
        const Dataset ds = make_dataset(X, S, labeled_index, Y);
        const UnlabeledStage stage = fit_unlabeled_stage(ds, {name}, cfg, seed);
        return coef_dict(fit_method(name, ds, stage, cfg, seed));
      },
      py::arg("method"), py::arg("X"), py::arg("S"), py::arg("labeled_index"), py::arg("Y"),
      py::arg("seed") = 1, py::arg("n_folds") = 10,
      "Fit any method by name on all rows of X/S with labels Y on labeled_index.");

  m.def("auc", &pass::auc, py::arg("scores"), py::arg("labels"));
  m.def("bss", py::overload_cast<const Vector&, const Vector&>(&pass::bss), py::arg("prob"),
        py::arg("labels"));
  m.def("excess_risk",
        py::overload_cast<const Vector&, const Vector&, const Vector&>(&pass::excess_risk),
        py::arg("eta_hat"), py::arg("eta_true"), py::arg("labels"));
  m.def("mse_p", py::overload_cast<const Vector&, const Vector&>(&pass::mse_p),
        py::arg("eta_hat"), py::arg("eta_true"));
  m.def(
      "make_folds",
      [](const Vector& labels, int n_folds, std::uint64_t seed, bool stratified) {
        return make_folds(labels, n_folds, seed, stratified).fold;
      },
      py::arg("labels"), py::arg("n_folds"), py::arg("seed"), py::arg("stratified") = true);

  m.def(
      "bench",
      [](const std::string& config_json) {
        const ExperimentConfig cfg = config_from_json(Json::parse(config_json));
        BenchResult result;
        {
          py::gil_scoped_release release;
          result = run_bench(cfg);
        }
        py::dict d;
        d["results_csv"] = result.results_csv();
        d["summary_json"] = result.summary(cfg).dump();
        d["failed_replicates"] = result.failed_replicates;
        return d;
      },
      py::arg("config_json"), "Run a bench from a JSON config; returns CSV and summary text.");
}
