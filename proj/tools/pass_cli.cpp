#include "pass/experiment.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> scenario;
  std::vector<std::string> methods;
  std::optional<long long> n;
  std::optional<long long> N;
  std::optional<long long> p;
  std::optional<long long> test_size;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<std::string> real_data;
  std::optional<std::string> surrogate_col;
  std::optional<std::string> label_col;
  std::optional<std::string> utilization_col;
  std::vector<std::string> log1p;
  bool log1p_surrogate = false;
  bool orthogonalize = false;
  bool standardize = false;
  bool raw_scale = false;
  bool no_svg = false;
  std::optional<std::string> model;
  std::optional<std::string> test;
  std::optional<std::string> truth;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON config file; flags override its keys");
  app->add_option("--scenario", o.scenario, "Simulation scenario (I-VI, i-iii)");
  app->add_option("--method", o.methods, "Method(s): lasso, lasso_<n>, alasso, ss_prior, "
                                         "plasso1, plasso2, ulasso, ss_ulasso, pass");
  app->add_option("--n", o.n, "Labeled rows");
  app->add_option("--N", o.N, "Total training rows");
  app->add_option("--p", o.p, "Feature count");
  app->add_option("--test-size", o.test_size, "Test rows for simulations");
  app->add_option("--seed", o.seed, "Base seed");
  app->add_option("--reps", o.reps, "Replicates");
  app->add_option("--out", o.out, "Output directory");
  app->add_option("--threads", o.threads, "Worker threads");
  app->add_option("--real-data", o.real_data, "Training CSV");
  app->add_option("--surrogate-col", o.surrogate_col, "Surrogate column name");
  app->add_option("--label-col", o.label_col, "Label column name (empty cells are unlabeled)");
  app->add_option("--utilization-col", o.utilization_col, "Healthcare utilization column");
  app->add_option("--log1p", o.log1p, "Columns to log(1+x) transform ('*' for all)");
  app->add_flag("--log1p-surrogate", o.log1p_surrogate, "Apply log(1+x) to the surrogate");
  app->add_flag("--orthogonalize", o.orthogonalize, "Residualize features on utilization");
  app->add_flag("--standardize", o.standardize, "Standardize features");
  app->add_flag("--raw-scale", o.raw_scale, "Report coefficients on the standardized scale");
  app->add_flag("--no-svg", o.no_svg, "Skip SVG boxplots");
}

pass::ExperimentConfig resolve(const Overrides& o) {
  pass::ExperimentConfig cfg;
  if (o.config) cfg = pass::config_from_json(pass::read_json_file(*o.config));
  if (o.scenario) cfg.scenario = *o.scenario;
  if (!o.methods.empty()) cfg.methods = o.methods;
  if (o.n) cfg.n = *o.n;
  if (o.N) cfg.N = *o.N;
  if (o.p) cfg.p = *o.p;
  if (o.test_size) cfg.test_size = *o.test_size;
  if (o.seed) cfg.seed = *o.seed;
  if (o.reps) cfg.reps = *o.reps;
  if (o.out) cfg.out = *o.out;
  if (o.threads) cfg.threads = *o.threads;
  if (o.real_data) {
    cfg.real_data = *o.real_data;
    if (!o.scenario) cfg.scenario.reset();
  }
  if (o.surrogate_col) cfg.surrogate_col = *o.surrogate_col;
  if (o.label_col) cfg.label_col = *o.label_col;
  if (o.utilization_col) cfg.utilization_col = *o.utilization_col;
  if (!o.log1p.empty()) cfg.log1p_columns = o.log1p;
  if (o.log1p_surrogate) cfg.log1p_surrogate = true;
  if (o.orthogonalize) cfg.orthogonalize = true;
  if (o.standardize) cfg.standardize = true;
  if (o.raw_scale) cfg.raw_scale = true;
  if (o.no_svg) cfg.svg = false;
  if (o.model) cfg.model = *o.model;
  if (o.test) cfg.test_data = *o.test;
  if (o.truth) cfg.truth = *o.truth;
  return cfg;
}

int run(const std::string& command, const pass::ExperimentConfig& cfg) {
  if (command == "simulate") {
    for (const auto& f : pass::cmd_simulate(cfg).files) std::cout << f << "\n";
    return 0;
  }
  if (command == "fit") {
    const auto outcome = pass::cmd_fit(cfg);
    if (outcome.alpha_cache_hit) std::cerr << "[pass] alpha-stage cache hit\n";
    std::cout << outcome.model_path << "\n";
    return 0;
  }
  if (command == "evaluate") {
    const auto outcome = pass::cmd_evaluate(cfg);
    for (const auto& [metric, value] : outcome.report.values()) {
      std::cout << metric << " " << pass::format_double(value) << "\n";
    }
    return 0;
  }
  const auto result = pass::run_bench(cfg);
  pass::write_bench_outputs(result, cfg);
  for (const auto& rep : result.replicates) {
    for (const auto& f : rep.failures) {
      std::cerr << "[pass] replicate " << rep.replicate << " failed: " << f << "\n";
    }
  }
  std::cerr << "[pass] " << result.replicates.size() << " replicates, "
            << result.failed_replicates << " with failures; results in " << cfg.out << "\n";
  return result.over_failure_threshold(cfg.max_failure_fraction) ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prior adaptive semi-supervised phenotyping"};
  app.require_subcommand(1);
  Overrides o;
  auto* sim = app.add_subcommand("simulate", "Write simulated train/test data and truth");
  auto* fit = app.add_subcommand("fit", "Fit one method and write the model JSON");
  auto* eval = app.add_subcommand("evaluate", "Score a fitted model on a test CSV");
  auto* bench = app.add_subcommand("bench", "Run replicated method comparisons");
  for (auto* sub : {sim, fit, eval, bench}) add_common(sub, o);
  eval->add_option("--model", o.model, "Model JSON from 'fit'");
  eval->add_option("--test", o.test, "Test CSV");
  eval->add_option("--truth", o.truth, "Truth JSON from 'simulate'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::string command = "bench";
  if (sim->parsed()) command = "simulate";
  if (fit->parsed()) command = "fit";
  if (eval->parsed()) command = "evaluate";

  try {
    return run(command, resolve(o));
  } catch (const pass::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
