#pragma once

#include "pass/baselines.hpp"
#include "pass/data.hpp"
#include "pass/eval.hpp"
#include "pass/io.hpp"
#include "pass/pass_estimator.hpp"
#include "pass/simgen.hpp"
#include "pass/surrogate.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pass {

// Everything a CLI run needs. Serialized verbatim into every output
// directory; unknown keys are rejected when reading.
struct ExperimentConfig {
  // Data source: a simulation scenario or a CSV file.
  std::optional<std::string> scenario;
  std::optional<std::string> real_data;
  std::string surrogate_col = "S";
  std::optional<std::string> label_col = std::string("Y");
  std::optional<std::string> utilization_col;

  // Preprocessing (applied before any fit).
  std::vector<std::string> log1p_columns;  // "*" selects every feature
  bool log1p_surrogate = false;
  bool orthogonalize = false;
  bool orthogonalize_surrogate = false;
  bool standardize = false;
  bool raw_scale = false;

  std::vector<std::string> methods{"lasso", "alasso", "ss_prior", "plasso1", "plasso2", "pass"};
  Index n = 100;
  Index N = 2000;
  Index p = 200;
  Index test_size = 2000;
  int reps = 2;
  std::uint64_t seed = 1;

  std::vector<double> lambda1_grid;
  int n_lambda1 = 30;
  double lambda1_min_ratio = 1e-2;
  std::vector<double> kappa_grid{0.25, 0.5, 1.0, 2.0, 4.0};
  int n_lambda = 30;
  double lambda_min_ratio = 1e-2;
  std::vector<double> mixing_grid{0.0, 0.25, 0.5, 1.0, 2.0};
  int n_mu = 100;
  double mu_min_ratio = 1e-4;
  double nu = 1.0;
  int n_folds = 10;
  double q_upper = 0.9;
  double q_lower = 0.1;
  std::string cv_criterion = "deviance";

  // Real-data resampling: folds x label resamples x replications.
  int real_folds = 4;
  int real_resamples = 20;
  int real_replications = 10;

  std::string out = "out";
  int threads = 1;
  double max_failure_fraction = 0.1;
  bool svg = true;

  // evaluate
  std::optional<std::string> model;
  std::optional<std::string> test_data;
  std::optional<std::string> truth;

  void validate() const;
  bool simulation_mode() const { return scenario.has_value(); }
  ScenarioSpec scenario_spec(std::uint64_t seed_value, Index labeled) const;
  AlphaOptions alpha_options() const;
  PassTuning pass_tuning(std::uint64_t cv_seed) const;
  BaselineOptions baseline_options(std::uint64_t cv_seed) const;
};

Json to_json(const ExperimentConfig& cfg);
// Overlays the keys of `j` onto `base`; throws ConfigError on unknown keys.
ExperimentConfig config_from_json(const Json& j, ExperimentConfig base = {});
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Label-size variants of the supervised LASSO are written "lasso_<n>".
struct MethodName {
  MethodTag tag;
  std::optional<Index> labels;
  std::string text;
};
MethodName parse_method_name(const std::string& name);
bool method_needs_alpha(MethodTag tag);
bool method_needs_unlabeled(MethodTag tag);

// Loads the CSV named by `real_data` and applies the configured transforms.
Dataset prepare_real_data(const ExperimentConfig& cfg);
Dataset apply_preprocessing(const Dataset& raw, const ExperimentConfig& cfg);

// Shared per-replicate artifacts computed from unlabeled information only.
struct UnlabeledStage {
  std::optional<AlphaFit> alpha;
  std::optional<Coefficients> ulasso;
};
UnlabeledStage fit_unlabeled_stage(const Dataset& train, const std::vector<MethodName>& methods,
                                   const ExperimentConfig& cfg, std::uint64_t cv_seed);

// Fits one method on the labeled rows of `train`.
Coefficients fit_method(const MethodName& method, const Dataset& train,
                        const UnlabeledStage& stage, const ExperimentConfig& cfg,
                        std::uint64_t cv_seed, PassFit* pass_out = nullptr);

struct ResultRow {
  int replicate = 0;
  std::string method;
  std::string metric;
  double value = 0.0;
  Index n = 0;
  Index N = 0;
  Index p = 0;
  std::string scenario;
  std::uint64_t seed = 0;
};

struct ReplicateOutcome {
  int replicate = 0;
  std::uint64_t seed = 0;
  std::vector<ResultRow> rows;
  std::vector<std::string> failures;              // "method: message"
  std::vector<std::pair<std::string, std::string>> fold_hashes;  // method -> hash
};

struct BenchResult {
  std::vector<ReplicateOutcome> replicates;
  int failed_replicates = 0;

  std::vector<ResultRow> rows() const;
  std::string results_csv() const;
  Json summary(const ExperimentConfig& cfg) const;
  bool over_failure_threshold(double fraction) const;
};

BenchResult run_bench(const ExperimentConfig& cfg);
// Writes results.csv, summary.json, config.json, manifest.json and SVGs.
void write_bench_outputs(const BenchResult& result, const ExperimentConfig& cfg);

// Hash of the fold assignment a CV-tuned method sees for these labels.
std::string fold_hash(const Vector& labels, int n_folds, std::uint64_t seed);

// Box-and-whisker SVG with one box per group (outliers not drawn).
std::string boxplot_svg(const std::string& title,
                        const std::vector<std::pair<std::string, std::vector<double>>>& groups);

struct SimulateOutcome {
  std::vector<std::string> files;
};
SimulateOutcome cmd_simulate(const ExperimentConfig& cfg);

struct FitOutcome {
  Json model;
  bool alpha_cache_hit = false;
  std::string model_path;
};
FitOutcome cmd_fit(const ExperimentConfig& cfg);

struct EvaluateOutcome {
  MetricsReport report;
  std::string path;
};
EvaluateOutcome cmd_evaluate(const ExperimentConfig& cfg);

}  // namespace pass
