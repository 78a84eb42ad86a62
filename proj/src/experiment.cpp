#include "pass/experiment.hpp"

#include "pass/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <thread>

namespace pass {
namespace fs = std::filesystem;

namespace {

CvCriterion parse_criterion(const std::string& s) {
  if (s == "deviance") return CvCriterion::kDeviance;
  if (s == "auc") return CvCriterion::kAuc;
  throw ConfigError("cv_criterion must be 'deviance' or 'auc'");
}

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
void read_optional(const Json& v, std::optional<T>& field) {
  if (v.is_null()) {
    field.reset();
  } else {
    field = v.get<T>();
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory '" + dir + "'");
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

Json manifest(const std::string& command, const ExperimentConfig& cfg,
              const std::vector<std::pair<std::string, std::string>>& files) {
  Json f = Json::object();
  for (const auto& [name, content] : files) f[name] = hex64(fnv1a(content));
  Json config = to_json(cfg);
  config.erase("out");
  return Json{{"tool", "pass_cli"},
              {"version", "1.0.0"},
              {"command", command},
              {"config_hash", hex64(config_hash(cfg))},
              {"seed", cfg.seed},
              {"config", config},
              {"files", f}};
}

bool uses_cv(MethodTag tag) {
  return tag == MethodTag::kLasso || tag == MethodTag::kAlasso || tag == MethodTag::kPlasso1 ||
         tag == MethodTag::kPlasso2 || tag == MethodTag::kPass;
}

std::vector<MethodName> parse_methods(const std::vector<std::string>& names) {
  std::vector<MethodName> out;
  for (const auto& n : names) out.push_back(parse_method_name(n));
  return out;
}

void add_metric_rows(ReplicateOutcome& rep, const std::string& method, const MetricsReport& m,
                     Index n, Index N, Index p, const std::string& scenario) {
  for (const auto& [metric, value] : m.values()) {
    rep.rows.push_back({rep.replicate, method, metric, value, n, N, p, scenario, rep.seed});
  }
}

// Maps a standardized-scale model back to the pre-standardization scale.
void unstandardize_model(const TransformLog& log, Json& model) {
  const StandardizeStep* step = nullptr;
  for (auto it = log.steps.rbegin(); it != log.steps.rend(); ++it) {
    if ((step = std::get_if<StandardizeStep>(&*it)) != nullptr) break;
  }
  if (step == nullptr) return;
  double zeta = model.at("zeta").get<double>();
  Vector beta = vector_from_json(model.at("beta"));
  unstandardize_coefficients(log, zeta, beta);
  model["zeta"] = zeta;
  model["beta"] = vector_to_json(beta);
  for (const char* key : {"delta", "alpha"}) {
    if (!model.contains(key)) continue;
    Vector v = vector_from_json(model.at(key));
    for (size_t k = 0; k < step->columns.size(); ++k) v[step->columns[k]] /= step->scales[k];
    model[key] = vector_to_json(v);
  }
}

TransformLog without_last_standardize(TransformLog log) {
  for (auto it = log.steps.rbegin(); it != log.steps.rend(); ++it) {
    if (std::holds_alternative<StandardizeStep>(*it)) {
      log.steps.erase(std::next(it).base());
      break;
    }
  }
  return log;
}

// Drops labels, keeping the rows: data for the label-free stages.
Dataset strip_labels(const Dataset& ds) {
  Dataset out = ds;
  out.labeled_index.clear();
  out.labels.resize(0);
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (scenario && real_data) throw ConfigError("choose either a scenario or real_data, not both");
  if (scenario) {
    const ScenarioId id = parse_scenario(*scenario);
    ScenarioSpec spec{id, n, N, p, seed, test_size};
    spec.validate();
  }
  if (methods.empty()) throw ConfigError("method list is empty");
  for (const auto& m : methods) parse_method_name(m);
  if (reps < 1) throw ConfigError("reps must be >= 1");
  if (n < 1) throw ConfigError("n must be >= 1");
  if (n_folds < 2) throw ConfigError("n_folds must be >= 2");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (kappa_grid.empty()) throw ConfigError("kappa_grid is empty");
  for (double k : kappa_grid) {
    if (!(k > 0.0)) throw ConfigError("kappa values must be positive");
  }
  if (mixing_grid.empty()) throw ConfigError("mixing_grid is empty");
  if (n_lambda1 < 2 || n_lambda < 2 || n_mu < 2) throw ConfigError("grid sizes must be >= 2");
  for (double r : {lambda1_min_ratio, lambda_min_ratio, mu_min_ratio}) {
    if (!(r > 0.0 && r < 1.0)) throw ConfigError("min ratios must lie in (0, 1)");
  }
  if (!(nu > 0.0)) throw ConfigError("nu must be positive");
  if (!(q_upper > q_lower)) throw ConfigError("q_upper must exceed q_lower");
  parse_criterion(cv_criterion);
  if (real_folds < 2 || real_resamples < 1 || real_replications < 1) {
    throw ConfigError("real-data resampling parameters must be positive (folds >= 2)");
  }
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0)) {
    throw ConfigError("max_failure_fraction must lie in [0, 1]");
  }
}

ScenarioSpec ExperimentConfig::scenario_spec(std::uint64_t seed_value, Index labeled) const {
  if (!scenario) throw ConfigError("no scenario configured");
  return ScenarioSpec{parse_scenario(*scenario), labeled, N, p, seed_value, test_size};
}

AlphaOptions ExperimentConfig::alpha_options() const {
  AlphaOptions o;
  o.n_mu = n_mu;
  o.mu_min_ratio = mu_min_ratio;
  o.nu = nu;
  return o;
}

PassTuning ExperimentConfig::pass_tuning(std::uint64_t cv_seed) const {
  PassTuning t;
  t.lambda1_grid = lambda1_grid;
  t.n_lambda = n_lambda1;
  t.lambda_min_ratio = lambda1_min_ratio;
  t.kappa_grid = kappa_grid;
  t.n_folds = n_folds;
  t.seed = cv_seed;
  t.criterion = parse_criterion(cv_criterion);
  return t;
}

BaselineOptions ExperimentConfig::baseline_options(std::uint64_t cv_seed) const {
  BaselineOptions o;
  o.n_folds = n_folds;
  o.seed = cv_seed;
  o.n_lambda = n_lambda;
  o.lambda_min_ratio = lambda_min_ratio;
  o.nu = nu;
  o.mixing_grid = mixing_grid;
  o.q_upper = q_upper;
  o.q_lower = q_lower;
  o.criterion = parse_criterion(cv_criterion);
  return o;
}

Json to_json(const ExperimentConfig& c) {
  return Json{{"scenario", optional_json(c.scenario)},
              {"real_data", optional_json(c.real_data)},
              {"surrogate_col", c.surrogate_col},
              {"label_col", optional_json(c.label_col)},
              {"utilization_col", optional_json(c.utilization_col)},
              {"log1p_columns", c.log1p_columns},
              {"log1p_surrogate", c.log1p_surrogate},
              {"orthogonalize", c.orthogonalize},
              {"orthogonalize_surrogate", c.orthogonalize_surrogate},
              {"standardize", c.standardize},
              {"raw_scale", c.raw_scale},
              {"methods", c.methods},
              {"n", c.n},
              {"N", c.N},
              {"p", c.p},
              {"test_size", c.test_size},
              {"reps", c.reps},
              {"seed", c.seed},
              {"lambda1_grid", c.lambda1_grid},
              {"n_lambda1", c.n_lambda1},
              {"lambda1_min_ratio", c.lambda1_min_ratio},
              {"kappa_grid", c.kappa_grid},
              {"n_lambda", c.n_lambda},
              {"lambda_min_ratio", c.lambda_min_ratio},
              {"mixing_grid", c.mixing_grid},
              {"n_mu", c.n_mu},
              {"mu_min_ratio", c.mu_min_ratio},
              {"nu", c.nu},
              {"n_folds", c.n_folds},
              {"q_upper", c.q_upper},
              {"q_lower", c.q_lower},
              {"cv_criterion", c.cv_criterion},
              {"real_folds", c.real_folds},
              {"real_resamples", c.real_resamples},
              {"real_replications", c.real_replications},
              {"out", c.out},
              {"threads", c.threads},
              {"max_failure_fraction", c.max_failure_fraction},
              {"svg", c.svg},
              {"model", optional_json(c.model)},
              {"test_data", optional_json(c.test_data)},
              {"truth", optional_json(c.truth)}};
}

ExperimentConfig config_from_json(const Json& j, ExperimentConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "scenario") read_optional(v, c.scenario);
      else if (key == "real_data") read_optional(v, c.real_data);
      else if (key == "surrogate_col") c.surrogate_col = v.get<std::string>();
      else if (key == "label_col") read_optional(v, c.label_col);
      else if (key == "utilization_col") read_optional(v, c.utilization_col);
      else if (key == "log1p_columns") c.log1p_columns = v.get<std::vector<std::string>>();
      else if (key == "log1p_surrogate") c.log1p_surrogate = v.get<bool>();
      else if (key == "orthogonalize") c.orthogonalize = v.get<bool>();
      else if (key == "orthogonalize_surrogate") c.orthogonalize_surrogate = v.get<bool>();
      else if (key == "standardize") c.standardize = v.get<bool>();
      else if (key == "raw_scale") c.raw_scale = v.get<bool>();
      else if (key == "methods") c.methods = v.get<std::vector<std::string>>();
      else if (key == "n") c.n = v.get<Index>();
      else if (key == "N") c.N = v.get<Index>();
      else if (key == "p") c.p = v.get<Index>();
      else if (key == "test_size") c.test_size = v.get<Index>();
      else if (key == "reps") c.reps = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "lambda1_grid") c.lambda1_grid = v.get<std::vector<double>>();
      else if (key == "n_lambda1") c.n_lambda1 = v.get<int>();
      else if (key == "lambda1_min_ratio") c.lambda1_min_ratio = v.get<double>();
      else if (key == "kappa_grid") c.kappa_grid = v.get<std::vector<double>>();
      else if (key == "n_lambda") c.n_lambda = v.get<int>();
      else if (key == "lambda_min_ratio") c.lambda_min_ratio = v.get<double>();
      else if (key == "mixing_grid") c.mixing_grid = v.get<std::vector<double>>();
      else if (key == "n_mu") c.n_mu = v.get<int>();
      else if (key == "mu_min_ratio") c.mu_min_ratio = v.get<double>();
      else if (key == "nu") c.nu = v.get<double>();
      else if (key == "n_folds") c.n_folds = v.get<int>();
      else if (key == "q_upper") c.q_upper = v.get<double>();
      else if (key == "q_lower") c.q_lower = v.get<double>();
      else if (key == "cv_criterion") c.cv_criterion = v.get<std::string>();
      else if (key == "real_folds") c.real_folds = v.get<int>();
      else if (key == "real_resamples") c.real_resamples = v.get<int>();
      else if (key == "real_replications") c.real_replications = v.get<int>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "threads") c.threads = v.get<int>();
      else if (key == "max_failure_fraction") c.max_failure_fraction = v.get<double>();
      else if (key == "svg") c.svg = v.get<bool>();
      else if (key == "model") read_optional(v, c.model);
      else if (key == "test_data") read_optional(v, c.test_data);
      else if (key == "truth") read_optional(v, c.truth);
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  Json j = to_json(cfg);
  // Neither parallelism nor the output location changes results.
  j.erase("threads");
  j.erase("out");
  return fnv1a(j.dump());
}

MethodName parse_method_name(const std::string& name) {
  const std::string prefix = "lasso_";
  if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size()) {
    const std::string digits = name.substr(prefix.size());
    if (std::all_of(digits.begin(), digits.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
      const Index k = std::stoll(digits);
      if (k < 1) throw ConfigError("label size in '" + name + "' must be positive");
      return {MethodTag::kLasso, k, name};
    }
  }
  return {parse_method(name), std::nullopt, name};
}

bool method_needs_alpha(MethodTag tag) {
  return tag == MethodTag::kSsPrior || tag == MethodTag::kPlasso1 ||
         tag == MethodTag::kPlasso2 || tag == MethodTag::kPass;
}

bool method_needs_unlabeled(MethodTag tag) {
  return method_needs_alpha(tag) || tag == MethodTag::kUlasso || tag == MethodTag::kSsUlasso;
}

Dataset apply_preprocessing(const Dataset& raw, const ExperimentConfig& cfg) {
  Dataset ds = raw;
  if (!cfg.log1p_columns.empty() || cfg.log1p_surrogate) {
    std::vector<Index> cols;
    const bool all = std::find(cfg.log1p_columns.begin(), cfg.log1p_columns.end(), "*") !=
                     cfg.log1p_columns.end();
    for (Index j = 0; j < ds.p(); ++j) {
      const auto& name = ds.column_names[static_cast<size_t>(j)];
      if (all || std::find(cfg.log1p_columns.begin(), cfg.log1p_columns.end(), name) !=
                     cfg.log1p_columns.end()) {
        cols.push_back(j);
      }
    }
    ds = log1p_counts(ds, cols, cfg.log1p_surrogate);
  }
  if (cfg.orthogonalize) ds = orthogonalize_against_utilization(ds, cfg.orthogonalize_surrogate);
  if (cfg.standardize) ds = standardize(ds);
  return ds;
}

Dataset prepare_real_data(const ExperimentConfig& cfg) {
  if (!cfg.real_data) throw ConfigError("no real_data path configured");
  CsvSchema schema{cfg.surrogate_col, cfg.label_col, cfg.utilization_col};
  return apply_preprocessing(load_csv(*cfg.real_data, schema), cfg);
}

UnlabeledStage fit_unlabeled_stage(const Dataset& train, const std::vector<MethodName>& methods,
                                   const ExperimentConfig& cfg, std::uint64_t cv_seed) {
  UnlabeledStage stage;
  bool need_alpha = false;
  bool need_ulasso = false;
  for (const auto& m : methods) {
    need_alpha = need_alpha || method_needs_alpha(m.tag);
    need_ulasso = need_ulasso || m.tag == MethodTag::kUlasso || m.tag == MethodTag::kSsUlasso;
  }
  const Dataset unlabeled = strip_labels(train);
  if (need_alpha) stage.alpha = fit_alpha(unlabeled, cfg.alpha_options());
  if (need_ulasso) stage.ulasso = fit_ulasso(unlabeled, cfg.baseline_options(cv_seed));
  return stage;
}

Coefficients fit_method(const MethodName& method, const Dataset& train,
                        const UnlabeledStage& stage, const ExperimentConfig& cfg,
                        std::uint64_t cv_seed, PassFit* pass_out) {
  if (method_needs_unlabeled(method.tag) && train.n_obs() <= train.n_labeled()) {
    throw DataError("method '" + method.text + "' needs unlabeled rows");
  }
  const LabeledData data = train.labeled();
  const BaselineOptions bopt = cfg.baseline_options(cv_seed);
  auto alpha = [&]() -> const AlphaFit& {
    if (!stage.alpha) throw DataError("surrogate stage was not fitted");
    return *stage.alpha;
  };
  switch (method.tag) {
    case MethodTag::kLasso: return fit_lasso_supervised(data, bopt);
    case MethodTag::kAlasso: return fit_alasso_supervised(data, bopt);
    case MethodTag::kSsPrior: return fit_ss_prior(data, alpha(), bopt);
    case MethodTag::kPlasso1: return fit_plasso(data, alpha(), 1, bopt);
    case MethodTag::kPlasso2: return fit_plasso(data, alpha(), 2, bopt);
    case MethodTag::kUlasso:
      if (!stage.ulasso) throw DataError("ULASSO stage was not fitted");
      return *stage.ulasso;
    case MethodTag::kSsUlasso:
      if (!stage.ulasso) throw DataError("ULASSO stage was not fitted");
      return fit_ss_ulasso(data, stage.ulasso->beta, bopt);
    case MethodTag::kPass: {
      PassFit fit = tune_pass(data, alpha(), cfg.pass_tuning(cv_seed));
      Coefficients c = fit.coefficients();
      if (pass_out != nullptr) *pass_out = std::move(fit);
      return c;
    }
  }
  throw ConfigError("unhandled method");
}

std::string fold_hash(const Vector& labels, int n_folds, std::uint64_t seed) {
  const FoldAssignment fa = make_folds(labels, n_folds, seed);
  std::string bytes;
  for (int f : fa.fold) bytes += std::to_string(f) + ",";
  return hex64(fnv1a(bytes));
}

namespace {

ReplicateOutcome run_simulation_replicate(const ExperimentConfig& cfg,
                                          const std::vector<MethodName>& methods, int r) {
  ReplicateOutcome rep;
  rep.replicate = r;
  rep.seed = cfg.seed + static_cast<std::uint64_t>(r);
  Index labels_needed = cfg.n;
  for (const auto& m : methods) {
    if (m.labels) labels_needed = std::max(labels_needed, *m.labels);
  }
  try {
    const Simulation sim = generate(cfg.scenario_spec(rep.seed, std::min(labels_needed, cfg.N)));
    Dataset train = sim.train;
    Dataset test = sim.test;
    if (!cfg.log1p_columns.empty() || cfg.log1p_surrogate || cfg.orthogonalize || cfg.standardize) {
      train = apply_preprocessing(train, cfg);
      test = replay(train.log, sim.test);
    }
    const UnlabeledStage stage = fit_unlabeled_stage(train, methods, cfg, rep.seed);
    for (const auto& m : methods) {
      const Index n_m = m.labels.value_or(cfg.n);
      try {
        const Dataset train_m = train.with_first_labels(n_m);
        const Coefficients coef = fit_method(m, train_m, stage, cfg, rep.seed);
        const MetricsReport report = evaluate(coef, test, &sim.truth);
        add_metric_rows(rep, m.text, report, n_m, cfg.N, cfg.p, *cfg.scenario);
        if (uses_cv(m.tag)) {
          rep.fold_hashes.emplace_back(m.text, fold_hash(train_m.labels, cfg.n_folds, rep.seed));
        }
      } catch (const std::exception& e) {
        rep.failures.push_back(m.text + ": " + e.what());
      }
    }
  } catch (const std::exception& e) {
    rep.failures.push_back(std::string("replicate: ") + e.what());
  }
  return rep;
}

struct RealDataPlan {
  Dataset data;
  UnlabeledStage stage;
  std::vector<FoldAssignment> outer_folds;  // one per replication
};

ReplicateOutcome run_real_replicate(const ExperimentConfig& cfg,
                                    const std::vector<MethodName>& methods,
                                    const RealDataPlan& plan, int index) {
  ReplicateOutcome rep;
  rep.replicate = index;
  rep.seed = cfg.seed + static_cast<std::uint64_t>(index);
  const int per_rep = cfg.real_folds * cfg.real_resamples;
  const int replication = (index - 1) / per_rep;
  const int fold = ((index - 1) % per_rep) / cfg.real_resamples;
  try {
    const FoldAssignment& fa = plan.outer_folds[static_cast<size_t>(replication)];
    const std::vector<Index> held = fa.test_rows(fold);
    const std::vector<Index> pool = fa.train_rows(fold);
    std::vector<Index> validation_rows;
    for (Index k : held) validation_rows.push_back(plan.data.labeled_index[static_cast<size_t>(k)]);
    const Dataset validation = plan.data.subset_rows(validation_rows);

    for (const auto& m : methods) {
      const Index n_m = m.labels.value_or(cfg.n);
      try {
        if (n_m > static_cast<Index>(pool.size())) {
          throw DataError("label size exceeds the labeled training pool");
        }
        // Partial Fisher-Yates draw of n_m labeled rows from the pool; the
        // stream depends only on the replicate so methods share draws.
        std::vector<Index> draw = pool;
        Rng rng(derive_seed(rep.seed, 0x5A3D));
        for (Index k = 0; k < n_m; ++k) {
          const auto j = static_cast<size_t>(k) + static_cast<size_t>(rng.below(draw.size() - static_cast<size_t>(k)));
          std::swap(draw[static_cast<size_t>(k)], draw[j]);
        }
        draw.resize(static_cast<size_t>(n_m));
        std::vector<std::pair<Index, double>> chosen;
        for (Index k : draw) {
          chosen.emplace_back(plan.data.labeled_index[static_cast<size_t>(k)], plan.data.labels[k]);
        }
        std::sort(chosen.begin(), chosen.end());
        Dataset train = plan.data;
        train.labeled_index.clear();
        train.labels.resize(n_m);
        for (size_t k = 0; k < chosen.size(); ++k) {
          train.labeled_index.push_back(chosen[k].first);
          train.labels[static_cast<Index>(k)] = chosen[k].second;
        }
        const Coefficients coef = fit_method(m, train, plan.stage, cfg, rep.seed);
        const MetricsReport report = evaluate(coef, validation, nullptr, true);
        add_metric_rows(rep, m.text, report, n_m, plan.data.n_obs(), plan.data.p(), "real");
        if (uses_cv(m.tag)) {
          rep.fold_hashes.emplace_back(m.text, fold_hash(train.labels, cfg.n_folds, rep.seed));
        }
      } catch (const std::exception& e) {
        rep.failures.push_back(m.text + ": " + e.what());
      }
    }
  } catch (const std::exception& e) {
    rep.failures.push_back(std::string("replicate: ") + e.what());
  }
  return rep;
}

template <typename Fn>
std::vector<ReplicateOutcome> run_pool(int total, int threads, Fn&& fn) {
  std::vector<ReplicateOutcome> out(static_cast<size_t>(total));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= total) break;
      out[static_cast<size_t>(i)] = fn(i + 1);
    }
  };
  const int n_workers = std::max(1, std::min(threads, total));
  if (n_workers == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace

BenchResult run_bench(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto methods = parse_methods(cfg.methods);
  BenchResult result;
  if (cfg.simulation_mode()) {
    result.replicates = run_pool(cfg.reps, cfg.threads, [&](int r) {
      return run_simulation_replicate(cfg, methods, r);
    });
  } else if (cfg.real_data) {
    RealDataPlan plan;
    plan.data = prepare_real_data(cfg);
    if (plan.data.n_labeled() < cfg.real_folds) throw DataError("too few labeled rows for folds");
    plan.stage = fit_unlabeled_stage(plan.data, methods, cfg, cfg.seed);
    for (int r = 0; r < cfg.real_replications; ++r) {
      plan.outer_folds.push_back(
          make_folds(plan.data.labels, cfg.real_folds, derive_seed(cfg.seed, 0xB00 + r)));
    }
    const int total = cfg.real_replications * cfg.real_folds * cfg.real_resamples;
    result.replicates = run_pool(total, cfg.threads, [&](int i) {
      return run_real_replicate(cfg, methods, plan, i);
    });
  } else {
    throw ConfigError("bench needs a scenario or real_data");
  }
  for (const auto& r : result.replicates) {
    if (!r.failures.empty()) ++result.failed_replicates;
  }
  return result;
}

std::vector<ResultRow> BenchResult::rows() const {
  std::vector<ResultRow> all;
  for (const auto& r : replicates) all.insert(all.end(), r.rows.begin(), r.rows.end());
  return all;
}

std::string BenchResult::results_csv() const {
  std::string out = "replicate,method,metric,value,n,N,p,scenario,seed\n";
  for (const auto& row : rows()) {
    out += std::to_string(row.replicate) + "," + row.method + "," + row.metric + "," +
           format_double(row.value) + "," + std::to_string(row.n) + "," +
           std::to_string(row.N) + "," + std::to_string(row.p) + "," + row.scenario + "," +
           std::to_string(row.seed) + "\n";
  }
  return out;
}

bool BenchResult::over_failure_threshold(double fraction) const {
  if (replicates.empty()) return false;
  return static_cast<double>(failed_replicates) >
         fraction * static_cast<double>(replicates.size());
}

Json BenchResult::summary(const ExperimentConfig& cfg) const {
  // (method, metric) in order of first appearance.
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<MetricsReport>> grouped;
  std::map<std::pair<std::string, std::string>, std::vector<double>> values;
  for (const auto& row : rows()) {
    const auto key = std::make_pair(row.method, row.metric);
    if (!values.count(key)) keys.push_back(key);
    values[key].push_back(row.value);
  }
  Json table = Json::array();
  for (const auto& key : keys) {
    const auto& v = values[key];
    std::vector<MetricsReport> reports;
    for (double x : v) {
      MetricsReport m;
      m.auc = x;  // single-slot carrier for the aggregation arithmetic
      reports.push_back(m);
    }
    const AggregateReport agg = aggregate_replicates(reports);
    const MetricSummary& s = agg.metrics.at("auc");
    table.push_back({{"method", key.first},
                     {"metric", key.second},
                     {"mean", s.mean},
                     {"se", s.se_defined ? Json(s.se) : Json(nullptr)},
                     {"count", v.size()}});
  }
  Json failures = Json::array();
  Json folds = Json::array();
  bool paired = true;
  for (const auto& r : replicates) {
    for (const auto& f : r.failures) failures.push_back({{"replicate", r.replicate}, {"error", f}});
    Json per = Json::object();
    std::map<std::string, std::string> by_n;
    for (const auto& [method, hash] : r.fold_hashes) {
      per[method] = hash;
      const auto mn = parse_method_name(method);
      const std::string n_key = std::to_string(mn.labels.value_or(cfg.n));
      const auto [it, inserted] = by_n.emplace(n_key, hash);
      if (!inserted && it->second != hash) paired = false;
    }
    folds.push_back({{"replicate", r.replicate}, {"seed", r.seed}, {"fold_hashes", per}});
  }
  return Json{{"config_hash", hex64(config_hash(cfg))},
              {"replicates", replicates.size()},
              {"failed_replicates", failed_replicates},
              {"paired_folds", paired},
              {"aggregates", table},
              {"failures", failures},
              {"folds", folds}};
}

std::string boxplot_svg(const std::string& title,
                        const std::vector<std::pair<std::string, std::vector<double>>>& groups) {
  const double width = 120.0 + 90.0 * static_cast<double>(groups.size());
  const double height = 360.0;
  const double top = 40.0;
  const double bottom = 300.0;
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto& [name, v] : groups) {
    for (double x : v) {
      if (std::isfinite(x)) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi == lo) {
    hi += 0.5;
    lo -= 0.5;
  }
  auto ypos = [&](double v) { return bottom - (v - lo) / (hi - lo) * (bottom - top); };
  auto fmt = [](double v) { return format_double(std::round(v * 1000.0) / 1000.0); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) +
                    "\" height=\"" + fmt(height) + "\">\n";
  svg += "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    svg += "<text x=\"5\" y=\"" + fmt(ypos(v) + 4) + "\" font-family=\"sans-serif\" font-size=\"10\">" +
           fmt(v) + "</text>\n";
    svg += "<line x1=\"60\" x2=\"" + fmt(width - 10) + "\" y1=\"" + fmt(ypos(v)) + "\" y2=\"" +
           fmt(ypos(v)) + "\" stroke=\"#ddd\"/>\n";
  }
  double x = 80.0;
  for (const auto& [name, raw] : groups) {
    std::vector<double> v;
    for (double d : raw) {
      if (std::isfinite(d)) v.push_back(d);
    }
    if (!v.empty()) {
      Vector vv = Eigen::Map<Vector>(v.data(), static_cast<Index>(v.size()));
      const double q1 = empirical_quantile(vv, 0.25);
      const double q2 = empirical_quantile(vv, 0.5);
      const double q3 = empirical_quantile(vv, 0.75);
      const double iqr = q3 - q1;
      double wlo = q1;
      double whi = q3;
      for (double d : v) {
        if (d >= q1 - 1.5 * iqr) wlo = std::min(wlo, d);
        if (d <= q3 + 1.5 * iqr) whi = std::max(whi, d);
      }
      double mean = 0.0;
      for (double d : v) mean += d;
      mean /= static_cast<double>(v.size());
      const double cx = x + 30.0;
      svg += "<line x1=\"" + fmt(cx) + "\" x2=\"" + fmt(cx) + "\" y1=\"" + fmt(ypos(whi)) +
             "\" y2=\"" + fmt(ypos(wlo)) + "\" stroke=\"black\"/>\n";
      svg += "<rect x=\"" + fmt(x + 10) + "\" y=\"" + fmt(ypos(q3)) + "\" width=\"40\" height=\"" +
             fmt(std::max(ypos(q1) - ypos(q3), 0.5)) +
             "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
      svg += "<line x1=\"" + fmt(x + 10) + "\" x2=\"" + fmt(x + 50) + "\" y1=\"" + fmt(ypos(q2)) +
             "\" y2=\"" + fmt(ypos(q2)) + "\" stroke=\"black\" stroke-width=\"2\"/>\n";
      svg += "<circle cx=\"" + fmt(cx) + "\" cy=\"" + fmt(ypos(mean)) +
             "\" r=\"2.5\" fill=\"red\"/>\n";
    }
    svg += "<text x=\"" + fmt(x + 30) + "\" y=\"" + fmt(bottom + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + name +
           "</text>\n";
    x += 90.0;
  }
  svg += "</svg>\n";
  return svg;
}

void write_bench_outputs(const BenchResult& result, const ExperimentConfig& cfg) {
  ensure_dir(cfg.out);
  const std::string csv = result.results_csv();
  const std::string summary = result.summary(cfg).dump(2) + "\n";
  const std::string config = to_json(cfg).dump(2) + "\n";
  write_text_file(csv, join(cfg.out, "results.csv"));
  write_text_file(summary, join(cfg.out, "summary.json"));
  write_text_file(config, join(cfg.out, "config.json"));
  std::vector<std::pair<std::string, std::string>> files{
      {"results.csv", csv}, {"summary.json", summary}, {"config.json", config}};
  if (cfg.svg) {
    std::vector<std::string> metrics;
    std::vector<std::string> method_order;
    for (const auto& row : result.rows()) {
      if (std::find(metrics.begin(), metrics.end(), row.metric) == metrics.end()) {
        metrics.push_back(row.metric);
      }
      if (std::find(method_order.begin(), method_order.end(), row.method) == method_order.end()) {
        method_order.push_back(row.method);
      }
    }
    for (const auto& metric : metrics) {
      std::vector<std::pair<std::string, std::vector<double>>> groups;
      for (const auto& method : method_order) {
        std::vector<double> v;
        for (const auto& row : result.rows()) {
          if (row.metric == metric && row.method == method) v.push_back(row.value);
        }
        groups.emplace_back(method, std::move(v));
      }
      const std::string name = "boxplot_" + metric + ".svg";
      const std::string body = boxplot_svg(metric, groups);
      write_text_file(body, join(cfg.out, name));
      files.emplace_back(name, body);
    }
  }
  write_json_file(manifest("bench", cfg, files), join(cfg.out, "manifest.json"));
}

SimulateOutcome cmd_simulate(const ExperimentConfig& cfg) {
  if (!cfg.scenario) throw ConfigError("simulate needs --scenario");
  cfg.validate();
  const Simulation sim = generate(cfg.scenario_spec(cfg.seed, cfg.n));
  ensure_dir(cfg.out);
  const std::string train = to_csv(sim.train);
  const std::string test = to_csv(sim.test);
  const std::string truth = to_json(sim.truth).dump(2) + "\n";
  write_text_file(train, join(cfg.out, "train.csv"));
  write_text_file(test, join(cfg.out, "test.csv"));
  write_text_file(truth, join(cfg.out, "truth.json"));
  write_json_file(manifest("simulate", cfg,
                           {{"train.csv", train}, {"test.csv", test}, {"truth.json", truth}}),
                  join(cfg.out, "manifest.json"));
  SimulateOutcome out;
  for (const char* f : {"train.csv", "test.csv", "truth.json", "manifest.json"}) {
    out.files.push_back(join(cfg.out, f));
  }
  return out;
}

FitOutcome cmd_fit(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.methods.size() != 1) throw ConfigError("fit needs exactly one --method");
  const MethodName method = parse_method_name(cfg.methods.front());
  Dataset train;
  if (cfg.real_data) {
    train = prepare_real_data(cfg);
  } else if (cfg.scenario) {
    train = apply_preprocessing(generate(cfg.scenario_spec(cfg.seed, cfg.n)).train, cfg);
  } else {
    throw ConfigError("fit needs --real-data or --scenario");
  }
  if (method.labels) train = train.with_first_labels(*method.labels);
  if (method_needs_unlabeled(method.tag) && train.n_obs() <= train.n_labeled()) {
    throw DataError("method '" + method.text + "' needs unlabeled rows (N > n)");
  }

  ensure_dir(cfg.out);
  FitOutcome out;
  UnlabeledStage stage;
  if (method_needs_alpha(method.tag)) {
    const AlphaOptions aopt = cfg.alpha_options();
    std::string key = to_csv(strip_labels(train));
    key += "|" + std::to_string(aopt.n_mu) + "|" + format_double(aopt.mu_min_ratio) + "|" +
           format_double(aopt.nu);
    const std::string cache_dir = join(cfg.out, "cache");
    ensure_dir(cache_dir);
    const std::string cache_path = join(cache_dir, "alpha-" + hex64(fnv1a(key)) + ".json");
    if (fs::exists(cache_path)) {
      stage.alpha = alpha_fit_from_json(read_json_file(cache_path));
      out.alpha_cache_hit = true;
    } else {
      stage.alpha = fit_alpha(strip_labels(train), aopt);
      write_json_file(to_json(*stage.alpha), cache_path);
    }
  }
  if (method.tag == MethodTag::kUlasso || method.tag == MethodTag::kSsUlasso) {
    stage.ulasso = fit_ulasso(strip_labels(train), cfg.baseline_options(cfg.seed));
  }

  PassFit pass_fit;
  const Coefficients coef = fit_method(method, train, stage, cfg, cfg.seed, &pass_fit);
  Json model = method.tag == MethodTag::kPass ? to_json(pass_fit) : to_json(coef);
  model["method_name"] = method.text;
  TransformLog log = train.log;
  if (cfg.standardize && !cfg.raw_scale) {
    unstandardize_model(train.log, model);
    log = without_last_standardize(train.log);
  }
  model["transform_log"] = to_json(log);
  model["feature_names"] = train.column_names;
  model["alpha_cache_hit"] = out.alpha_cache_hit;
  out.model = model;
  out.model_path = join(cfg.out, "model.json");
  const std::string body = model.dump(2) + "\n";
  const std::string config = to_json(cfg).dump(2) + "\n";
  write_text_file(body, out.model_path);
  write_text_file(config, join(cfg.out, "config.json"));
  write_json_file(manifest("fit", cfg, {{"model.json", body}, {"config.json", config}}),
                  join(cfg.out, "manifest.json"));
  return out;
}

EvaluateOutcome cmd_evaluate(const ExperimentConfig& cfg) {
  if (!cfg.model) throw ConfigError("evaluate needs --model");
  if (!cfg.test_data) throw ConfigError("evaluate needs --test");
  const Json model = read_json_file(*cfg.model);
  const Coefficients coef = coefficients_from_json(model);
  CsvSchema schema{cfg.surrogate_col, cfg.label_col, cfg.utilization_col};
  Dataset test = load_csv(*cfg.test_data, schema);
  if (model.contains("transform_log")) {
    test = replay(transform_log_from_json(model.at("transform_log")), test);
  }
  std::optional<TruthOracle> truth;
  if (cfg.truth) truth = truth_from_json(read_json_file(*cfg.truth));
  bool both_classes = false;
  if (test.n_labeled() > 0) {
    const double s = test.labels.sum();
    both_classes = s > 0.0 && s < static_cast<double>(test.n_labeled());
  }
  EvaluateOutcome out;
  out.report = evaluate(coef, test, truth ? &*truth : nullptr, both_classes);
  ensure_dir(cfg.out);
  out.path = join(cfg.out, "metrics.json");
  Json j = to_json(out.report);
  j["method"] = to_string(coef.method);
  j["truth"] = truth ? (truth->exact ? "exact" : "approximate") : "none";
  write_json_file(j, out.path);
  return out;
}

}  // namespace pass
