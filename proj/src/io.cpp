#include "pass/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace pass {
namespace {

// JSON has no infinities; encode them as strings.
Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw DataError("expected a number in JSON");
}

Json index_list(const std::vector<Index>& v) {
  Json a = Json::array();
  for (Index i : v) a.push_back(i);
  return a;
}

std::vector<Index> index_list_from(const Json& j) {
  std::vector<Index> v;
  for (const auto& e : j) v.push_back(e.get<Index>());
  return v;
}

std::vector<double> doubles_from(const Json& j) {
  std::vector<double> v;
  for (const auto& e : j) v.push_back(number_from(e));
  return v;
}

Json doubles(const std::vector<double>& v) {
  Json a = Json::array();
  for (double d : v) a.push_back(number(d));
  return a;
}

}  // namespace

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw DataError("expected a JSON array");
  Vector v(static_cast<Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = number_from(j[i]);
  return v;
}

Json to_json(const GlmFit& fit) {
  return Json{{"intercept", number(fit.intercept)},
              {"coefficients", vector_to_json(fit.coefficients)},
              {"loss_value", number(fit.loss_value)},
              {"objective", number(fit.objective)},
              {"n_iterations", fit.n_iterations},
              {"converged", fit.converged},
              {"eta_clamped", fit.eta_clamped},
              {"kkt_max_violation", number(fit.kkt_max_violation)}};
}

Json to_json(const AlphaFit& fit) {
  return Json{{"alpha", vector_to_json(fit.alpha)},
              {"tau", number(fit.tau)},
              {"alpha_init", vector_to_json(fit.alpha_init)},
              {"tau_init", number(fit.tau_init)},
              {"support", index_list(fit.support)},
              {"mu_init", number(fit.mu_init)},
              {"mu", number(fit.mu)},
              {"bic_init", number(fit.bic_init)},
              {"bic", number(fit.bic)},
              {"nu", fit.nu},
              {"warnings", fit.warnings}};
}

AlphaFit alpha_fit_from_json(const Json& j) {
  AlphaFit f;
  f.alpha = vector_from_json(j.at("alpha"));
  f.tau = number_from(j.at("tau"));
  f.alpha_init = vector_from_json(j.at("alpha_init"));
  f.tau_init = number_from(j.at("tau_init"));
  f.support = index_list_from(j.at("support"));
  f.mu_init = number_from(j.at("mu_init"));
  f.mu = number_from(j.at("mu"));
  f.bic_init = number_from(j.at("bic_init"));
  f.bic = number_from(j.at("bic"));
  f.nu = j.value("nu", 1.0);
  f.warnings = j.value("warnings", std::vector<std::string>{});
  return f;
}

Json to_json(const PassFit& fit) {
  Json diag{{"degenerate", fit.degenerate},
            {"cv_score", number(fit.cv_score)},
            {"solver", to_json(fit.solver_fit)},
            {"support", index_list(fit.alpha_used.support)},
            {"warnings", fit.warnings}};
  return Json{{"method", "pass"},
              {"zeta", number(fit.zeta)},
              {"gamma", number(fit.gamma)},
              {"rho", number(fit.rho)},
              {"beta", vector_to_json(fit.beta)},
              {"delta", vector_to_json(fit.delta)},
              {"alpha", vector_to_json(fit.alpha_used.alpha)},
              {"lambda1", number(fit.lambda1)},
              {"kappa", number(fit.kappa)},
              {"diagnostics", diag}};
}

Json to_json(const Coefficients& coef) {
  Json j{{"method", to_string(coef.method)}, {"zeta", number(coef.zeta)}};
  j["gamma"] = coef.gamma ? number(*coef.gamma) : Json(nullptr);
  j["beta"] = vector_to_json(coef.beta);
  j["warnings"] = coef.warnings;
  return j;
}

Coefficients coefficients_from_json(const Json& j) {
  Coefficients c;
  c.method = parse_method(j.at("method").get<std::string>());
  c.zeta = number_from(j.at("zeta"));
  if (j.contains("gamma") && !j.at("gamma").is_null()) c.gamma = number_from(j.at("gamma"));
  c.beta = vector_from_json(j.at("beta"));
  if (j.contains("warnings")) c.warnings = j.at("warnings").get<std::vector<std::string>>();
  return c;
}

Json to_json(const TruthOracle& o) {
  Json j{{"scenario", to_string(o.id)},
         {"kind", o.exact ? "exact" : "approximate"},
         {"zeta0", number(o.zeta0)},
         {"gamma0", number(o.gamma0)},
         {"beta0", vector_to_json(o.beta0)}};
  if (is_main_scenario(o.id)) {
    j["alpha0"] = vector_to_json(o.alpha0);
  } else {
    j["mu"] = o.mis.mu;
    j["eta1"] = vector_to_json(o.mis.eta1);
    j["eta2"] = vector_to_json(o.mis.eta2);
    j["beta_y"] = vector_to_json(o.mis.beta_y);
    j["approximation_seed"] = o.approximation_seed;
    j["approximation_size"] = o.approximation_size;
  }
  return j;
}

TruthOracle truth_from_json(const Json& j) {
  TruthOracle o;
  o.id = parse_scenario(j.at("scenario").get<std::string>());
  o.exact = j.at("kind").get<std::string>() == "exact";
  o.zeta0 = number_from(j.at("zeta0"));
  o.gamma0 = number_from(j.at("gamma0"));
  o.beta0 = vector_from_json(j.at("beta0"));
  if (j.contains("alpha0")) o.alpha0 = vector_from_json(j.at("alpha0"));
  if (j.contains("mu")) {
    o.mis.mu = j.at("mu").get<double>();
    o.mis.eta1 = vector_from_json(j.at("eta1"));
    o.mis.eta2 = vector_from_json(j.at("eta2"));
    o.mis.beta_y = vector_from_json(j.at("beta_y"));
    o.approximation_seed = j.value("approximation_seed", std::uint64_t{0});
    o.approximation_size = j.value("approximation_size", Index{0});
  }
  return o;
}

Json to_json(const TransformLog& log) {
  Json steps = Json::array();
  for (const auto& step : log.steps) {
    if (const auto* s = std::get_if<Log1pStep>(&step)) {
      steps.push_back({{"type", "log1p"}, {"columns", index_list(s->columns)},
                       {"surrogate", s->surrogate}});
    } else if (const auto* s = std::get_if<OrthogonalizeStep>(&step)) {
      steps.push_back({{"type", "orthogonalize"},
                       {"utilization_col", s->utilization_col},
                       {"columns", index_list(s->columns)},
                       {"intercepts", doubles(s->intercepts)},
                       {"slopes", doubles(s->slopes)},
                       {"surrogate", s->surrogate},
                       {"surrogate_intercept", number(s->surrogate_intercept)},
                       {"surrogate_slope", number(s->surrogate_slope)}});
    } else if (const auto* s = std::get_if<StandardizeStep>(&step)) {
      steps.push_back({{"type", "standardize"},
                       {"columns", index_list(s->columns)},
                       {"means", doubles(s->means)},
                       {"scales", doubles(s->scales)}});
    }
  }
  return Json{{"steps", steps}};
}

TransformLog transform_log_from_json(const Json& j) {
  TransformLog log;
  for (const auto& s : j.at("steps")) {
    const auto type = s.at("type").get<std::string>();
    if (type == "log1p") {
      log.steps.emplace_back(Log1pStep{index_list_from(s.at("columns")), s.at("surrogate").get<bool>()});
    } else if (type == "orthogonalize") {
      OrthogonalizeStep o;
      o.utilization_col = s.at("utilization_col").get<Index>();
      o.columns = index_list_from(s.at("columns"));
      o.intercepts = doubles_from(s.at("intercepts"));
      o.slopes = doubles_from(s.at("slopes"));
      o.surrogate = s.at("surrogate").get<bool>();
      o.surrogate_intercept = number_from(s.at("surrogate_intercept"));
      o.surrogate_slope = number_from(s.at("surrogate_slope"));
      log.steps.emplace_back(std::move(o));
    } else if (type == "standardize") {
      log.steps.emplace_back(StandardizeStep{index_list_from(s.at("columns")),
                                             doubles_from(s.at("means")),
                                             doubles_from(s.at("scales"))});
    } else {
      throw DataError("unknown transform type '" + type + "'");
    }
  }
  return log;
}

Json to_json(const MetricsReport& report) {
  Json j = Json::object();
  for (const auto& [k, v] : report.values()) j[k] = number(v);
  j["n_eval"] = report.n_eval;
  return j;
}

Json to_json(const AggregateReport& report) {
  Json metrics = Json::object();
  for (const auto& [name, s] : report.metrics) {
    metrics[name] = {{"mean", number(s.mean)},
                     {"se", s.se_defined ? number(s.se) : Json(nullptr)},
                     {"values", doubles(s.values)}};
  }
  return Json{{"replicates", report.replicates}, {"metrics", metrics}};
}

Json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open JSON file '" + path + "'");
  try {
    return Json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid JSON in '" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& text, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write file '" + path + "'");
  f << text;
  if (!f) throw DataError("failed writing file '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

void write_json_file(const Json& j, const std::string& path) {
  write_text_file(j.dump(2) + "\n", path);
}

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace pass
