#include "pass/simgen.hpp"

#include "pass/solver.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace pass {
namespace {

constexpr std::array<double, 5> kA1{0.5, 1.0, -0.8, 0.6, 0.2};
constexpr std::array<double, 5> kD1{-0.05, -0.5, 1.4, 0.5, -0.6};
constexpr std::array<double, 5> kA2{0.1, -0.2, -0.2, 0.2, 0.7};
constexpr std::array<double, 5> kD2{0.02, 0.05, 0.02, -0.02, -0.05};
constexpr std::array<double, 5> kA3{0.6, -0.4, 0.4, 0.5, -0.5};
constexpr std::array<double, 5> kD3{0.3, 0.4, 0.6, -0.5, -0.5};
constexpr std::array<double, 5> kBetaY{0.8, 1.0, -1.0, 0.8, 0.4};

constexpr double kZeta0 = -4.0;
constexpr double kGamma0 = 0.5;
constexpr double kSurrogateNoiseSd = 2.0;
constexpr Index kMisBlock = 20;

using Block = std::array<double, 5>;

// Writes `block` (optionally scaled and offset by `add`) at position `at`.
void put(Vector& v, Index at, const Block& block, double scale = 1.0,
         const Block* add = nullptr) {
  for (Index k = 0; k < 5; ++k) {
    const double extra = add ? (*add)[static_cast<size_t>(k)] : 0.0;
    v[at + k] = scale * (block[static_cast<size_t>(k)] + extra);
  }
}

Dataset make_dataset(Matrix X, Vector S, Index n_labeled, const Vector& Y) {
  Dataset ds;
  ds.features = std::move(X);
  ds.surrogate = std::move(S);
  ds.labeled_index.resize(static_cast<size_t>(n_labeled));
  for (Index i = 0; i < n_labeled; ++i) ds.labeled_index[static_cast<size_t>(i)] = i;
  ds.labels = Y.head(n_labeled);
  ds.column_names.reserve(static_cast<size_t>(ds.features.cols()));
  for (Index j = 0; j < ds.features.cols(); ++j) {
    ds.column_names.push_back("x" + std::to_string(j + 1));
  }
  return ds;
}

struct MainDraw {
  Matrix X;
  Vector S;
  Vector Y;
};

MainDraw draw_main(const MainConstants& c, const Matrix& chol, Index rows, Rng& rng) {
  MainDraw d;
  d.X = sample_gaussian_rows(chol, rows, rng).unaryExpr(&count_transform);
  d.S.resize(rows);
  d.Y.resize(rows);
  const Vector score_s = d.X * c.alpha0;
  const Vector score_y = d.X * c.beta0;
  for (Index i = 0; i < rows; ++i) {
    const double eps = kSurrogateNoiseSd * rng.normal();
    d.S[i] = count_transform(1.0 + score_s[i] + eps);
    const double eta = kZeta0 + kGamma0 * d.S[i] + score_y[i];
    d.Y[i] = rng.uniform() < sigmoid(eta) ? 1.0 : 0.0;
  }
  return d;
}

MainDraw draw_mis(const MisConstants& c, const Matrix& chol, Index rows, Rng& rng) {
  MainDraw d;
  d.X = sample_gaussian_rows(chol, rows, rng).unaryExpr([](double z) {
    return 2.0 * normal_cdf(z) - 1.0;
  });
  d.S.resize(rows);
  d.Y.resize(rows);
  const Vector latent = d.X * c.beta_y;
  const Vector s1 = d.X * c.eta1;
  const Vector s2 = d.X * c.eta2;
  for (Index i = 0; i < rows; ++i) {
    const double y = (latent[i] + rng.normal() >= 0.0) ? 1.0 : 0.0;
    d.Y[i] = y;
    d.S[i] = c.mu * y + s1[i] + y * s2[i] + rng.normal();
  }
  return d;
}

Matrix cholesky_lower(const Matrix& sigma) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw SolverError("covariance is not positive definite");
  return llt.matrixL();
}

}  // namespace

std::string to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::I: return "I";
    case ScenarioId::II: return "II";
    case ScenarioId::III: return "III";
    case ScenarioId::IV: return "IV";
    case ScenarioId::V: return "V";
    case ScenarioId::VI: return "VI";
    case ScenarioId::i: return "i";
    case ScenarioId::ii: return "ii";
    case ScenarioId::iii: return "iii";
  }
  return "?";
}

ScenarioId parse_scenario(const std::string& name) {
  static const std::map<std::string, ScenarioId> table{
      {"I", ScenarioId::I},   {"II", ScenarioId::II}, {"III", ScenarioId::III},
      {"IV", ScenarioId::IV}, {"V", ScenarioId::V},   {"VI", ScenarioId::VI},
      {"i", ScenarioId::i},   {"ii", ScenarioId::ii}, {"iii", ScenarioId::iii}};
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown scenario '" + name + "'");
  return it->second;
}

bool is_main_scenario(ScenarioId id) {
  return id != ScenarioId::i && id != ScenarioId::ii && id != ScenarioId::iii;
}

Index min_dimension(ScenarioId id) {
  switch (id) {
    case ScenarioId::III: return 20;
    case ScenarioId::VI: return 15;
    case ScenarioId::i:
    case ScenarioId::ii:
    case ScenarioId::iii: return kMisBlock;
    default: return 10;
  }
}

void ScenarioSpec::validate() const {
  if (p < min_dimension(id)) {
    throw ConfigError("scenario " + to_string(id) + " needs p >= " +
                      std::to_string(min_dimension(id)) + " (got " + std::to_string(p) + ")");
  }
  if (n < 0 || N < 1 || n > N) throw ConfigError("need 0 <= n <= N and N >= 1");
  if (test_size < 0) throw ConfigError("test_size must be nonnegative");
}

MainConstants main_constants(ScenarioId id, Index p) {
  if (!is_main_scenario(id)) throw ConfigError("not a main scenario");
  if (p < min_dimension(id)) throw ConfigError("p below scenario minimum");
  MainConstants c{Vector::Zero(p), Vector::Zero(p)};
  switch (id) {
    case ScenarioId::I:
      put(c.alpha0, 0, kA1);
      put(c.alpha0, 5, kA2);
      put(c.beta0, 0, kA1, 1.5);
      put(c.beta0, 5, kA2, 1.5);
      break;
    case ScenarioId::II:
      put(c.alpha0, 0, kA1);
      put(c.alpha0, 5, kA2);
      put(c.beta0, 0, kA1, 1.5, &kD1);
      put(c.beta0, 5, kA2, 1.5, &kD2);
      break;
    case ScenarioId::III:
      put(c.alpha0, 0, kA1);
      put(c.alpha0, 5, kA2);
      put(c.alpha0, 10, kA2);
      put(c.alpha0, 15, kA2);
      put(c.beta0, 0, kA1, 1.5, &kD1);
      put(c.beta0, 5, kA2, 1.5, &kD2);
      break;
    case ScenarioId::IV:
      put(c.alpha0, 0, kA1);
      put(c.beta0, 0, kA1, 1.5, &kD1);
      put(c.beta0, 5, kA2, 1.5, &kD2);
      break;
    case ScenarioId::V:
      put(c.alpha0, 0, kA1);
      put(c.alpha0, 5, kA2);
      put(c.beta0, 0, kA2, 1.5);
      put(c.beta0, 5, kA1, 1.5);
      break;
    case ScenarioId::VI:
      put(c.alpha0, 0, kA1);
      put(c.alpha0, 5, kA2);
      put(c.beta0, 0, kA2, 1.5);
      put(c.beta0, 10, kA1, 1.5);
      break;
    default:
      break;
  }
  return c;
}

MisConstants mis_constants(ScenarioId id, Index p) {
  if (is_main_scenario(id)) throw ConfigError("not a misspecification scenario");
  if (p < kMisBlock) throw ConfigError("p below scenario minimum");
  MisConstants c;
  c.eta1 = Vector::Zero(p);
  c.eta2 = Vector::Zero(p);
  c.beta_y = Vector::Zero(p);
  put(c.beta_y, 0, kBetaY);
  switch (id) {
    case ScenarioId::i:
      c.mu = 1.0;
      break;
    case ScenarioId::ii:
      c.mu = 1.5;
      put(c.eta1, 0, kA3);
      put(c.eta2, 0, kD3);
      break;
    case ScenarioId::iii:
      c.mu = 2.0;
      for (Index k = 0; k < 3; ++k) {
        put(c.eta1, 5 * k, kA3);
        put(c.eta2, 5 * k, kD3);
      }
      break;
    default:
      break;
  }
  return c;
}

double count_transform(double t) {
  return std::log(1.0 + std::round(std::exp(t)));
}

Matrix covariance_main(Index p) {
  Matrix sigma(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      sigma(i, j) = 4.0 * std::pow(0.5, static_cast<double>(std::abs(i - j)));
    }
  }
  return sigma;
}

Matrix covariance_mis(Index p) {
  Matrix sigma = Matrix::Zero(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      const bool same_block = (i < kMisBlock) == (j < kMisBlock);
      if (i == j || same_block) {
        sigma(i, j) = std::pow(0.5, static_cast<double>(std::abs(i - j)));
      }
    }
  }
  return sigma;
}

Matrix sample_gaussian_rows(const Matrix& chol_lower, Index rows, Rng& rng) {
  const Index p = chol_lower.rows();
  Matrix w(rows, p);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < p; ++j) w(i, j) = rng.normal();
  }
  return w * chol_lower.transpose();
}

Simulation gen_main(const ScenarioSpec& spec) {
  spec.validate();
  if (!is_main_scenario(spec.id)) throw ConfigError("gen_main needs scenario I-VI");
  const MainConstants c = main_constants(spec.id, spec.p);
  const Matrix chol = cholesky_lower(covariance_main(spec.p));

  Rng train_rng(derive_seed(spec.seed, 1));
  Rng test_rng(derive_seed(spec.seed, 2));
  MainDraw train = draw_main(c, chol, spec.N, train_rng);
  MainDraw test = draw_main(c, chol, spec.test_size, test_rng);

  Simulation sim;
  sim.train = make_dataset(std::move(train.X), std::move(train.S), spec.n, train.Y);
  sim.test = make_dataset(std::move(test.X), std::move(test.S), spec.test_size, test.Y);
  sim.truth.id = spec.id;
  sim.truth.exact = true;
  sim.truth.zeta0 = kZeta0;
  sim.truth.gamma0 = kGamma0;
  sim.truth.alpha0 = c.alpha0;
  sim.truth.beta0 = c.beta0;
  return sim;
}

Simulation gen_mis(const ScenarioSpec& spec) {
  spec.validate();
  if (is_main_scenario(spec.id)) throw ConfigError("gen_mis needs scenario i-iii");
  const MisConstants c = mis_constants(spec.id, spec.p);
  const Matrix chol = cholesky_lower(covariance_mis(spec.p));

  Rng train_rng(derive_seed(spec.seed, 1));
  Rng test_rng(derive_seed(spec.seed, 2));
  MainDraw train = draw_mis(c, chol, spec.N, train_rng);
  MainDraw test = draw_mis(c, chol, spec.test_size, test_rng);

  Simulation sim;
  sim.train = make_dataset(std::move(train.X), std::move(train.S), spec.n, train.Y);
  sim.test = make_dataset(std::move(test.X), std::move(test.S), spec.test_size, test.Y);
  sim.truth = mis_truth(spec.id, spec.p);
  return sim;
}

Simulation generate(const ScenarioSpec& spec) {
  return is_main_scenario(spec.id) ? gen_main(spec) : gen_mis(spec);
}

TruthOracle mis_truth(ScenarioId id, Index p, std::uint64_t seed, Index sample_size) {
  static std::mutex mutex;
  static std::map<std::tuple<int, std::uint64_t, Index>, TruthOracle> cache;
  const auto key = std::make_tuple(static_cast<int>(id), seed, sample_size);

  TruthOracle base;
  {
    std::lock_guard<std::mutex> lock(mutex);
    const auto it = cache.find(key);
    if (it != cache.end()) base = it->second;
  }
  if (base.beta0.size() == 0) {
    // Only the first block carries signal and it is independent of the rest,
    // so the population fit can be restricted to (S, x_1..x_20).
    const MisConstants c = mis_constants(id, kMisBlock);
    const Matrix chol = cholesky_lower(covariance_mis(kMisBlock));
    Rng rng(derive_seed(seed, 99));
    const MainDraw d = draw_mis(c, chol, sample_size, rng);
    Matrix design(sample_size, kMisBlock + 1);
    design.col(0) = d.S;
    design.rightCols(kMisBlock) = d.X;
    const GlmFit fit = fit_logistic_newton(design, d.Y);
    base.id = id;
    base.exact = false;
    base.zeta0 = fit.intercept;
    base.gamma0 = fit.coefficients[0];
    base.beta0 = fit.coefficients.tail(kMisBlock);
    base.approximation_seed = seed;
    base.approximation_size = sample_size;
    std::lock_guard<std::mutex> lock(mutex);
    cache.emplace(key, base);
  }
  TruthOracle out = base;
  out.beta0 = Vector::Zero(p);
  out.beta0.head(kMisBlock) = base.beta0;
  out.mis = mis_constants(id, p);
  return out;
}

double TruthOracle::linear_predictor(double s, const Eigen::Ref<const Vector>& x) const {
  if (x.size() != beta0.size()) throw DataError("feature vector length does not match oracle");
  return zeta0 + gamma0 * s + x.dot(beta0);
}

double true_linear_predictor(const TruthOracle& oracle, double s,
                             const Eigen::Ref<const Vector>& x) {
  return oracle.linear_predictor(s, x);
}

}  // namespace pass
