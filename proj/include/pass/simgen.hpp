#pragma once

#include "pass/common.hpp"
#include "pass/data.hpp"
#include "pass/rng.hpp"

#include <cstdint>
#include <string>

namespace pass {

// Scenarios I-VI share the skewed-count design; i-iii use the bounded,
// block-correlated design with a misspecified phenotype model.
enum class ScenarioId { I, II, III, IV, V, VI, i, ii, iii };

std::string to_string(ScenarioId id);
ScenarioId parse_scenario(const std::string& name);
bool is_main_scenario(ScenarioId id);
Index min_dimension(ScenarioId id);

struct ScenarioSpec {
  ScenarioId id = ScenarioId::I;
  Index n = 100;      // labeled rows (first n training rows)
  Index N = 2000;     // training rows
  Index p = 200;
  std::uint64_t seed = 1;
  Index test_size = 2000;

  void validate() const;
};

struct MainConstants {
  Vector alpha0;
  Vector beta0;
};

struct MisConstants {
  double mu = 0.0;
  Vector eta1;
  Vector eta2;
  Vector beta_y;  // latent-threshold coefficients generating Y
};

MainConstants main_constants(ScenarioId id, Index p);
MisConstants mis_constants(ScenarioId id, Index p);

// Truth used by ER and MSE-P. Exact for I-VI; for i-iii the coefficients are
// the best logistic approximation computed from a large sample.
struct TruthOracle {
  ScenarioId id = ScenarioId::I;
  bool exact = true;
  double zeta0 = 0.0;
  double gamma0 = 0.0;
  Vector beta0;
  Vector alpha0;        // I-VI only
  MisConstants mis;     // i-iii only
  std::uint64_t approximation_seed = 0;
  Index approximation_size = 0;

  double linear_predictor(double s, const Eigen::Ref<const Vector>& x) const;
  double probability(double s, const Eigen::Ref<const Vector>& x) const {
    return sigmoid(linear_predictor(s, x));
  }
};

struct Simulation {
  Dataset train;
  Dataset test;
  TruthOracle truth;
};

// h(t) = log(1 + [e^t]) with [.] rounding half away from zero.
double count_transform(double t);

Matrix covariance_main(Index p);
Matrix covariance_mis(Index p);

// Rows of N(0, Sigma) given a lower Cholesky factor of Sigma.
Matrix sample_gaussian_rows(const Matrix& chol_lower, Index rows, Rng& rng);

Simulation generate(const ScenarioSpec& spec);
Simulation gen_main(const ScenarioSpec& spec);
Simulation gen_mis(const ScenarioSpec& spec);

inline constexpr Index kMisTruthSize = 500000;
inline constexpr std::uint64_t kMisTruthSeed = 20240601;

// Population logistic coefficients for i-iii; memoized per (id, seed, size).
TruthOracle mis_truth(ScenarioId id, Index p, std::uint64_t seed = kMisTruthSeed,
                      Index sample_size = kMisTruthSize);

double true_linear_predictor(const TruthOracle& oracle, double s,
                             const Eigen::Ref<const Vector>& x);

}  // namespace pass
