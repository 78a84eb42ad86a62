#pragma once

#include "pass/common.hpp"
#include "pass/data.hpp"
#include "pass/solver.hpp"

#include <string>
#include <vector>

namespace pass {

// Surrogate-model direction estimated from all rows: LASSO least squares for
// the initial fit, then adaptive LASSO with weights |alpha_init|^-nu, both
// tuned by BIC over lambda_max-anchored paths.
struct AlphaFit {
  Vector alpha;
  double tau = 0.0;
  Vector alpha_init;
  double tau_init = 0.0;
  std::vector<Index> support;
  double mu_init = 0.0;
  double mu = 0.0;
  double bic_init = 0.0;
  double bic = 0.0;
  double nu = 1.0;
  std::vector<std::string> warnings;

  bool empty_support() const { return support.empty(); }
};

struct AlphaOptions {
  int n_mu = 100;
  double mu_min_ratio = 1e-4;
  double nu = 1.0;
  SolverOptions solver;
};

// N ln(RSS/N) + df ln N, df = nonzero coefficients. RSS = 0 gives -inf.
double bic_linear(const GlmFit& fit, const Matrix& X, const Vector& y);

struct AlphaInit {
  double tau = 0.0;
  Vector alpha;
  double mu = 0.0;
  double bic = 0.0;
};

AlphaInit fit_alpha_init(const Dataset& ds, const AlphaOptions& options = {});
AlphaFit fit_alpha_alasso(const Dataset& ds, const AlphaInit& init,
                          const AlphaOptions& options = {});
// Both stages.
AlphaFit fit_alpha(const Dataset& ds, const AlphaOptions& options = {});

// Unpenalized least-squares slope vector of S on (1, X).
Vector least_squares_direction(const Matrix& X, const Vector& S);

}  // namespace pass
