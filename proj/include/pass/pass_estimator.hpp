#pragma once

#include "pass/common.hpp"
#include "pass/model.hpp"
#include "pass/solver.hpp"
#include "pass/surrogate.hpp"
#include "pass/tuning.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pass {

// Prior adaptive semi-supervised fit. The solver works on
// delta = beta - rho * alpha_hat with design columns [S, X alpha_hat, X];
// beta is reconstructed afterwards.
struct PassFit {
  double zeta = 0.0;
  double gamma = 0.0;
  double rho = 0.0;
  Vector delta;
  Vector beta;
  AlphaFit alpha_used;
  double lambda1 = 0.0;
  double kappa = 1.0;
  bool degenerate = false;  // empty prior support: supervised fallback
  GlmFit solver_fit;
  double cv_score = 0.0;
  std::vector<std::string> warnings;

  Coefficients coefficients() const;
};

// [S, X alpha_hat, X]: surrogate, prior score, then the features in order.
Matrix build_augmented_design(const Matrix& X, const Vector& S, const Vector& alpha_hat);

// Penalty weights for the augmented design: 0 on (gamma, rho), 1 on the
// prior support, kappa elsewhere.
Vector pass_weights(const AlphaFit& alpha_fit, Index p, double kappa);

PassFit fit_pass(const LabeledData& data, const AlphaFit& alpha_fit, double lambda1,
                 double kappa, const SolverOptions& options = {},
                 const GlmFit* warm_start = nullptr);

// Penalized objective written directly in (zeta, gamma, beta, rho).
double pass_direct_objective(const LabeledData& data, const Vector& alpha_hat,
                             const std::vector<Index>& support, double lambda1, double kappa,
                             double zeta, double gamma, double rho, const Vector& beta);

struct PassTuning {
  std::vector<double> lambda1_grid;  // empty: anchored per kappa
  int n_lambda = 30;
  double lambda_min_ratio = 1e-2;
  std::vector<double> kappa_grid{0.25, 0.5, 1.0, 2.0, 4.0};
  int n_folds = 10;
  std::uint64_t seed = 1;
  CvCriterion criterion = CvCriterion::kDeviance;
  SolverOptions solver;
};

PassFit tune_pass(const LabeledData& data, const AlphaFit& alpha_fit,
                  const PassTuning& tuning = {});

double predict_prob(const PassFit& fit, double s, const Eigen::Ref<const Vector>& x);

}  // namespace pass
