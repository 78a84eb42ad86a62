#pragma once

#include "pass/common.hpp"
#include "pass/data.hpp"
#include "pass/model.hpp"
#include "pass/surrogate.hpp"
#include "pass/tuning.hpp"

#include <cstdint>
#include <vector>

namespace pass {

struct BaselineOptions {
  int n_folds = 10;
  std::uint64_t seed = 1;
  int n_lambda = 30;
  double lambda_min_ratio = 1e-2;
  double nu = 1.0;
  std::vector<double> mixing_grid{0.0, 0.25, 0.5, 1.0, 2.0};
  double q_upper = 0.9;
  double q_lower = 0.1;
  CvCriterion criterion = CvCriterion::kDeviance;
  SolverOptions solver;
};

// Logistic LASSO of Y on (1, S, X); only beta is penalized.
Coefficients fit_lasso_supervised(const LabeledData& data, const BaselineOptions& opt = {});

// Adaptive LASSO with weights |beta_init|^-nu from a CV-tuned LASSO.
Coefficients fit_alasso_supervised(const LabeledData& data, const BaselineOptions& opt = {});

// Unpenalized logistic fit of Y on (1, S, X alpha_hat); beta = rho * alpha_hat.
Coefficients fit_ss_prior(const LabeledData& data, const AlphaFit& alpha_fit,
                          const BaselineOptions& opt = {});

// Prior LASSO: true-label likelihood mixed with a pseudo-label likelihood.
Coefficients fit_plasso(const LabeledData& data, const AlphaFit& alpha_fit, int variant,
                        const BaselineOptions& opt = {});

// Pseudo-labels used by fit_plasso (probabilities on the labeled rows).
Vector plasso_pseudo_labels(const LabeledData& data, const AlphaFit& alpha_fit, int variant,
                            const BaselineOptions& opt = {});

// Mixed-likelihood fit for fixed pseudo-labels; CV over (mixing, lambda).
Coefficients fit_plasso_with_pseudo(const LabeledData& data, const Vector& pseudo,
                                    MethodTag tag, const BaselineOptions& opt = {});

// Logistic LASSO of I(S > c_u) on X over the rows with S > c_u or S < c_l.
// Labels are never read.
Coefficients fit_ulasso(const Matrix& X, const Vector& S, const BaselineOptions& opt = {});
Coefficients fit_ulasso(const Dataset& full, const BaselineOptions& opt = {});

// Unpenalized logistic fit of Y on (1, S, X beta_tilde).
Coefficients fit_ss_ulasso(const LabeledData& data, const Vector& ulasso_beta,
                           const BaselineOptions& opt = {});

// Empirical quantile with linear interpolation between order statistics.
double empirical_quantile(const Vector& v, double q);

}  // namespace pass
