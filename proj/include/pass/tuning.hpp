#pragma once

#include "pass/common.hpp"
#include "pass/eval.hpp"
#include "pass/solver.hpp"

#include <vector>

namespace pass {

enum class CvCriterion { kDeviance, kAuc };

// Cross-validated logistic path. `fit_labels` drive the fits (they may be
// fractional); `eval_labels` score the held-out rows. `loss_scale`
// multiplies the lambda grid before it reaches the solver, so callers can
// express grids on the scale of an objective that is a multiple of the
// solver's.
struct CvPathResult {
  std::vector<double> lambdas;
  std::vector<double> score;  // lower is better (negated AUC for kAuc)
  Index best = 0;
};

CvPathResult cv_logistic_path(const Matrix& design, const Vector& fit_labels,
                              const Vector& eval_labels, const Vector& weights,
                              const std::vector<double>& lambdas, const FoldAssignment& folds,
                              CvCriterion criterion = CvCriterion::kDeviance,
                              const SolverOptions& options = {}, double loss_scale = 1.0);

// Warm-started walk down `lambdas` returning the fit at position `index`.
GlmFit fit_along_path(LossKind kind, const Matrix& design, const Vector& y,
                      const Vector& weights, const std::vector<double>& lambdas, Index index,
                      const SolverOptions& options = {}, double loss_scale = 1.0);

// Default lambda grid for a logistic fit anchored at its lambda_max.
std::vector<double> anchored_grid(const Matrix& design, const Vector& y, const Vector& weights,
                                  int n_lambda, double min_ratio,
                                  const SolverOptions& options = {});

Matrix select_rows(const Matrix& m, const std::vector<Index>& rows);
Vector select_rows(const Vector& v, const std::vector<Index>& rows);

}  // namespace pass
