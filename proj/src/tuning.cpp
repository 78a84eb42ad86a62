#include "pass/tuning.hpp"

#include <algorithm>
#include <cmath>

namespace pass {

Matrix select_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = m.row(rows[k]);
  return out;
}

Vector select_rows(const Vector& v, const std::vector<Index>& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (size_t k = 0; k < rows.size(); ++k) out[static_cast<Index>(k)] = v[rows[k]];
  return out;
}

std::vector<double> anchored_grid(const Matrix& design, const Vector& y, const Vector& weights,
                                  int n_lambda, double min_ratio,
                                  const SolverOptions& options) {
  double hi = lambda_max(LossKind::kLogistic, design, y, weights, options);
  if (!(hi > 0.0)) hi = 1e-8;
  return geometric_grid(hi, min_ratio, n_lambda);
}

GlmFit fit_along_path(LossKind kind, const Matrix& design, const Vector& y,
                      const Vector& weights, const std::vector<double>& lambdas, Index index,
                      const SolverOptions& options, double loss_scale) {
  if (index < 0 || index >= static_cast<Index>(lambdas.size())) {
    throw ConfigError("path index out of range");
  }
  GlmFit fit;
  const GlmFit* warm = nullptr;
  for (Index k = 0; k <= index; ++k) {
    PenaltySpec pen{lambdas[static_cast<size_t>(k)] * loss_scale, weights};
    fit = fit_weighted_l1(kind, design, y, pen, options, warm);
    warm = &fit;
  }
  return fit;
}

CvPathResult cv_logistic_path(const Matrix& design, const Vector& fit_labels,
                              const Vector& eval_labels, const Vector& weights,
                              const std::vector<double>& lambdas, const FoldAssignment& folds,
                              CvCriterion criterion, const SolverOptions& options,
                              double loss_scale) {
  const Index n = design.rows();
  const size_t L = lambdas.size();
  if (L == 0) throw ConfigError("empty lambda grid");
  if (static_cast<Index>(folds.fold.size()) != n) throw DataError("fold assignment size mismatch");

  // Out-of-fold linear predictors for every grid point.
  Matrix oof(n, static_cast<Index>(L));
  for (int k = 0; k < folds.n_folds; ++k) {
    const auto train = folds.train_rows(k);
    const auto test = folds.test_rows(k);
    if (test.empty()) continue;
    const Matrix Xtr = select_rows(design, train);
    const Vector ytr = select_rows(fit_labels, train);
    const Matrix Xte = select_rows(design, test);
    const GlmFit* warm = nullptr;
    GlmFit fit;
    for (size_t l = 0; l < L; ++l) {
      PenaltySpec pen{lambdas[l] * loss_scale, weights};
      fit = fit_weighted_l1(LossKind::kLogistic, Xtr, ytr, pen, options, warm);
      warm = &fit;
      const Vector eta = (Xte * fit.coefficients).array() + fit.intercept;
      for (size_t t = 0; t < test.size(); ++t) oof(test[t], static_cast<Index>(l)) = eta[static_cast<Index>(t)];
    }
  }

  CvPathResult res;
  res.lambdas = lambdas;
  res.score.resize(L);
  for (size_t l = 0; l < L; ++l) {
    const Vector eta = oof.col(static_cast<Index>(l));
    if (criterion == CvCriterion::kDeviance) {
      double total = 0.0;
      for (Index i = 0; i < n; ++i) total += logistic_loss(eval_labels[i], eta[i]);
      res.score[l] = total / static_cast<double>(n);
    } else {
      res.score[l] = -auc(eta, eval_labels);
    }
  }
  // Ties resolve toward the smallest lambda.
  Index best = 0;
  for (size_t l = 1; l < L; ++l) {
    const double s = res.score[l];
    const double b = res.score[static_cast<size_t>(best)];
    if (s < b || (s == b && lambdas[l] < lambdas[static_cast<size_t>(best)])) {
      best = static_cast<Index>(l);
    }
  }
  res.best = best;
  return res;
}

}  // namespace pass
