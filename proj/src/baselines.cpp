#include "pass/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pass {
namespace {

Matrix surrogate_design(const LabeledData& data) {
  Matrix design(data.n(), data.p() + 1);
  design.col(0) = data.S;
  design.rightCols(data.p()) = data.X;
  return design;
}

void require_rows(const LabeledData& data, const BaselineOptions& opt) {
  if (data.n() < 20) throw DataError("supervised fits need at least 20 labeled rows");
  if (data.n() < opt.n_folds) throw DataError("fewer labeled rows than folds");
}

struct TunedFit {
  GlmFit fit;
  double lambda = 0.0;
  double score = 0.0;
  std::vector<std::string> warnings;
};

// CV over an anchored grid, then a warm-started refit on all rows.
TunedFit tuned_logistic(const Matrix& design, const Vector& y, const Vector& weights,
                        const BaselineOptions& opt) {
  const FoldAssignment folds = make_folds(y, opt.n_folds, opt.seed);
  const auto grid = anchored_grid(design, y, weights, opt.n_lambda, opt.lambda_min_ratio,
                                  opt.solver);
  const CvPathResult cv =
      cv_logistic_path(design, y, y, weights, grid, folds, opt.criterion, opt.solver);
  TunedFit out;
  out.fit = fit_along_path(LossKind::kLogistic, design, y, weights, grid, cv.best, opt.solver);
  out.lambda = grid[static_cast<size_t>(cv.best)];
  out.score = cv.score[static_cast<size_t>(cv.best)];
  out.warnings = folds.warnings;
  return out;
}

Coefficients from_surrogate_fit(const GlmFit& g, Index p, MethodTag tag) {
  Coefficients c;
  c.zeta = g.intercept;
  c.gamma = g.coefficients[0];
  c.beta = g.coefficients.tail(p);
  c.method = tag;
  if (g.eta_clamped) c.warnings.push_back("linear predictor clamped (separation)");
  return c;
}

// Y on (1, S, X direction); beta = scale * direction.
Coefficients fit_on_score(const LabeledData& data, const Vector& direction, MethodTag tag,
                          const BaselineOptions& opt) {
  Matrix design(data.n(), 2);
  design.col(0) = data.S;
  design.col(1) = data.X * direction;
  const GlmFit g = fit_logistic_newton(design, data.Y, opt.solver);
  Coefficients c;
  c.zeta = g.intercept;
  c.gamma = g.coefficients[0];
  c.beta = g.coefficients[1] * direction;
  c.method = tag;
  if (g.eta_clamped) c.warnings.push_back("linear predictor clamped (separation)");
  return c;
}

}  // namespace

Coefficients fit_lasso_supervised(const LabeledData& data, const BaselineOptions& opt) {
  require_rows(data, opt);
  Vector weights = Vector::Ones(data.p() + 1);
  weights[0] = 0.0;
  const TunedFit t = tuned_logistic(surrogate_design(data), data.Y, weights, opt);
  Coefficients c = from_surrogate_fit(t.fit, data.p(), MethodTag::kLasso);
  c.warnings.insert(c.warnings.end(), t.warnings.begin(), t.warnings.end());
  return c;
}

Coefficients fit_alasso_supervised(const LabeledData& data, const BaselineOptions& opt) {
  const Coefficients init = fit_lasso_supervised(data, opt);
  Vector weights(data.p() + 1);
  weights[0] = 0.0;
  bool any = false;
  for (Index j = 0; j < data.p(); ++j) {
    const double b = std::abs(init.beta[j]);
    weights[j + 1] = b > 0.0 ? std::pow(b, -opt.nu) : kInfWeight;
    any = any || b > 0.0;
  }
  if (!any) {
    Matrix design(data.n(), 1);
    design.col(0) = data.S;
    const GlmFit g = fit_logistic_newton(design, data.Y, opt.solver);
    Coefficients c;
    c.zeta = g.intercept;
    c.gamma = g.coefficients[0];
    c.beta = Vector::Zero(data.p());
    c.method = MethodTag::kAlasso;
    c.warnings.push_back("initial LASSO fit is all zero: intercept + surrogate model");
    return c;
  }
  const TunedFit t = tuned_logistic(surrogate_design(data), data.Y, weights, opt);
  return from_surrogate_fit(t.fit, data.p(), MethodTag::kAlasso);
}

Coefficients fit_ss_prior(const LabeledData& data, const AlphaFit& alpha_fit,
                          const BaselineOptions& opt) {
  if (alpha_fit.alpha.size() != data.p()) throw DataError("alpha length does not match features");
  if (alpha_fit.alpha.isZero(0.0)) throw DataError("SS-prior undefined: alpha_hat is zero");
  return fit_on_score(data, alpha_fit.alpha, MethodTag::kSsPrior, opt);
}

Vector plasso_pseudo_labels(const LabeledData& data, const AlphaFit& alpha_fit, int variant,
                            const BaselineOptions& opt) {
  if (variant == 1) {
    if (static_cast<Index>(alpha_fit.support.size()) >= data.n()) {
      throw DataError("pLASSO variant 1 infeasible: |supp(alpha_hat)| >= n");
    }
    require_rows(data, opt);
    Vector weights = Vector::Ones(data.p() + 1);
    weights[0] = 0.0;
    for (Index j : alpha_fit.support) weights[j + 1] = 0.0;
    const Matrix design = surrogate_design(data);
    const TunedFit t = tuned_logistic(design, data.Y, weights, opt);
    const Vector eta = (design * t.fit.coefficients).array() + t.fit.intercept;
    return eta.unaryExpr(&sigmoid);
  }
  if (variant == 2) {
    const Coefficients ss = fit_ss_prior(data, alpha_fit, opt);
    return ss.linear_predictor(data.S, data.X).unaryExpr(&sigmoid);
  }
  throw ConfigError("pLASSO variant must be 1 or 2");
}

Coefficients fit_plasso_with_pseudo(const LabeledData& data, const Vector& pseudo, MethodTag tag,
                                    const BaselineOptions& opt) {
  require_rows(data, opt);
  if (opt.mixing_grid.empty()) throw ConfigError("pLASSO mixing grid is empty");
  if (pseudo.size() != data.n()) throw DataError("pseudo-label length mismatch");
  const Matrix design = surrogate_design(data);
  Vector weights = Vector::Ones(data.p() + 1);
  weights[0] = 0.0;
  const FoldAssignment folds = make_folds(data.Y, opt.n_folds, opt.seed);
  SolverOptions solver = opt.solver;
  solver.fractional_labels = true;

  // (1/n) sum [l(Y) + m l(Yp)] + lambda |beta|_1 equals (1 + m) times the
  // logistic objective at the blended label (Y + m Yp) / (1 + m) with
  // penalty lambda / (1 + m).
  double best_score = std::numeric_limits<double>::infinity();
  double best_mix = 0.0;
  Index best_index = 0;
  std::vector<double> best_grid;
  for (double mix : opt.mixing_grid) {
    if (mix < 0.0) throw ConfigError("mixing weight must be nonnegative");
    const Vector blended = (data.Y + mix * pseudo) / (1.0 + mix);
    std::vector<double> grid = anchored_grid(design, blended, weights, opt.n_lambda,
                                             opt.lambda_min_ratio, solver);
    for (double& l : grid) l *= (1.0 + mix);
    const double scale = 1.0 / (1.0 + mix);
    const CvPathResult cv = cv_logistic_path(design, blended, data.Y, weights, grid, folds,
                                             opt.criterion, solver, scale);
    for (size_t l = 0; l < grid.size(); ++l) {
      const double s = cv.score[l];
      const bool tie_wins =
          s == best_score &&
          (mix < best_mix || (mix == best_mix && grid[l] < best_grid[static_cast<size_t>(best_index)]));
      if (s < best_score || tie_wins) {
        best_score = s;
        best_mix = mix;
        best_index = static_cast<Index>(l);
        best_grid = grid;
      }
    }
  }
  const Vector blended = (data.Y + best_mix * pseudo) / (1.0 + best_mix);
  const GlmFit g = fit_along_path(LossKind::kLogistic, design, blended, weights, best_grid,
                                  best_index, solver, 1.0 / (1.0 + best_mix));
  Coefficients c = from_surrogate_fit(g, data.p(), tag);
  c.warnings.insert(c.warnings.end(), folds.warnings.begin(), folds.warnings.end());
  return c;
}

Coefficients fit_plasso(const LabeledData& data, const AlphaFit& alpha_fit, int variant,
                        const BaselineOptions& opt) {
  const Vector pseudo = plasso_pseudo_labels(data, alpha_fit, variant, opt);
  return fit_plasso_with_pseudo(data, pseudo,
                                variant == 1 ? MethodTag::kPlasso1 : MethodTag::kPlasso2, opt);
}

double empirical_quantile(const Vector& v, double q) {
  if (v.size() == 0) throw DataError("quantile of empty vector");
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  const double pos = q * static_cast<double>(s.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[hi] - s[lo]);
}

Coefficients fit_ulasso(const Matrix& X, const Vector& S, const BaselineOptions& opt) {
  if (!(opt.q_upper > opt.q_lower)) throw ConfigError("ULASSO needs q_upper > q_lower");
  const double c_u = empirical_quantile(S, opt.q_upper);
  const double c_l = empirical_quantile(S, opt.q_lower);
  if (!(c_u > c_l)) throw DataError("degenerate ULASSO cutoffs (c_u <= c_l)");
  std::vector<Index> rows;
  std::vector<double> labels;
  for (Index i = 0; i < S.size(); ++i) {
    if (S[i] > c_u || S[i] < c_l) {
      rows.push_back(i);
      labels.push_back(S[i] > c_u ? 1.0 : 0.0);
    }
  }
  const Index ones = std::count(labels.begin(), labels.end(), 1.0);
  if (ones == 0 || ones == static_cast<Index>(labels.size())) {
    throw DataError("ULASSO extreme set lacks one of the classes");
  }
  const Matrix design = select_rows(X, rows);
  const Vector y = Eigen::Map<Vector>(labels.data(), static_cast<Index>(labels.size()));
  if (y.size() < opt.n_folds) throw DataError("ULASSO extreme set smaller than fold count");
  const TunedFit t = tuned_logistic(design, y, Vector::Ones(X.cols()), opt);
  Coefficients c;
  c.zeta = t.fit.intercept;
  c.beta = t.fit.coefficients;
  c.method = MethodTag::kUlasso;
  c.warnings = t.warnings;
  return c;
}

Coefficients fit_ulasso(const Dataset& full, const BaselineOptions& opt) {
  return fit_ulasso(full.features, full.surrogate, opt);
}

Coefficients fit_ss_ulasso(const LabeledData& data, const Vector& ulasso_beta,
                           const BaselineOptions& opt) {
  if (ulasso_beta.size() != data.p()) throw DataError("ULASSO beta length mismatch");
  if (ulasso_beta.isZero(0.0)) throw DataError("SS-ULASSO undefined: ULASSO beta is zero");
  return fit_on_score(data, ulasso_beta, MethodTag::kSsUlasso, opt);
}

}  // namespace pass
