#include "pass/pass_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace pass {
namespace {

// Degenerate prior: features only, all penalized by kappa.
Matrix fallback_design(const LabeledData& data) {
  Matrix design(data.n(), data.p() + 1);
  design.col(0) = data.S;
  design.rightCols(data.p()) = data.X;
  return design;
}

Vector fallback_weights(Index p, double kappa) {
  Vector w(p + 1);
  w[0] = 0.0;
  w.tail(p).setConstant(kappa);
  return w;
}

struct Problem {
  Matrix design;
  Vector weights;
  bool degenerate = false;
};

Problem make_problem(const LabeledData& data, const AlphaFit& alpha_fit, double kappa) {
  if (alpha_fit.alpha.size() != data.p()) throw DataError("alpha length does not match features");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (alpha_fit.empty_support()) {
    return {fallback_design(data), fallback_weights(data.p(), kappa), true};
  }
  return {build_augmented_design(data.X, data.S, alpha_fit.alpha),
          pass_weights(alpha_fit, data.p(), kappa), false};
}

PassFit assemble(const GlmFit& g, const AlphaFit& alpha_fit, Index p, double lambda1,
                 double kappa, bool degenerate) {
  PassFit out;
  out.zeta = g.intercept;
  out.gamma = g.coefficients[0];
  out.alpha_used = alpha_fit;
  out.lambda1 = lambda1;
  out.kappa = kappa;
  out.degenerate = degenerate;
  out.solver_fit = g;
  if (degenerate) {
    out.rho = 0.0;
    out.delta = g.coefficients.tail(p);
    out.beta = out.delta;
    out.warnings.push_back("empty prior support: PASS reduced to supervised LASSO");
  } else {
    out.rho = g.coefficients[1];
    out.delta = g.coefficients.tail(p);
    out.beta = out.delta + out.rho * alpha_fit.alpha;
  }
  if (g.eta_clamped) out.warnings.push_back("linear predictor clamped (separation)");
  return out;
}

}  // namespace

Coefficients PassFit::coefficients() const {
  Coefficients c;
  c.zeta = zeta;
  c.gamma = gamma;
  c.beta = beta;
  c.method = MethodTag::kPass;
  c.warnings = warnings;
  return c;
}

Matrix build_augmented_design(const Matrix& X, const Vector& S, const Vector& alpha_hat) {
  if (alpha_hat.size() != X.cols()) throw DataError("alpha length does not match features");
  if (S.size() != X.rows()) throw DataError("surrogate length does not match rows");
  Matrix design(X.rows(), X.cols() + 2);
  design.col(0) = S;
  design.col(1) = X * alpha_hat;
  design.rightCols(X.cols()) = X;
  return design;
}

Vector pass_weights(const AlphaFit& alpha_fit, Index p, double kappa) {
  Vector w(p + 2);
  w[0] = 0.0;
  w[1] = 0.0;
  w.tail(p).setConstant(kappa);
  for (Index j : alpha_fit.support) w[j + 2] = 1.0;
  return w;
}

PassFit fit_pass(const LabeledData& data, const AlphaFit& alpha_fit, double lambda1,
                 double kappa, const SolverOptions& options, const GlmFit* warm_start) {
  if (!(lambda1 >= 0.0)) throw ConfigError("lambda1 must be nonnegative");
  const Problem prob = make_problem(data, alpha_fit, kappa);
  const GlmFit g = fit_weighted_l1(LossKind::kLogistic, prob.design, data.Y,
                                   PenaltySpec{lambda1, prob.weights}, options, warm_start);
  return assemble(g, alpha_fit, data.p(), lambda1, kappa, prob.degenerate);
}

double pass_direct_objective(const LabeledData& data, const Vector& alpha_hat,
                             const std::vector<Index>& support, double lambda1, double kappa,
                             double zeta, double gamma, double rho, const Vector& beta) {
  const Vector eta = ((data.X * beta).array() + zeta + gamma * data.S.array()).matrix();
  const double loss = smooth_loss(LossKind::kLogistic, data.Y, eta);
  std::vector<char> in_support(static_cast<size_t>(data.p()), 0);
  for (Index j : support) in_support[static_cast<size_t>(j)] = 1;
  double on = 0.0;
  double off = 0.0;
  for (Index j = 0; j < data.p(); ++j) {
    if (in_support[static_cast<size_t>(j)]) {
      on += std::abs(beta[j] - rho * alpha_hat[j]);
    } else {
      off += std::abs(beta[j]);
    }
  }
  return loss + lambda1 * on + kappa * lambda1 * off;
}

PassFit tune_pass(const LabeledData& data, const AlphaFit& alpha_fit, const PassTuning& tuning) {
  if (tuning.kappa_grid.empty()) throw ConfigError("kappa grid is empty");
  if (tuning.n_folds < 2) throw ConfigError("need at least 2 folds");
  if (data.n() < 2 * tuning.n_folds) {
    throw DataError("PASS tuning needs at least 2 * n_folds labeled rows");
  }
  const FoldAssignment folds = make_folds(data.Y, tuning.n_folds, tuning.seed);

  struct Choice {
    double score = std::numeric_limits<double>::infinity();
    double lambda1 = 0.0;
    double kappa = 0.0;
    Index index = 0;
    std::vector<double> grid;
  } best;

  std::vector<double> user_grid = tuning.lambda1_grid;
  std::sort(user_grid.begin(), user_grid.end(), std::greater<>());
  user_grid.erase(std::unique(user_grid.begin(), user_grid.end()), user_grid.end());
  std::vector<double> kappas = tuning.kappa_grid;
  std::sort(kappas.begin(), kappas.end());
  kappas.erase(std::unique(kappas.begin(), kappas.end()), kappas.end());

  for (double kappa : kappas) {
    const Problem prob = make_problem(data, alpha_fit, kappa);
    std::vector<double> grid = user_grid;
    if (grid.empty()) {
      grid = anchored_grid(prob.design, data.Y, prob.weights, tuning.n_lambda,
                           tuning.lambda_min_ratio, tuning.solver);
    }
    const CvPathResult cv = cv_logistic_path(prob.design, data.Y, data.Y, prob.weights, grid,
                                             folds, tuning.criterion, tuning.solver);
    for (size_t l = 0; l < grid.size(); ++l) {
      const double s = cv.score[l];
      const bool better =
          s < best.score ||
          (s == best.score && (grid[l] < best.lambda1 ||
                               (grid[l] == best.lambda1 && kappa < best.kappa)));
      if (better) best = {s, grid[l], kappa, static_cast<Index>(l), grid};
    }
  }

  const Problem prob = make_problem(data, alpha_fit, best.kappa);
  const GlmFit g = fit_along_path(LossKind::kLogistic, prob.design, data.Y, prob.weights,
                                  best.grid, best.index, tuning.solver);
  PassFit out = assemble(g, alpha_fit, data.p(), best.lambda1, best.kappa, prob.degenerate);
  out.cv_score = best.score;
  for (const auto& w : folds.warnings) out.warnings.push_back(w);
  return out;
}

double predict_prob(const PassFit& fit, double s, const Eigen::Ref<const Vector>& x) {
  if (x.size() != fit.beta.size()) throw DataError("feature vector length does not match model");
  return sigmoid(fit.zeta + fit.gamma * s + x.dot(fit.beta));
}

}  // namespace pass
