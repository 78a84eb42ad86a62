#include "pass/surrogate.hpp"

#include <cmath>
#include <limits>

namespace pass {
namespace {

struct BicChoice {
  Index index = 0;
  double bic = 0.0;
};

BicChoice select_by_bic(const std::vector<PathPoint>& path, const Matrix& X, const Vector& y) {
  BicChoice best{0, std::numeric_limits<double>::infinity()};
  for (size_t k = 0; k < path.size(); ++k) {
    const double b = bic_linear(path[k].fit, X, y);
    if (b < best.bic) best = {static_cast<Index>(k), b};
  }
  return best;
}

std::vector<Index> nonzero_support(const Vector& v) {
  std::vector<Index> s;
  for (Index j = 0; j < v.size(); ++j) {
    if (v[j] != 0.0) s.push_back(j);
  }
  return s;
}

}  // namespace

double bic_linear(const GlmFit& fit, const Matrix& X, const Vector& y) {
  const double N = static_cast<double>(y.size());
  const Vector resid = y - ((X * fit.coefficients).array() + fit.intercept).matrix();
  const double rss = resid.squaredNorm();
  if (rss <= 0.0) return -std::numeric_limits<double>::infinity();
  const Index df = (fit.coefficients.array() != 0.0).count();
  return N * std::log(rss / N) + static_cast<double>(df) * std::log(N);
}

AlphaInit fit_alpha_init(const Dataset& ds, const AlphaOptions& options) {
  if (ds.n_obs() < 2) throw DataError("surrogate stage needs at least 2 rows");
  const Vector weights = Vector::Ones(ds.p());
  const auto path = regularization_path(LossKind::kLinear, ds.features, ds.surrogate, weights,
                                        options.n_mu, options.mu_min_ratio, options.solver);
  const BicChoice choice = select_by_bic(path, ds.features, ds.surrogate);
  const auto& pick = path[static_cast<size_t>(choice.index)];
  return {pick.fit.intercept, pick.fit.coefficients, pick.lambda, choice.bic};
}

AlphaFit fit_alpha_alasso(const Dataset& ds, const AlphaInit& init, const AlphaOptions& options) {
  AlphaFit out;
  out.alpha_init = init.alpha;
  out.tau_init = init.tau;
  out.mu_init = init.mu;
  out.bic_init = init.bic;
  out.nu = options.nu;

  Vector weights(ds.p());
  bool any_finite = false;
  for (Index j = 0; j < ds.p(); ++j) {
    const double a = std::abs(init.alpha[j]);
    weights[j] = a > 0.0 ? std::pow(a, -options.nu) : kInfWeight;
    any_finite = any_finite || a > 0.0;
  }
  if (!any_finite) {
    out.alpha = Vector::Zero(ds.p());
    out.tau = ds.surrogate.mean();
    GlmFit null_fit;
    null_fit.coefficients = out.alpha;
    null_fit.intercept = out.tau;
    out.bic = bic_linear(null_fit, ds.features, ds.surrogate);
    out.warnings.push_back("initial surrogate fit is all zero: empty support");
    return out;
  }
  const auto path = regularization_path(LossKind::kLinear, ds.features, ds.surrogate, weights,
                                        options.n_mu, options.mu_min_ratio, options.solver);
  const BicChoice choice = select_by_bic(path, ds.features, ds.surrogate);
  const auto& pick = path[static_cast<size_t>(choice.index)];
  out.alpha = pick.fit.coefficients;
  out.tau = pick.fit.intercept;
  out.mu = pick.lambda;
  out.bic = choice.bic;
  out.support = nonzero_support(out.alpha);
  if (out.support.empty()) out.warnings.push_back("adaptive surrogate fit selected empty support");
  return out;
}

AlphaFit fit_alpha(const Dataset& ds, const AlphaOptions& options) {
  return fit_alpha_alasso(ds, fit_alpha_init(ds, options), options);
}

Vector least_squares_direction(const Matrix& X, const Vector& S) {
  const Vector xbar = X.colwise().mean();
  const Matrix Xc = X.rowwise() - xbar.transpose();
  const Vector Sc = S.array() - S.mean();
  return Xc.colPivHouseholderQr().solve(Sc);
}

}  // namespace pass
