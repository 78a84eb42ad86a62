#pragma once

#include "pass/common.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace pass {

enum class LossKind { kLinear, kLogistic };

inline constexpr double kInfWeight = std::numeric_limits<double>::infinity();

// Weighted L1 penalty: lambda * sum_j weights[j] * |c_j|.
// weight 0 leaves a coordinate unpenalized, +inf pins it to zero.
struct PenaltySpec {
  double lambda = 0.0;
  Vector weights;

  static PenaltySpec uniform(Index width, double lambda) {
    return {lambda, Vector::Ones(width)};
  }
  void validate(Index width) const;
};

struct SolverOptions {
  double inner_tol = 1e-7;
  double outer_tol = 1e-6;
  // A fit is reported converged only once its KKT certificate is below this.
  double kkt_tol = 1e-7;
  int max_outer = 100;
  int max_inner_sweeps = 10000;
  double min_working_weight = 1e-5;
  double eta_cap = 30.0;
  bool fit_intercept = true;
  // Logistic labels in [0, 1] instead of {0, 1}.
  bool fractional_labels = false;
};

struct GlmFit {
  Vector coefficients;
  double intercept = 0.0;
  double loss_value = 0.0;  // smooth (1/n)-scaled loss
  double objective = 0.0;   // loss + penalty
  int n_iterations = 0;
  bool converged = false;
  bool eta_clamped = false;  // separation guard engaged
  double kkt_max_violation = 0.0;
};

// l(y, eta) = -y*eta + log(1 + e^eta), stable for any eta.
double logistic_loss(double y, double eta);

// (1/n) sum of the per-row smooth loss. Linear loss is (y - eta)^2.
double smooth_loss(LossKind kind, const Vector& y, const Vector& eta);

// Gradient of the smooth loss with respect to (intercept, coefficients).
// Returns a vector of length width + 1, entry 0 is the intercept.
Vector loss_gradient(LossKind kind, const Matrix& X, const Vector& y,
                     double intercept, const Vector& coefficients);

double penalized_objective(LossKind kind, const Matrix& X, const Vector& y,
                           const PenaltySpec& penalty, double intercept,
                           const Vector& coefficients);

// Maximum subgradient-optimality violation of (intercept, coefficients).
double kkt_check(const GlmFit& fit, const Matrix& X, const Vector& y,
                 const PenaltySpec& penalty, LossKind kind,
                 bool fit_intercept = true);

GlmFit fit_weighted_l1(LossKind kind, const Matrix& X, const Vector& y,
                       const PenaltySpec& penalty,
                       const SolverOptions& options = {},
                       const GlmFit* warm_start = nullptr);

inline GlmFit fit_weighted_l1_linear(const Matrix& X, const Vector& y,
                                     const PenaltySpec& penalty,
                                     bool fit_intercept = true) {
  SolverOptions opt;
  opt.fit_intercept = fit_intercept;
  return fit_weighted_l1(LossKind::kLinear, X, y, penalty, opt);
}

inline GlmFit fit_weighted_l1_logistic(const Matrix& X, const Vector& y,
                                       const PenaltySpec& penalty,
                                       bool fit_intercept = true) {
  SolverOptions opt;
  opt.fit_intercept = fit_intercept;
  return fit_weighted_l1(LossKind::kLogistic, X, y, penalty, opt);
}

// Smallest lambda at which every penalized coordinate is zero. Unpenalized
// coordinates (and the intercept) are fitted first.
double lambda_max(LossKind kind, const Matrix& X, const Vector& y,
                  const Vector& weights, const SolverOptions& options = {});

// Unpenalized logistic regression by damped Newton steps, for designs with a
// handful of columns. Linear predictors are clamped at options.eta_cap.
GlmFit fit_logistic_newton(const Matrix& X, const Vector& y, const SolverOptions& options = {});

std::vector<double> geometric_grid(double hi, double min_ratio, int n);

struct PathPoint {
  double lambda;
  GlmFit fit;
};

// Warm-started fits along a geometric grid from lambda_max down to
// lambda_max * lambda_min_ratio. An explicit grid overrides the default.
std::vector<PathPoint> regularization_path(
    LossKind kind, const Matrix& X, const Vector& y, const Vector& weights,
    int n_lambda, double lambda_min_ratio, const SolverOptions& options = {},
    const std::vector<double>& lambdas = {});

}  // namespace pass
