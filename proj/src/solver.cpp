#include "pass/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pass {
namespace {

double soft_threshold(double u, double t) {
  if (u > t) return u - t;
  if (u < -t) return u + t;
  return 0.0;
}

void validate_problem(LossKind kind, const Matrix& X, const Vector& y,
                      const PenaltySpec& penalty, bool fractional) {
  if (X.rows() == 0) throw DataError("design has zero rows");
  if (X.rows() != y.size()) {
    throw DataError("design rows (" + std::to_string(X.rows()) +
                    ") do not match response length (" +
                    std::to_string(y.size()) + ")");
  }
  if (!X.allFinite()) throw DataError("design contains non-finite entries");
  if (!y.allFinite()) throw DataError("response contains non-finite entries");
  penalty.validate(X.cols());
  if (kind == LossKind::kLogistic) {
    for (Index i = 0; i < y.size(); ++i) {
      const double v = y[i];
      const bool ok = fractional ? (v >= 0.0 && v <= 1.0) : (v == 0.0 || v == 1.0);
      if (!ok) throw DataError("logistic response not binary at row " + std::to_string(i));
    }
  }
}

// Per-row derivative dl/deta and curvature of the unscaled loss.
struct WorkingQuantities {
  Vector h;  // curvature (floored)
  Vector r;  // working residual -g/h
  bool clamped = false;
};

WorkingQuantities working(LossKind kind, const Vector& y, const Vector& eta,
                          const SolverOptions& opt) {
  WorkingQuantities w;
  const Index n = y.size();
  w.h.resize(n);
  w.r.resize(n);
  if (kind == LossKind::kLinear) {
    w.h.setConstant(2.0);
    w.r = y - eta;
    return w;
  }
  for (Index i = 0; i < n; ++i) {
    double e = eta[i];
    if (std::abs(e) > opt.eta_cap) {
      w.clamped = true;
      e = std::clamp(e, -opt.eta_cap, opt.eta_cap);
    }
    const double mu = sigmoid(e);
    const double h = std::max(mu * (1.0 - mu), opt.min_working_weight);
    w.h[i] = h;
    w.r[i] = (y[i] - mu) / h;
  }
  return w;
}

double null_intercept(LossKind kind, const Vector& y, const SolverOptions& opt) {
  const double ybar = y.mean();
  if (kind == LossKind::kLinear) return ybar;
  const double lo = sigmoid(-opt.eta_cap);
  const double hi = sigmoid(opt.eta_cap);
  const double m = std::clamp(ybar, lo, hi);
  return std::clamp(std::log(m / (1.0 - m)), -opt.eta_cap, opt.eta_cap);
}

}  // namespace

void PenaltySpec::validate(Index width) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DataError("penalty lambda must be finite and nonnegative");
  }
  if (weights.size() != width) {
    throw DataError("penalty weights length " + std::to_string(weights.size()) +
                    " does not match design width " + std::to_string(width));
  }
  for (Index j = 0; j < width; ++j) {
    if (std::isnan(weights[j]) || weights[j] < 0.0) {
      throw DataError("penalty weight " + std::to_string(j) + " is negative or NaN");
    }
  }
}

double logistic_loss(double y, double eta) {
  // log(1 + e^eta) = max(eta, 0) + log1p(e^-|eta|)
  const double softplus = std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta)));
  return softplus - y * eta;
}

double smooth_loss(LossKind kind, const Vector& y, const Vector& eta) {
  const Index n = y.size();
  double total = 0.0;
  if (kind == LossKind::kLinear) {
    total = (y - eta).squaredNorm();
  } else {
    for (Index i = 0; i < n; ++i) total += logistic_loss(y[i], eta[i]);
  }
  return total / static_cast<double>(n);
}

Vector loss_gradient(LossKind kind, const Matrix& X, const Vector& y,
                     double intercept, const Vector& coefficients) {
  const Index n = X.rows();
  Vector eta = (X * coefficients).array() + intercept;
  Vector g(n);
  if (kind == LossKind::kLinear) {
    g = -2.0 * (y - eta);
  } else {
    for (Index i = 0; i < n; ++i) g[i] = sigmoid(eta[i]) - y[i];
  }
  Vector grad(X.cols() + 1);
  grad[0] = g.sum() / static_cast<double>(n);
  grad.tail(X.cols()) = X.transpose() * g / static_cast<double>(n);
  return grad;
}

double penalized_objective(LossKind kind, const Matrix& X, const Vector& y,
                           const PenaltySpec& penalty, double intercept,
                           const Vector& coefficients) {
  Vector eta = (X * coefficients).array() + intercept;
  double pen = 0.0;
  for (Index j = 0; j < coefficients.size(); ++j) {
    const double c = std::abs(coefficients[j]);
    if (c == 0.0) continue;
    pen += penalty.weights[j] * c;
  }
  return smooth_loss(kind, y, eta) + penalty.lambda * pen;
}

double kkt_check(const GlmFit& fit, const Matrix& X, const Vector& y,
                 const PenaltySpec& penalty, LossKind kind, bool fit_intercept) {
  const Vector grad = loss_gradient(kind, X, y, fit.intercept, fit.coefficients);
  double worst = fit_intercept ? std::abs(grad[0]) : 0.0;
  for (Index j = 0; j < X.cols(); ++j) {
    const double w = penalty.weights[j];
    const double c = fit.coefficients[j];
    const double g = grad[j + 1];
    double v;
    if (std::isinf(w)) {
      v = (c == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
    } else if (c == 0.0) {
      v = std::max(0.0, std::abs(g) - penalty.lambda * w);
    } else {
      v = std::abs(g + penalty.lambda * w * (c > 0 ? 1.0 : -1.0));
    }
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

// `gram`, when given, is [1 X]'[1 X] / n; linear fits then solve faces
// without touching the rows.
GlmFit fit_core(LossKind kind, const Matrix& X, const Vector& y, const PenaltySpec& penalty,
                const SolverOptions& opt, const GlmFit* warm_start, const Matrix* gram) {
  if (kind != LossKind::kLinear) gram = nullptr;
  validate_problem(kind, X, y, penalty, opt.fractional_labels);
  const Index n = X.rows();
  const Index p = X.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<Index> free_coords;
  free_coords.reserve(static_cast<size_t>(p));
  for (Index j = 0; j < p; ++j) {
    if (!std::isinf(penalty.weights[j])) free_coords.push_back(j);
  }

  GlmFit fit;
  fit.coefficients = Vector::Zero(p);
  if (warm_start != nullptr && warm_start->coefficients.size() == p) {
    for (Index j : free_coords) fit.coefficients[j] = warm_start->coefficients[j];
    fit.intercept = opt.fit_intercept ? warm_start->intercept : 0.0;
  } else {
    fit.intercept = opt.fit_intercept ? null_intercept(kind, y, opt) : 0.0;
  }

  Vector eta = (X * fit.coefficients).array() + fit.intercept;
  Vector curvature(p);
  Vector previous_outer = fit.coefficients;
  double inner_tol = opt.inner_tol;
  int total_sweeps = 0;

  for (int outer = 0; outer < opt.max_outer; ++outer) {
    fit.n_iterations = outer + 1;
    WorkingQuantities wq = working(kind, y, eta, opt);
    fit.eta_clamped = fit.eta_clamped || wq.clamped;
    Vector& r = wq.r;
    const Vector& h = wq.h;
    const double h_sum = h.sum();
    for (Index j : free_coords) {
      curvature[j] = X.col(j).cwiseAbs2().dot(h) * inv_n;
    }

    // Coordinate sweep over `coords`; returns the largest coefficient change.
    auto sweep = [&](const std::vector<Index>& coords) {
      double max_change = 0.0;
      for (Index j : coords) {
        const double a = curvature[j];
        const double old = fit.coefficients[j];
        double updated = 0.0;
        if (a > 0.0) {
          const double u = X.col(j).cwiseProduct(h).dot(r) * inv_n + a * old;
          updated = soft_threshold(u, penalty.lambda * penalty.weights[j]) / a;
        }
        const double delta = updated - old;
        if (delta != 0.0) {
          fit.coefficients[j] = updated;
          r.noalias() -= delta * X.col(j);
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      if (opt.fit_intercept && h_sum > 0.0) {
        double delta = h.dot(r) / h_sum;
        if (kind == LossKind::kLogistic) {
          const double target = std::clamp(fit.intercept + delta, -opt.eta_cap, opt.eta_cap);
          delta = target - fit.intercept;
        }
        if (delta != 0.0) {
          fit.intercept += delta;
          r.array() -= delta;
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      return max_change;
    };

    // With the signs of `coords` held fixed the quadratic model is smooth on
    // that face, so its minimizer is one linear solve away. A step that would
    // push a coefficient through zero is cut at the first crossing, the
    // coordinate leaves the face and the solve repeats. Returns true once a
    // full step lands inside the face.
    auto face_solve = [&](std::vector<Index> coords) {
      const Index off = opt.fit_intercept ? 1 : 0;
      for (size_t attempt = 0; attempt <= coords.size() + 1; ++attempt) {
        const Index k = static_cast<Index>(coords.size());
        const Index m = k + off;
        if (m == 0 || m > n) return false;
        Matrix D;
        Matrix G(m, m);
        Vector rhs(m);
        if (gram != nullptr) {
          auto at = [&](Index a) { return a < off ? Index{0} : coords[static_cast<size_t>(a - off)] + 1; };
          for (Index a = 0; a < m; ++a) {
            for (Index b = 0; b < m; ++b) G(a, b) = 2.0 * (*gram)(at(a), at(b));
            rhs[a] = 2.0 * inv_n * (a < off ? r.sum() : X.col(at(a) - 1).dot(r));
          }
        } else {
          D.resize(n, m);
          if (off == 1) D.col(0).setOnes();
          for (Index t = 0; t < k; ++t) D.col(t + off) = X.col(coords[static_cast<size_t>(t)]);
          const Matrix Dh = D.transpose() * h.asDiagonal();
          G.noalias() = Dh * D * inv_n;
          rhs.noalias() = Dh * r * inv_n;
        }
        for (Index t = 0; t < k; ++t) {
          const Index j = coords[static_cast<size_t>(t)];
          const double w = penalty.weights[j];
          if (w > 0.0) {
            rhs[t + off] -= penalty.lambda * w * (fit.coefficients[j] > 0.0 ? 1.0 : -1.0);
          }
        }
        const Eigen::LDLT<Matrix> ldlt(G);
        if (ldlt.info() != Eigen::Success) return false;
        const Vector step = ldlt.solve(rhs);
        if (!step.allFinite()) return false;
        if ((G * step - rhs).norm() > 1e-10 * (1.0 + rhs.norm())) return false;

        double t_cut = 1.0;
        for (Index t = 0; t < k; ++t) {
          const Index j = coords[static_cast<size_t>(t)];
          if (penalty.weights[j] == 0.0) continue;
          const double c = fit.coefficients[j];
          const double s = step[t + off];
          if (c * s < 0.0 && std::abs(s) >= std::abs(c)) t_cut = std::min(t_cut, -c / s);
        }
        if (off == 1 && kind == LossKind::kLogistic &&
            std::abs(fit.intercept + t_cut * step[0]) > opt.eta_cap) {
          return false;
        }
        Vector moved(m);
        if (off == 1) {
          moved[0] = t_cut * step[0];
          fit.intercept += moved[0];
        }
        std::vector<Index> kept;
        for (Index t = 0; t < k; ++t) {
          const Index j = coords[static_cast<size_t>(t)];
          const double c = fit.coefficients[j];
          const double s = step[t + off];
          const bool crosses = penalty.weights[j] != 0.0 && c * s < 0.0 &&
                               std::abs(s) >= std::abs(c) && -c / s <= t_cut;
          const double next = crosses ? 0.0 : c + t_cut * s;
          moved[t + off] = next - c;
          fit.coefficients[j] = next;
          if (!crosses) kept.push_back(j);
        }
        if (gram != nullptr) {
          if (off == 1) r.array() -= moved[0];
          for (Index t = 0; t < k; ++t) {
            if (moved[t + off] != 0.0) r.noalias() -= moved[t + off] * X.col(coords[static_cast<size_t>(t)]);
          }
        } else {
          r.noalias() -= D * moved;
        }
        if (t_cut == 1.0 && kept.size() == coords.size()) return true;
        coords = std::move(kept);
      }
      return false;
    };

    // Full sweep, then iterate on the active set until it settles.
    while (total_sweeps < opt.max_inner_sweeps) {
      const double full_change = sweep(free_coords);
      ++total_sweeps;
      std::vector<Index> active;
      for (Index j : free_coords) {
        if (fit.coefficients[j] != 0.0) active.push_back(j);
      }
      if (full_change < inner_tol) break;
      for (int round = 0; total_sweeps < opt.max_inner_sweeps; ++round) {
        if (round % 4 == 0) {
          std::vector<Index> face;
          for (Index j : active) {
            if (fit.coefficients[j] != 0.0) face.push_back(j);
          }
          face_solve(face);
        }
        const double change = sweep(active);
        ++total_sweeps;
        if (change < inner_tol) break;
      }
    }

    eta = (X * fit.coefficients).array() + fit.intercept;
    double outer_change = (fit.coefficients - previous_outer).cwiseAbs().maxCoeff();
    if (p == 0) outer_change = 0.0;
    previous_outer = fit.coefficients;

    if (kind == LossKind::kLinear || outer_change < opt.outer_tol) {
      GlmFit probe = fit;
      const double kkt = kkt_check(probe, X, y, penalty, kind, opt.fit_intercept);
      const bool clamped_now = kind == LossKind::kLogistic &&
                               (eta.cwiseAbs().maxCoeff() > opt.eta_cap);
      if (kkt <= opt.kkt_tol || clamped_now) {
        fit.converged = true;
        break;
      }
      if (inner_tol <= 1e-14 && kind == LossKind::kLinear) break;
      inner_tol = std::max(inner_tol * 0.01, 1e-15);
    }
    if (total_sweeps >= opt.max_inner_sweeps) break;
  }

  if (kind == LossKind::kLogistic && eta.size() > 0 &&
      eta.cwiseAbs().maxCoeff() >= opt.eta_cap) {
    fit.eta_clamped = true;
  }
  fit.loss_value = smooth_loss(kind, y, eta);
  fit.objective = penalized_objective(kind, X, y, penalty, fit.intercept, fit.coefficients);
  fit.kkt_max_violation = kkt_check(fit, X, y, penalty, kind, opt.fit_intercept);
  return fit;
}

Matrix intercept_gram(const Matrix& X) {
  const Index n = X.rows();
  Matrix gram(X.cols() + 1, X.cols() + 1);
  gram(0, 0) = 1.0;
  const Vector means = X.colwise().mean().transpose();
  gram.block(1, 0, X.cols(), 1) = means;
  gram.block(0, 1, 1, X.cols()) = means.transpose();
  gram.bottomRightCorner(X.cols(), X.cols()).noalias() = X.transpose() * X / static_cast<double>(n);
  return gram;
}

}  // namespace

GlmFit fit_weighted_l1(LossKind kind, const Matrix& X, const Vector& y,
                       const PenaltySpec& penalty, const SolverOptions& opt,
                       const GlmFit* warm_start) {
  return fit_core(kind, X, y, penalty, opt, warm_start, nullptr);
}

double lambda_max(LossKind kind, const Matrix& X, const Vector& y,
                  const Vector& weights, const SolverOptions& options) {
  PenaltySpec null_pen{0.0, weights};
  for (Index j = 0; j < weights.size(); ++j) {
    if (weights[j] > 0.0) null_pen.weights[j] = kInfWeight;
  }
  const GlmFit null_fit = fit_weighted_l1(kind, X, y, null_pen, options);
  const Vector grad = loss_gradient(kind, X, y, null_fit.intercept, null_fit.coefficients);
  double lmax = 0.0;
  for (Index j = 0; j < weights.size(); ++j) {
    const double w = weights[j];
    if (w > 0.0 && std::isfinite(w)) {
      lmax = std::max(lmax, (std::abs(grad[j + 1]) + options.kkt_tol) / w);
    }
  }
  // Padded by the KKT tolerance of the null fit.
  return lmax;
}

std::vector<double> geometric_grid(double hi, double min_ratio, int n) {
  if (n < 1) throw ConfigError("grid size must be positive");
  std::vector<double> grid(static_cast<size_t>(n));
  if (n == 1) {
    grid[0] = hi;
    return grid;
  }
  const double step = std::log(min_ratio) / static_cast<double>(n - 1);
  for (int k = 0; k < n; ++k) grid[static_cast<size_t>(k)] = hi * std::exp(step * k);
  return grid;
}

std::vector<PathPoint> regularization_path(LossKind kind, const Matrix& X, const Vector& y,
                                           const Vector& weights, int n_lambda,
                                           double lambda_min_ratio,
                                           const SolverOptions& options,
                                           const std::vector<double>& lambdas) {
  std::vector<double> grid = lambdas;
  if (grid.empty()) {
    if (n_lambda < 2) throw ConfigError("regularization path needs n_lambda >= 2");
    if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0)) {
      throw ConfigError("lambda_min_ratio must lie in (0, 1)");
    }
    grid = geometric_grid(lambda_max(kind, X, y, weights, options), lambda_min_ratio, n_lambda);
  }
  std::vector<PathPoint> path;
  path.reserve(grid.size());
  Matrix gram;
  if (kind == LossKind::kLinear && X.rows() >= X.cols()) gram = intercept_gram(X);
  const Matrix* gram_ptr = gram.size() > 0 ? &gram : nullptr;
  const GlmFit* warm = nullptr;
  for (double lambda : grid) {
    PenaltySpec pen{lambda, weights};
    path.push_back({lambda, fit_core(kind, X, y, pen, options, warm, gram_ptr)});
    warm = &path.back().fit;
  }
  return path;
}

}  // namespace pass

namespace pass {

GlmFit fit_logistic_newton(const Matrix& X, const Vector& y, const SolverOptions& opt) {
  validate_problem(LossKind::kLogistic, X, y, PenaltySpec{0.0, Vector::Zero(X.cols())},
                   opt.fractional_labels);
  const Index n = X.rows();
  const Index p = X.cols();
  const Index k = p + (opt.fit_intercept ? 1 : 0);
  Matrix design(n, k);
  if (opt.fit_intercept) {
    design.col(0).setOnes();
    design.rightCols(p) = X;
  } else {
    design = X;
  }

  auto loss_at = [&](const Vector& theta) {
    const Vector eta = design * theta;
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      total += logistic_loss(y[i], std::clamp(eta[i], -opt.eta_cap, opt.eta_cap));
    }
    return total / static_cast<double>(n);
  };

  Vector theta = Vector::Zero(k);
  if (opt.fit_intercept) theta[0] = null_intercept(LossKind::kLogistic, y, opt);
  double current = loss_at(theta);
  GlmFit fit;
  for (int iter = 0; iter < opt.max_outer; ++iter) {
    fit.n_iterations = iter + 1;
    const Vector eta = design * theta;
    Vector grad_w(n);
    Vector curv(n);
    for (Index i = 0; i < n; ++i) {
      const double mu = sigmoid(std::clamp(eta[i], -opt.eta_cap, opt.eta_cap));
      grad_w[i] = mu - y[i];
      curv[i] = std::max(mu * (1.0 - mu), opt.min_working_weight);
    }
    const Vector grad = design.transpose() * grad_w / static_cast<double>(n);
    const Matrix hess =
        design.transpose() * curv.asDiagonal() * design / static_cast<double>(n);
    Vector step = hess.completeOrthogonalDecomposition().solve(grad);
    if (!step.allFinite()) throw SolverError("Newton step is not finite");

    // Step halving keeps the (clamped) loss non-increasing.
    double scale = 1.0;
    Vector candidate = theta - step;
    double next = loss_at(candidate);
    while (next > current + 1e-15 && scale > 1e-10) {
      scale *= 0.5;
      candidate = theta - scale * step;
      next = loss_at(candidate);
    }
    const double change = (scale * step).cwiseAbs().maxCoeff();
    if (next <= current + 1e-15) {
      theta = candidate;
      current = next;
    }
    if (change < 1e-12 || grad.cwiseAbs().maxCoeff() < 1e-12) {
      fit.converged = true;
      break;
    }
  }
  fit.intercept = opt.fit_intercept ? theta[0] : 0.0;
  fit.coefficients = theta.tail(p);
  const Vector eta = design * theta;
  fit.eta_clamped = n > 0 && eta.cwiseAbs().maxCoeff() >= opt.eta_cap;
  fit.loss_value = smooth_loss(LossKind::kLogistic, y, eta);
  fit.objective = fit.loss_value;
  fit.kkt_max_violation =
      kkt_check(fit, X, y, PenaltySpec{0.0, Vector::Zero(p)}, LossKind::kLogistic,
                opt.fit_intercept);
  return fit;
}

}  // namespace pass
