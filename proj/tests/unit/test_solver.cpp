#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "pass/solver.hpp"

#include <cmath>
#include <random>

using namespace pass;

namespace {

struct Problem {
  Matrix X;
  Vector y;
};

Problem random_problem(LossKind kind, Index n, Index p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud;
  Problem pr{Matrix(n, p), Vector(n)};
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) pr.X(i, j) = nd(gen);
  Vector truth(p);
  for (Index j = 0; j < p; ++j) truth[j] = (j % 2 == 0 ? 1.0 : -0.5) * nd(gen);
  for (Index i = 0; i < n; ++i) {
    const double eta = 0.3 + pr.X.row(i).dot(truth);
    pr.y[i] = kind == LossKind::kLinear ? eta + nd(gen) : (ud(gen) < sigmoid(eta) ? 1.0 : 0.0);
  }
  return pr;
}

}  // namespace

TEST_CASE("logistic_loss: reference values") {
  CHECK(logistic_loss(0.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(logistic_loss(1.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const double big = logistic_loss(1.0, 1000.0);
  CHECK(std::isfinite(big));
  CHECK(big == doctest::Approx(0.0).epsilon(1e-300));
  CHECK(logistic_loss(0.0, -1000.0) < 1e-300);
  CHECK(logistic_loss(0.0, 1000.0) == doctest::Approx(1000.0));
}

TEST_CASE("linear: huge lambda zeroes penalized coefficients, intercept = mean(y)") {
  const Problem pr = random_problem(LossKind::kLinear, 50, 4, 1);
  const GlmFit fit = fit_weighted_l1_linear(pr.X, pr.y, PenaltySpec::uniform(4, 1e6));
  CHECK(fit.coefficients.cwiseAbs().maxCoeff() == 0.0);
  CHECK(fit.intercept == doctest::Approx(pr.y.mean()).epsilon(1e-12));
}

TEST_CASE("linear: single standardized covariate, no intercept, is a soft threshold") {
  // With (1/n)||x||^2 = 1 the minimizer of (1/n)||y - xc||^2 + lam w |c| is
  // soft(x'y/n, lam w / 2). The objective has no 1/2 factor, hence the halving.
  std::mt19937_64 gen(4);
  std::normal_distribution<double> nd;
  const Index n = 64;
  Matrix X(n, 1);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    X(i, 0) = nd(gen);
    y[i] = 0.7 * X(i, 0) + nd(gen);
  }
  X.col(0) /= std::sqrt(X.col(0).squaredNorm() / n);
  SolverOptions opt;
  opt.fit_intercept = false;
  for (double lam : {0.0, 0.1, 0.5, 1.0, 5.0}) {
    const double z = X.col(0).dot(y) / n;
    const double t = lam / 2.0;
    const double expected = z > t ? z - t : (z < -t ? z + t : 0.0);
    const GlmFit fit = fit_weighted_l1(LossKind::kLinear, X, y, PenaltySpec::uniform(1, lam), opt);
    CHECK(fit.coefficients[0] == doctest::Approx(expected).epsilon(1e-10));
    // And against the grid oracle with no intercept (y is not centered, so
    // compare objective values at the two points instead).
    auto obj = [&](double c) {
      return (y - X.col(0) * c).squaredNorm() / n + lam * std::abs(c);
    };
    for (double d : {-1e-4, 1e-4}) CHECK(obj(fit.coefficients[0]) <= obj(fit.coefficients[0] + d));
  }
}

TEST_CASE("linear: p=3 random problem matches the grid oracle") {
  const Problem pr = random_problem(LossKind::kLinear, 60, 3, 7);
  const Vector w = Vector::Ones(3);
  const GlmFit fit = fit_weighted_l1_linear(pr.X, pr.y, PenaltySpec{0.1, w});
  const auto ref = oracle::grid_search(LossKind::kLinear, pr.X, pr.y, 0.1, w);
  CHECK((fit.coefficients - ref.coefficients).cwiseAbs().maxCoeff() < 1e-4);
  CHECK(fit.intercept == doctest::Approx(ref.intercept).epsilon(1e-4));
}

TEST_CASE("logistic: all y = 1 drives the intercept to the cap") {
  const Problem pr = random_problem(LossKind::kLogistic, 30, 2, 2);
  const Vector ones = Vector::Ones(30);
  const GlmFit fit = fit_weighted_l1_logistic(pr.X, ones, PenaltySpec::uniform(2, 1e3));
  CHECK(fit.coefficients.cwiseAbs().maxCoeff() == 0.0);
  CHECK(fit.intercept == doctest::Approx(30.0));
  CHECK(fit.eta_clamped);
}

TEST_CASE("logistic: lambda = 0, p = 1 matches a Newton oracle") {
  const Problem pr = random_problem(LossKind::kLogistic, 200, 1, 3);
  const GlmFit fit = fit_weighted_l1_logistic(pr.X, pr.y, PenaltySpec::uniform(1, 0.0));
  const Vector theta = oracle::newton_logistic(pr.X, pr.y);
  CHECK(fit.intercept == doctest::Approx(theta[0]).epsilon(1e-5));
  CHECK(fit.coefficients[0] == doctest::Approx(theta[1]).epsilon(1e-5));
}

TEST_CASE("logistic: weights (1, 0, 2) match the grid oracle, weight-0 coordinate unshrunk") {
  const Problem pr = random_problem(LossKind::kLogistic, 120, 3, 5);
  Vector w(3);
  w << 1.0, 0.0, 2.0;
  const GlmFit fit = fit_weighted_l1_logistic(pr.X, pr.y, PenaltySpec{0.05, w});
  const auto ref = oracle::grid_search(LossKind::kLogistic, pr.X, pr.y, 0.05, w);
  CHECK((fit.coefficients - ref.coefficients).cwiseAbs().maxCoeff() < 1e-4);
  // The unpenalized coordinate satisfies exact stationarity.
  const Vector g = loss_gradient(LossKind::kLogistic, pr.X, pr.y, fit.intercept, fit.coefficients);
  CHECK(std::abs(g[2]) < 1e-7);
}

TEST_CASE("fit_logistic_newton agrees with the test oracle") {
  const Problem pr = random_problem(LossKind::kLogistic, 150, 3, 8);
  const GlmFit fit = fit_logistic_newton(pr.X, pr.y);
  const Vector theta = oracle::newton_logistic(pr.X, pr.y);
  CHECK(fit.intercept == doctest::Approx(theta[0]).epsilon(1e-8));
  for (Index j = 0; j < 3; ++j) CHECK(fit.coefficients[j] == doctest::Approx(theta[j + 1]).epsilon(1e-8));
}

TEST_CASE("kkt_check: detects a perturbed coordinate; zero for lambda = 0 optimum") {
  const Problem pr = random_problem(LossKind::kLogistic, 100, 4, 9);
  const PenaltySpec pen = PenaltySpec::uniform(4, 0.02);
  GlmFit fit = fit_weighted_l1_logistic(pr.X, pr.y, pen);
  CHECK(kkt_check(fit, pr.X, pr.y, pen, LossKind::kLogistic, true) <= 1e-6);
  fit.coefficients[0] += 0.1;
  CHECK(kkt_check(fit, pr.X, pr.y, pen, LossKind::kLogistic, true) > 1e-3);

  const PenaltySpec none = PenaltySpec::uniform(4, 0.0);
  const GlmFit free_fit = fit_weighted_l1_logistic(pr.X, pr.y, none);
  const Vector g = loss_gradient(LossKind::kLogistic, pr.X, pr.y, free_fit.intercept,
                                 free_fit.coefficients);
  CHECK(kkt_check(free_fit, pr.X, pr.y, none, LossKind::kLogistic, true) ==
        doctest::Approx(g.cwiseAbs().maxCoeff()));
  CHECK(free_fit.kkt_max_violation < 1e-7);
}

TEST_CASE("infinite weights pin coordinates at exactly zero") {
  const Problem pr = random_problem(LossKind::kLogistic, 80, 3, 10);
  Vector w(3);
  w << 0.0, kInfWeight, 1.0;
  const GlmFit fit = fit_weighted_l1_logistic(pr.X, pr.y, PenaltySpec{0.01, w});
  CHECK(fit.coefficients[1] == 0.0);
  CHECK(fit.kkt_max_violation <= 1e-6);
}

TEST_CASE("penalty validation") {
  const Problem pr = random_problem(LossKind::kLinear, 10, 2, 1);
  CHECK_THROWS_AS(fit_weighted_l1_linear(pr.X, pr.y, PenaltySpec{-1.0, Vector::Ones(2)}), DataError);
  CHECK_THROWS_AS(fit_weighted_l1_linear(pr.X, pr.y, PenaltySpec{1.0, Vector::Ones(3)}), DataError);
  Vector nanw = Vector::Ones(2);
  nanw[0] = NAN;
  CHECK_THROWS_AS(fit_weighted_l1_linear(pr.X, pr.y, PenaltySpec{1.0, nanw}), DataError);
  Vector bad = pr.y;
  bad[0] = 0.5;
  CHECK_THROWS_AS(fit_weighted_l1_logistic(pr.X, bad, PenaltySpec::uniform(2, 1.0)), DataError);
  CHECK_THROWS_AS(fit_weighted_l1_linear(Matrix(0, 2), Vector(0), PenaltySpec::uniform(2, 1.0)),
                  DataError);
}

TEST_CASE("regularization path: lambda_max zeroes, every fit KKT-valid, cold starts agree") {
  for (LossKind kind : {LossKind::kLinear, LossKind::kLogistic}) {
    const Problem pr = random_problem(kind, 120, 8, 21);
    const Vector w = Vector::Ones(8);
    const auto path = regularization_path(kind, pr.X, pr.y, w, 50, 1e-2);
    REQUIRE(path.size() == 50);
    CHECK(path.front().fit.coefficients.cwiseAbs().maxCoeff() == 0.0);
    // Just below lambda_max something enters.
    CHECK(path[1].fit.coefficients.cwiseAbs().maxCoeff() > 0.0);
    for (const auto& pt : path) {
      CHECK(pt.fit.kkt_max_violation <= 1e-6);
      const GlmFit cold = fit_weighted_l1(kind, pr.X, pr.y, PenaltySpec{pt.lambda, w});
      CHECK((cold.coefficients - pt.fit.coefficients).cwiseAbs().maxCoeff() < 1e-4);
    }
  }
}

TEST_CASE("gradient matches central differences") {
  for (LossKind kind : {LossKind::kLinear, LossKind::kLogistic}) {
    const Problem pr = random_problem(kind, 40, 3, 33);
    std::mt19937_64 gen(1);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 10; ++trial) {
      Vector theta(4);
      for (Index k = 0; k < 4; ++k) theta[k] = nd(gen);
      auto f = [&](const Vector& t) {
        const Vector eta = (pr.X * t.tail(3)).array() + t[0];
        return smooth_loss(kind, pr.y, eta);
      };
      const Vector g = loss_gradient(kind, pr.X, pr.y, theta[0], theta.tail(3));
      const Vector num = oracle::numeric_gradient(f, theta);
      CHECK((g - num).norm() / std::max(1.0, g.norm()) < 1e-5);
    }
  }
}

TEST_CASE("objective does not increase with more sweeps") {
  const Problem pr = random_problem(LossKind::kLinear, 80, 10, 41);
  const PenaltySpec pen = PenaltySpec::uniform(10, 0.05);
  double previous = INFINITY;
  for (int sweeps = 1; sweeps <= 12; ++sweeps) {
    SolverOptions opt;
    opt.max_inner_sweeps = sweeps;
    const GlmFit fit = fit_weighted_l1(LossKind::kLinear, pr.X, pr.y, pen, opt);
    CHECK(fit.objective <= previous + 1e-12);
    previous = fit.objective;
  }
}

TEST_CASE("weight-0 coordinates converge to the restricted unpenalized fit") {
  const Problem pr = random_problem(LossKind::kLogistic, 150, 4, 51);
  Vector w(4);
  w << 0.0, 1.0, 1.0, 0.0;
  const GlmFit fit = fit_weighted_l1_logistic(pr.X, pr.y, PenaltySpec{1e4, w});
  Matrix sub(150, 2);
  sub.col(0) = pr.X.col(0);
  sub.col(1) = pr.X.col(3);
  const Vector theta = oracle::newton_logistic(sub, pr.y);
  CHECK(fit.coefficients[1] == 0.0);
  CHECK(fit.coefficients[2] == 0.0);
  CHECK(fit.coefficients[0] == doctest::Approx(theta[1]).epsilon(1e-5));
  CHECK(fit.coefficients[3] == doctest::Approx(theta[2]).epsilon(1e-5));
}

TEST_CASE("linear scaling equivariance: (c y, c lambda) gives c times the solution") {
  const Problem pr = random_problem(LossKind::kLinear, 90, 6, 61);
  const GlmFit a = fit_weighted_l1_linear(pr.X, pr.y, PenaltySpec::uniform(6, 0.1));
  const double c = 3.5;
  const GlmFit b = fit_weighted_l1_linear(pr.X, (c * pr.y).eval(), PenaltySpec::uniform(6, 0.1 * c));
  CHECK((b.coefficients - c * a.coefficients).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("duplicated columns: deterministic output") {
  Problem pr = random_problem(LossKind::kLogistic, 70, 3, 71);
  pr.X.col(2) = pr.X.col(0);
  const PenaltySpec pen = PenaltySpec::uniform(3, 0.01);
  const GlmFit a = fit_weighted_l1_logistic(pr.X, pr.y, pen);
  const GlmFit b = fit_weighted_l1_logistic(pr.X, pr.y, pen);
  CHECK(a.coefficients == b.coefficients);
  CHECK(a.kkt_max_violation <= 1e-6);
}

TEST_CASE("fractional labels only when enabled") {
  Problem pr = random_problem(LossKind::kLogistic, 40, 2, 81);
  pr.y[0] = 0.25;
  CHECK_THROWS_AS(fit_weighted_l1_logistic(pr.X, pr.y, PenaltySpec::uniform(2, 0.01)), DataError);
  SolverOptions opt;
  opt.fractional_labels = true;
  const GlmFit fit = fit_weighted_l1(LossKind::kLogistic, pr.X, pr.y, PenaltySpec::uniform(2, 0.01), opt);
  CHECK(fit.kkt_max_violation <= 1e-6);
}
