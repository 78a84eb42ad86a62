#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "pass/eval.hpp"
#include "pass/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace pass;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

Coefficients truth_coefficients(const TruthOracle& t) {
  Coefficients c;
  c.zeta = t.zeta0;
  c.gamma = t.gamma0;
  c.beta = t.beta0;
  return c;
}

}  // namespace

TEST_CASE("auc: worked examples") {
  CHECK(auc(vec({1, 2, 3}), vec({0, 0, 1})) == 1.0);
  CHECK(auc(vec({5, 5, 5, 5}), vec({0, 1, 0, 1})) == 0.5);
  CHECK(auc(vec({3, 1, 2, 4}), vec({0, 1, 0, 1})) == 0.5);
  CHECK(auc(vec({0.1, 0.4, 0.35, 0.8}), vec({0, 0, 1, 1})) == 0.75);
}

TEST_CASE("auc: errors") {
  CHECK_THROWS_AS(auc(vec({1, 2}), vec({1, 1})), DataError);
  CHECK_THROWS_AS(auc(vec({1, 2}), vec({1, 0, 1})), DataError);
  CHECK_THROWS_AS(auc(vec({1, 2}), vec({1, 0.5})), DataError);
}

TEST_CASE("auc: brute force, monotone invariance and negation on random inputs") {
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<int> size(2, 200);
  std::uniform_int_distribution<int> level(0, 9);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = size(gen);
    Vector s(m), y(m);
    for (Index i = 0; i < m; ++i) {
      s[i] = trial % 2 == 0 ? level(gen) : std::normal_distribution<double>()(gen);
      y[i] = coin(gen) ? 1.0 : 0.0;
    }
    y[0] = 1.0;
    y[1] = 0.0;
    CHECK(auc(s, y) == oracle::pairwise_auc(s, y));
    const Vector t = s.unaryExpr([](double v) { return std::exp(3.0 * v); });
    CHECK(auc(t, y) == doctest::Approx(auc(s, y)).epsilon(1e-15));
    if (trial % 2 == 1) CHECK(auc(s, y) + auc(-s, y) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("bss: worked examples") {
  CHECK(bss(vec({0.8, 0.2}), vec({1, 0})) == doctest::Approx(0.84).epsilon(1e-14));
  CHECK(bss(vec({0.5, 0.5}), vec({1, 0})) == 0.0);
  CHECK(bss(vec({1, 0, 0}), vec({1, 0, 0})) == 1.0);
  const Vector y = vec({1, 0, 0, 1, 1});
  CHECK(bss(Vector::Constant(5, 0.6), y) == 0.0);
  CHECK(bss(vec({0, 1, 1, 0, 0}), y) <= 1.0);
  CHECK_THROWS_AS(bss(vec({0.3, 0.3}), vec({1, 1})), DataError);
}

TEST_CASE("excess_risk and mse_p against direct summation on a Scenario-I test draw") {
  const Simulation sim = generate(ScenarioSpec{ScenarioId::I, 10, 50, 12, 4, 5000});
  const Vector eta0 = true_predictors(sim.truth, sim.test);
  const Vector y = sim.test.labels;
  CHECK(excess_risk(eta0, eta0, y) == 0.0);
  CHECK(mse_p(eta0, eta0) == 0.0);
  const Coefficients truth = truth_coefficients(sim.truth);
  CHECK(excess_risk(truth, sim.test, sim.truth) == 0.0);
  CHECK(mse_p(truth, sim.test, sim.truth) == 0.0);

  const Vector shifted = eta0.array() + 0.1;
  double direct = 0.0;
  for (Index i = 0; i < y.size(); ++i)
    direct += logistic_loss(y[i], shifted[i]) - logistic_loss(y[i], eta0[i]);
  direct /= static_cast<double>(y.size());
  CHECK(excess_risk(shifted, eta0, y) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(excess_risk(shifted, eta0, y) >= -0.01);

  // pi(eta_hat) = min(pi(eta0) + 0.1, 1 - 1e-12), by direct summation.
  Vector hat(y.size());
  double expected = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    const double p0 = sigmoid(eta0[i]);
    const double p1 = std::min(p0 + 0.1, 1.0 - 1e-12);
    hat[i] = std::log(p1 / (1.0 - p1));
    expected += (sigmoid(hat[i]) - p0) * (sigmoid(hat[i]) - p0);
  }
  expected /= static_cast<double>(y.size());
  CHECK(mse_p(hat, eta0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(mse_p(hat, eta0) <= 0.01 + 1e-12);
  CHECK(mse_p(hat, eta0) >= 0.0);
}

TEST_CASE("evaluate: metric availability") {
  const Simulation sim = generate(ScenarioSpec{ScenarioId::I, 10, 50, 12, 5, 400});
  const Coefficients c = truth_coefficients(sim.truth);
  const MetricsReport bare = evaluate(c, sim.test, nullptr);
  CHECK(bare.auc.has_value());
  CHECK_FALSE(bare.er.has_value());
  CHECK_FALSE(bare.mse_p.has_value());
  CHECK_FALSE(bare.bss.has_value());
  const MetricsReport full = evaluate(c, sim.test, &sim.truth, true);
  CHECK(full.er.has_value());
  CHECK(full.mse_p.has_value());
  CHECK(full.bss.has_value());
  CHECK(full.n_eval == 400);
  CHECK(full.values().size() == 4);
}

TEST_CASE("make_folds: balance, determinism, stratification, fallback") {
  const Vector ten = Vector::Zero(10);
  Vector labels = ten;
  for (Index i = 0; i < 5; ++i) labels[i] = 1.0;
  const FoldAssignment f = make_folds(labels, 5, 3);
  for (int k = 0; k < 5; ++k) CHECK(f.test_rows(k).size() == 2);
  CHECK(make_folds(labels, 5, 3).fold == f.fold);

  const Vector y = vec({1, 1, 1, 1, 1, 1, 0, 0, 0, 0});
  const FoldAssignment s = make_folds(y, 2, 9);
  for (int k = 0; k < 2; ++k) {
    int ones = 0;
    for (Index i : s.test_rows(k)) ones += y[i] == 1.0;
    CHECK(ones == 3);
    CHECK(s.test_rows(k).size() == 5);
  }
  // Folds partition the rows.
  std::vector<int> seen(10, 0);
  for (int k = 0; k < 2; ++k)
    for (Index i : s.test_rows(k)) ++seen[static_cast<size_t>(i)];
  CHECK(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
  CHECK(s.train_rows(0).size() == 5);

  // Only 2 positives for 5 folds: unstratified with a warning.
  const Vector rare = vec({1, 1, 0, 0, 0, 0, 0, 0, 0, 0});
  const FoldAssignment r = make_folds(rare, 5, 1);
  CHECK_FALSE(r.stratified);
  CHECK_FALSE(r.warnings.empty());
  CHECK_THROWS_AS(make_folds(rare, 11, 1), DataError);
}

TEST_CASE("make_folds: per-fold class counts within 1 of proportional") {
  std::mt19937_64 gen(2);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 20; ++trial) {
    Vector y(97);
    for (Index i = 0; i < 97; ++i) y[i] = coin(gen) ? 1.0 : 0.0;
    const double pos = y.sum();
    if (pos < 10) continue;
    const FoldAssignment f = make_folds(y, 10, static_cast<std::uint64_t>(trial));
    for (int k = 0; k < 10; ++k) {
      double ones = 0.0;
      for (Index i : f.test_rows(k)) ones += y[i];
      CHECK(std::abs(ones - pos / 10.0) <= 1.0);
    }
  }
}

TEST_CASE("aggregate_replicates: worked examples") {
  MetricsReport a;
  a.auc = 0.8;
  MetricsReport b;
  b.auc = 0.9;
  const AggregateReport one = aggregate_replicates({a});
  CHECK(one.metrics.at("auc").mean == 0.8);
  CHECK_FALSE(one.metrics.at("auc").se_defined);
  const AggregateReport two = aggregate_replicates({a, b});
  CHECK(two.metrics.at("auc").mean == doctest::Approx(0.85).epsilon(1e-15));
  CHECK(two.metrics.at("auc").se == doctest::Approx(0.05).epsilon(1e-12));
  const AggregateReport swapped = aggregate_replicates({b, a});
  CHECK(swapped.metrics.at("auc").mean == two.metrics.at("auc").mean);
  CHECK(swapped.metrics.at("auc").se == two.metrics.at("auc").se);

  MetricsReport c;
  c.auc = 0.7;
  c.er = 0.1;
  CHECK_THROWS_AS(aggregate_replicates({a, c}), DataError);
  CHECK_THROWS_AS(aggregate_replicates({}), DataError);
}
