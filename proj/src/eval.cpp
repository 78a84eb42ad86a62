#include "pass/eval.hpp"

#include "pass/rng.hpp"
#include "pass/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pass {
namespace {

void check_binary(const Vector& labels, Index& positives) {
  positives = 0;
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1.0) {
      ++positives;
    } else if (labels[i] != 0.0) {
      throw DataError("labels must be 0 or 1");
    }
  }
}

template <typename Engine>
void shuffle(std::vector<Index>& v, Engine& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

double auc(const Vector& scores, const Vector& labels) {
  if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
  Index positives = 0;
  check_binary(labels, positives);
  const Index m = labels.size();
  const Index negatives = m - positives;
  if (positives == 0 || negatives == 0) throw DataError("AUC needs both classes");

  std::vector<Index> order(static_cast<size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores[a] < scores[b]; });
  // Twice the mid-rank keeps the sum in exact integer arithmetic.
  long double rank_sum_x2 = 0.0L;
  size_t start = 0;
  while (start < order.size()) {
    size_t end = start + 1;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) ++end;
    const long long twice_mid = static_cast<long long>(start + 1 + end);
    for (size_t k = start; k < end; ++k) {
      if (labels[order[k]] == 1.0) rank_sum_x2 += static_cast<long double>(twice_mid);
    }
    start = end;
  }
  const long double u = rank_sum_x2 / 2.0L -
                        static_cast<long double>(positives) * (positives + 1) / 2.0L;
  return static_cast<double>(u / (static_cast<long double>(positives) * negatives));
}

double excess_risk(const Vector& eta_hat, const Vector& eta_true, const Vector& labels) {
  if (eta_hat.size() != labels.size() || eta_true.size() != labels.size()) {
    throw DataError("excess risk inputs differ in length");
  }
  double total = 0.0;
  for (Index i = 0; i < labels.size(); ++i) {
    total += logistic_loss(labels[i], eta_hat[i]) - logistic_loss(labels[i], eta_true[i]);
  }
  return total / static_cast<double>(labels.size());
}

double mse_p(const Vector& eta_hat, const Vector& eta_true) {
  if (eta_hat.size() != eta_true.size()) throw DataError("MSE-P inputs differ in length");
  double total = 0.0;
  for (Index i = 0; i < eta_hat.size(); ++i) {
    const double d = sigmoid(eta_hat[i]) - sigmoid(eta_true[i]);
    total += d * d;
  }
  return total / static_cast<double>(eta_hat.size());
}

double bss(const Vector& prob, const Vector& labels) {
  if (prob.size() != labels.size()) throw DataError("BSS inputs differ in length");
  Index positives = 0;
  check_binary(labels, positives);
  const double ybar = labels.mean();
  const double denom = (labels.array() - ybar).square().mean();
  if (positives == 0 || positives == labels.size() || denom == 0.0) {
    throw DataError("BSS needs both classes in the validation set");
  }
  const double num = (labels - prob).array().square().mean();
  return 1.0 - num / denom;
}

Vector true_predictors(const TruthOracle& oracle, const Dataset& test) {
  Vector eta(test.n_obs());
  for (Index i = 0; i < test.n_obs(); ++i) {
    eta[i] = oracle.linear_predictor(test.surrogate[i], test.features.row(i).transpose());
  }
  return eta;
}

namespace {

struct LabeledPredictions {
  Vector eta_hat;
  Vector eta_true;
  Vector labels;
};

LabeledPredictions labeled_predictions(const Coefficients& fit, const Dataset& test,
                                       const TruthOracle* oracle) {
  const LabeledData d = test.labeled();
  if (d.n() == 0) throw DataError("evaluation set has no labels");
  LabeledPredictions out;
  out.eta_hat = fit.linear_predictor(d.S, d.X);
  out.labels = d.Y;
  if (oracle != nullptr) {
    out.eta_true.resize(d.n());
    for (Index i = 0; i < d.n(); ++i) {
      out.eta_true[i] = oracle->linear_predictor(d.S[i], d.X.row(i).transpose());
    }
  }
  return out;
}

}  // namespace

double excess_risk(const Coefficients& fit, const Dataset& test, const TruthOracle& oracle) {
  const auto lp = labeled_predictions(fit, test, &oracle);
  return excess_risk(lp.eta_hat, lp.eta_true, lp.labels);
}

double mse_p(const Coefficients& fit, const Dataset& test, const TruthOracle& oracle) {
  const Vector eta_hat = fit.linear_predictor(test.surrogate, test.features);
  return mse_p(eta_hat, true_predictors(oracle, test));
}

double bss(const Coefficients& fit, const Dataset& validation) {
  const LabeledData d = validation.labeled();
  const Vector eta = fit.linear_predictor(d.S, d.X);
  return bss(eta.unaryExpr(&sigmoid), d.Y);
}

std::map<std::string, double> MetricsReport::values() const {
  std::map<std::string, double> out;
  if (auc) out["auc"] = *auc;
  if (er) out["er"] = *er;
  if (mse_p) out["mse_p"] = *mse_p;
  if (bss) out["bss"] = *bss;
  return out;
}

MetricsReport evaluate(const Coefficients& fit, const Dataset& test, const TruthOracle* oracle,
                       bool with_bss) {
  const auto lp = labeled_predictions(fit, test, oracle);
  MetricsReport report;
  report.n_eval = lp.labels.size();
  report.auc = auc(lp.eta_hat, lp.labels);
  if (oracle != nullptr) {
    report.er = excess_risk(lp.eta_hat, lp.eta_true, lp.labels);
    report.mse_p = mse_p(lp.eta_hat, lp.eta_true);
  }
  if (with_bss) report.bss = bss(lp.eta_hat.unaryExpr(&sigmoid), lp.labels);
  return report;
}

std::vector<Index> FoldAssignment::train_rows(int k) const {
  std::vector<Index> rows;
  for (size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] != k) rows.push_back(static_cast<Index>(i));
  }
  return rows;
}

std::vector<Index> FoldAssignment::test_rows(int k) const {
  std::vector<Index> rows;
  for (size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] == k) rows.push_back(static_cast<Index>(i));
  }
  return rows;
}

FoldAssignment make_folds(const Vector& labels, int n_folds, std::uint64_t seed,
                          bool stratified) {
  const Index m = labels.size();
  if (n_folds < 2) throw ConfigError("need at least 2 folds");
  if (m < n_folds) throw DataError("fewer labeled rows than folds");
  FoldAssignment fa;
  fa.n_folds = n_folds;
  fa.seed = seed;
  fa.fold.assign(static_cast<size_t>(m), 0);

  std::vector<Index> ones;
  std::vector<Index> zeros;
  for (Index i = 0; i < m; ++i) (labels[i] == 1.0 ? ones : zeros).push_back(i);
  if (stratified && (static_cast<Index>(ones.size()) < n_folds ||
                     static_cast<Index>(zeros.size()) < n_folds)) {
    stratified = false;
    fa.warnings.push_back("a class has fewer members than folds; using unstratified folds");
  }
  fa.stratified = stratified;

  Rng rng(derive_seed(seed, 0xF01D));
  std::vector<std::vector<Index>> groups;
  if (stratified) {
    groups = {std::move(zeros), std::move(ones)};
  } else {
    std::vector<Index> all(static_cast<size_t>(m));
    std::iota(all.begin(), all.end(), Index{0});
    groups = {std::move(all)};
  }
  // Dealing consecutive positions round-robin across groups balances both
  // the fold sizes and the per-fold class counts.
  size_t position = 0;
  for (auto& g : groups) {
    shuffle(g, rng);
    for (Index row : g) {
      fa.fold[static_cast<size_t>(row)] = static_cast<int>(position % static_cast<size_t>(n_folds));
      ++position;
    }
  }
  return fa;
}

AggregateReport aggregate_replicates(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw DataError("no replicates to aggregate");
  AggregateReport agg;
  agg.replicates = static_cast<Index>(reports.size());
  const auto keys = reports.front().values();
  for (const auto& r : reports) {
    const auto v = r.values();
    if (v.size() != keys.size() ||
        !std::equal(v.begin(), v.end(), keys.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw DataError("replicates report inconsistent metric sets");
    }
  }
  for (const auto& [name, unused] : keys) {
    MetricSummary s;
    for (const auto& r : reports) s.values.push_back(r.values().at(name));
    const double R = static_cast<double>(s.values.size());
    s.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / R;
    if (s.values.size() > 1) {
      double ss = 0.0;
      for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
      s.se = std::sqrt(ss / (R - 1.0)) / std::sqrt(R);
      s.se_defined = true;
    }
    agg.metrics.emplace(name, std::move(s));
  }
  return agg;
}

}  // namespace pass
