#pragma once

#include "pass/common.hpp"
#include "pass/data.hpp"
#include "pass/model.hpp"
#include "pass/simgen.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pass {

// Concordance probability, ties counted 1/2, via mid-ranks.
double auc(const Vector& scores, const Vector& labels);

// Mean of l(Y, eta_hat) - l(Y, eta_true).
double excess_risk(const Vector& eta_hat, const Vector& eta_true, const Vector& labels);
// Mean of (pi(eta_hat) - pi(eta_true))^2.
double mse_p(const Vector& eta_hat, const Vector& eta_true);
// 1 - mean (Y - prob)^2 / mean (Y - mean Y)^2.
double bss(const Vector& prob, const Vector& labels);

// Linear predictors of the truth on every row of `test`.
Vector true_predictors(const TruthOracle& oracle, const Dataset& test);

double excess_risk(const Coefficients& fit, const Dataset& test, const TruthOracle& oracle);
double mse_p(const Coefficients& fit, const Dataset& test, const TruthOracle& oracle);
double bss(const Coefficients& fit, const Dataset& validation);

struct MetricsReport {
  std::optional<double> auc;
  std::optional<double> er;
  std::optional<double> mse_p;
  std::optional<double> bss;
  Index n_eval = 0;

  std::map<std::string, double> values() const;
};

// AUC always; ER and MSE-P when an oracle is given; BSS when requested.
MetricsReport evaluate(const Coefficients& fit, const Dataset& test,
                       const TruthOracle* oracle, bool with_bss = false);

struct FoldAssignment {
  std::vector<int> fold;  // per labeled row
  int n_folds = 0;
  std::uint64_t seed = 0;
  bool stratified = true;
  std::vector<std::string> warnings;

  std::vector<Index> train_rows(int k) const;
  std::vector<Index> test_rows(int k) const;
};

FoldAssignment make_folds(const Vector& labels, int n_folds, std::uint64_t seed,
                          bool stratified = true);

struct MetricSummary {
  double mean = 0.0;
  double se = 0.0;
  bool se_defined = false;
  std::vector<double> values;
};

struct AggregateReport {
  std::map<std::string, MetricSummary> metrics;
  Index replicates = 0;
};

// Mean and standard error (sample sd / sqrt(R)) per metric.
AggregateReport aggregate_replicates(const std::vector<MetricsReport>& reports);

}  // namespace pass
