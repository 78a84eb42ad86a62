#pragma once

#include "pass/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pass {

enum class MethodTag { kLasso, kAlasso, kSsPrior, kPlasso1, kPlasso2, kUlasso, kSsUlasso, kPass };

std::string to_string(MethodTag tag);
MethodTag parse_method(const std::string& name);

// Fitted phenotype model: logit P(Y=1) = zeta + gamma*S + x'beta.
// ULASSO carries no surrogate coefficient.
struct Coefficients {
  double zeta = 0.0;
  std::optional<double> gamma;
  Vector beta;
  MethodTag method = MethodTag::kLasso;
  std::vector<std::string> warnings;

  double linear_predictor(double s, const Eigen::Ref<const Vector>& x) const;
  Vector linear_predictor(const Vector& S, const Matrix& X) const;
};

double predict_prob(const Coefficients& coef, double s, const Eigen::Ref<const Vector>& x);

}  // namespace pass
