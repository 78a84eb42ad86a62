#include "pass/model.hpp"

#include <array>
#include <utility>

namespace pass {
namespace {

constexpr std::array<std::pair<MethodTag, const char*>, 8> kNames{{
    {MethodTag::kLasso, "lasso"},
    {MethodTag::kAlasso, "alasso"},
    {MethodTag::kSsPrior, "ss_prior"},
    {MethodTag::kPlasso1, "plasso1"},
    {MethodTag::kPlasso2, "plasso2"},
    {MethodTag::kUlasso, "ulasso"},
    {MethodTag::kSsUlasso, "ss_ulasso"},
    {MethodTag::kPass, "pass"},
}};

}  // namespace

std::string to_string(MethodTag tag) {
  for (const auto& [t, name] : kNames) {
    if (t == tag) return name;
  }
  return "unknown";
}

MethodTag parse_method(const std::string& name) {
  for (const auto& [t, n] : kNames) {
    if (name == n) return t;
  }
  throw ConfigError("unknown method '" + name + "'");
}

double Coefficients::linear_predictor(double s, const Eigen::Ref<const Vector>& x) const {
  if (x.size() != beta.size()) throw DataError("feature vector length does not match model");
  return zeta + gamma.value_or(0.0) * s + x.dot(beta);
}

Vector Coefficients::linear_predictor(const Vector& S, const Matrix& X) const {
  if (X.cols() != beta.size()) throw DataError("feature matrix width does not match model");
  if (S.size() != X.rows()) throw DataError("surrogate length does not match rows");
  Vector eta(X.rows());
  for (Index i = 0; i < X.rows(); ++i) eta[i] = linear_predictor(S[i], X.row(i).transpose());
  return eta;
}

double predict_prob(const Coefficients& coef, double s, const Eigen::Ref<const Vector>& x) {
  return sigmoid(coef.linear_predictor(s, x));
}

}  // namespace pass
