#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pass {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Data/contract violations (bad input files, invalid arguments on data).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or CLI usage.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure inside a fit.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Labeled subset used by every supervised / semi-supervised fit.
struct LabeledData {
  Matrix X;  // n x p
  Vector S;  // n
  Vector Y;  // n, entries 0/1

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }
};

// Overflow-safe logistic function pi(t) = 1 / (1 + exp(-t)).
inline double sigmoid(double t) {
  if (t >= 0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace pass
