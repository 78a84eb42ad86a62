#pragma once

#include "pass/common.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pass {

struct Log1pStep {
  std::vector<Index> columns;
  bool surrogate = false;
};

// Residualization of feature columns on (1, utilization).
struct OrthogonalizeStep {
  Index utilization_col = 0;
  std::vector<Index> columns;
  std::vector<double> intercepts;
  std::vector<double> slopes;
  bool surrogate = false;
  double surrogate_intercept = 0.0;
  double surrogate_slope = 0.0;
};

struct StandardizeStep {
  std::vector<Index> columns;
  std::vector<double> means;
  std::vector<double> scales;
};

using TransformStep = std::variant<Log1pStep, OrthogonalizeStep, StandardizeStep>;

struct TransformLog {
  std::vector<TransformStep> steps;
};

struct Dataset {
  Matrix features;                    // n_obs x p
  Vector surrogate;                   // n_obs
  std::vector<Index> labeled_index;   // rows carrying a label, increasing
  Vector labels;                      // aligned with labeled_index
  std::vector<std::string> column_names;
  std::optional<Index> utilization_col;
  std::string surrogate_name = "S";
  std::string label_name = "Y";
  TransformLog log;

  Index n_obs() const { return features.rows(); }
  Index p() const { return features.cols(); }
  Index n_labeled() const { return static_cast<Index>(labeled_index.size()); }
  bool has_labels() const { return !labeled_index.empty(); }

  // Throws DataError when an invariant is broken.
  void validate() const;

  LabeledData labeled() const;
  // Same data with only the first `n` labeled rows keeping their label.
  Dataset with_first_labels(Index n) const;
  // Same data restricted to the given rows (labels follow their rows).
  Dataset subset_rows(const std::vector<Index>& rows) const;
};

struct CsvSchema {
  std::string surrogate_col = "S";
  std::optional<std::string> label_col;
  std::optional<std::string> utilization_col;
};

Dataset load_csv(const std::string& path, const CsvSchema& schema);
Dataset parse_csv(const std::string& text, const CsvSchema& schema);
// Writes features, then surrogate, then labels (empty cell when unlabeled).
void write_csv(const Dataset& ds, const std::string& path);
std::string to_csv(const Dataset& ds);

// Shortest round-trip decimal representation.
std::string format_double(double v);

Dataset log1p_counts(const Dataset& ds, const std::vector<Index>& columns,
                     bool include_surrogate = false);
Dataset orthogonalize_against_utilization(const Dataset& ds, bool include_surrogate = false);
Dataset standardize(const Dataset& ds);
// Inverts the most recent standardization recorded in the log.
Dataset unstandardize(const Dataset& ds);

// Maps coefficients fitted on standardized features back to the scale the
// features had before the most recent standardization.
void unstandardize_coefficients(const TransformLog& log, double& intercept, Vector& beta);

// Applies every step with its recorded parameters.
Dataset replay(const TransformLog& log, const Dataset& raw);

}  // namespace pass
