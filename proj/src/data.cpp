#include "pass/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace pass {
namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("non-numeric value '" + s + "'");
  }
  return value;
}

std::string where(size_t row, size_t col) {
  return "(" + std::to_string(row) + "," + std::to_string(col) + ")";
}

void apply_log1p(const Log1pStep& step, Dataset& ds) {
  for (Index j : step.columns) {
    auto col = ds.features.col(j);
    for (Index i = 0; i < col.size(); ++i) {
      if (col[i] < 0.0) {
        throw DataError("log1p on negative value at " + where(static_cast<size_t>(i),
                                                              static_cast<size_t>(j)));
      }
      col[i] = std::log1p(col[i]);
    }
  }
  if (step.surrogate) {
    for (Index i = 0; i < ds.surrogate.size(); ++i) {
      if (ds.surrogate[i] < 0.0) throw DataError("log1p on negative surrogate value");
      ds.surrogate[i] = std::log1p(ds.surrogate[i]);
    }
  }
}

void apply_orthogonalize(const OrthogonalizeStep& step, Dataset& ds) {
  const Vector u = ds.features.col(step.utilization_col);
  for (size_t k = 0; k < step.columns.size(); ++k) {
    auto col = ds.features.col(step.columns[k]);
    for (Index i = 0; i < col.size(); ++i) {
      col[i] = col[i] - step.intercepts[k] - step.slopes[k] * u[i];
    }
  }
  if (step.surrogate) {
    for (Index i = 0; i < ds.surrogate.size(); ++i) {
      ds.surrogate[i] = ds.surrogate[i] - step.surrogate_intercept - step.surrogate_slope * u[i];
    }
  }
}

void apply_standardize(const StandardizeStep& step, Dataset& ds) {
  for (size_t k = 0; k < step.columns.size(); ++k) {
    auto col = ds.features.col(step.columns[k]);
    for (Index i = 0; i < col.size(); ++i) {
      col[i] = (col[i] - step.means[k]) / step.scales[k];
    }
  }
}

void apply_step(const TransformStep& step, Dataset& ds) {
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Log1pStep>) {
          apply_log1p(s, ds);
        } else if constexpr (std::is_same_v<T, OrthogonalizeStep>) {
          apply_orthogonalize(s, ds);
        } else {
          apply_standardize(s, ds);
        }
      },
      step);
}

// Least-squares fit of v on (1, u); returns (intercept, slope).
std::pair<double, double> ols_on_utilization(const Vector& u, const Vector& v) {
  const double ubar = u.mean();
  const double vbar = v.mean();
  const Vector uc = u.array() - ubar;
  const double suu = uc.squaredNorm();
  const double slope = uc.dot(v.array().matrix() - Vector::Constant(v.size(), vbar)) / suu;
  return {vbar - slope * ubar, slope};
}

const StandardizeStep* last_standardize(const TransformLog& log) {
  for (auto it = log.steps.rbegin(); it != log.steps.rend(); ++it) {
    if (const auto* s = std::get_if<StandardizeStep>(&*it)) return s;
  }
  return nullptr;
}

}  // namespace

void Dataset::validate() const {
  if (n_obs() < 1) throw DataError("dataset has no rows");
  if (p() < 1) throw DataError("dataset has no feature columns");
  if (surrogate.size() != n_obs()) throw DataError("surrogate length does not match rows");
  if (labels.size() != n_labeled()) throw DataError("labels do not match labeled index");
  if (!column_names.empty() && static_cast<Index>(column_names.size()) != p()) {
    throw DataError("column_names length does not match features");
  }
  std::set<Index> seen;
  for (Index i : labeled_index) {
    if (i < 0 || i >= n_obs()) throw DataError("labeled index out of range");
    if (!seen.insert(i).second) throw DataError("duplicate labeled index");
  }
  for (Index k = 0; k < labels.size(); ++k) {
    if (labels[k] != 0.0 && labels[k] != 1.0) throw DataError("label not binary");
  }
  if (!features.allFinite()) throw DataError("features contain missing or non-finite values");
  if (!surrogate.allFinite()) throw DataError("surrogate contains missing or non-finite values");
  if (utilization_col && (*utilization_col < 0 || *utilization_col >= p())) {
    throw DataError("utilization column out of range");
  }
}

LabeledData Dataset::labeled() const {
  LabeledData out;
  const Index n = n_labeled();
  out.X.resize(n, p());
  out.S.resize(n);
  out.Y = labels;
  for (Index k = 0; k < n; ++k) {
    const Index row = labeled_index[static_cast<size_t>(k)];
    out.X.row(k) = features.row(row);
    out.S[k] = surrogate[row];
  }
  return out;
}

Dataset Dataset::with_first_labels(Index n) const {
  if (n > n_labeled()) throw DataError("requested more labels than available");
  Dataset out = *this;
  out.labeled_index.resize(static_cast<size_t>(n));
  out.labels = labels.head(n);
  return out;
}

Dataset Dataset::subset_rows(const std::vector<Index>& rows) const {
  Dataset out;
  out.column_names = column_names;
  out.utilization_col = utilization_col;
  out.surrogate_name = surrogate_name;
  out.label_name = label_name;
  out.log = log;
  const Index m = static_cast<Index>(rows.size());
  out.features.resize(m, p());
  out.surrogate.resize(m);
  std::vector<double> labs;
  for (Index k = 0; k < m; ++k) {
    const Index row = rows[static_cast<size_t>(k)];
    out.features.row(k) = features.row(row);
    out.surrogate[k] = surrogate[row];
    const auto it = std::lower_bound(labeled_index.begin(), labeled_index.end(), row);
    if (it != labeled_index.end() && *it == row) {
      out.labeled_index.push_back(k);
      labs.push_back(labels[it - labeled_index.begin()]);
    }
  }
  out.labels = Eigen::Map<Vector>(labs.data(), static_cast<Index>(labs.size()));
  return out;
}

Dataset parse_csv(const std::string& text, const CsvSchema& schema) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV is empty (missing header row)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header = split_row(line);
  for (auto& h : header) h = trim(h);

  std::unordered_set<std::string> names;
  for (const auto& h : header) {
    if (!names.insert(h).second) throw DataError("duplicate column name '" + h + "'");
  }
  auto find_col = [&](const std::string& name) -> std::optional<size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<size_t>(it - header.begin());
  };
  const auto s_col = find_col(schema.surrogate_col);
  if (!s_col) throw DataError("surrogate column '" + schema.surrogate_col + "' not found");
  std::optional<size_t> y_col;
  if (schema.label_col) {
    y_col = find_col(*schema.label_col);
    if (!y_col) throw DataError("label column '" + *schema.label_col + "' not found");
  }

  Dataset ds;
  ds.surrogate_name = schema.surrogate_col;
  if (schema.label_col) ds.label_name = *schema.label_col;
  std::vector<size_t> feature_cols;
  for (size_t c = 0; c < header.size(); ++c) {
    if (c == *s_col || (y_col && c == *y_col)) continue;
    feature_cols.push_back(c);
    ds.column_names.push_back(header[c]);
  }
  if (schema.utilization_col) {
    const auto it = std::find(ds.column_names.begin(), ds.column_names.end(),
                              *schema.utilization_col);
    if (it == ds.column_names.end()) {
      throw DataError("utilization column '" + *schema.utilization_col + "' not found");
    }
    ds.utilization_col = static_cast<Index>(it - ds.column_names.begin());
  }

  std::vector<double> feature_values;
  std::vector<double> surrogate_values;
  std::vector<double> label_values;
  size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(header.size()));
    }
    auto numeric = [&](size_t c) {
      try {
        const auto v = parse_number(cells[c]);
        if (!v) throw DataError("missing value at " + where(row, c));
        return *v;
      } catch (const DataError& e) {
        const std::string msg = e.what();
        if (msg.rfind("missing", 0) == 0) throw;
        throw DataError(msg + " at " + where(row, c));
      }
    };
    for (size_t c : feature_cols) feature_values.push_back(numeric(c));
    surrogate_values.push_back(numeric(*s_col));
    if (y_col) {
      const std::string cell = trim(cells[*y_col]);
      if (!cell.empty()) {
        const double y = numeric(*y_col);
        if (y != 0.0 && y != 1.0) throw DataError("label not binary at " + where(row, *y_col));
        ds.labeled_index.push_back(static_cast<Index>(row));
        label_values.push_back(y);
      }
    }
    ++row;
  }
  const Index n_obs = static_cast<Index>(row);
  const Index p = static_cast<Index>(feature_cols.size());
  ds.features.resize(n_obs, p);
  for (Index i = 0; i < n_obs; ++i) {
    for (Index j = 0; j < p; ++j) ds.features(i, j) = feature_values[static_cast<size_t>(i * p + j)];
  }
  ds.surrogate = Eigen::Map<Vector>(surrogate_values.data(), n_obs);
  ds.labels = Eigen::Map<Vector>(label_values.data(), static_cast<Index>(label_values.size()));
  ds.validate();
  return ds;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open CSV file '" + path + "'");
  std::ostringstream buf;
  buf << file.rdbuf();
  return parse_csv(buf.str(), schema);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string to_csv(const Dataset& ds) {
  std::string out;
  for (Index j = 0; j < ds.p(); ++j) {
    out += ds.column_names.empty() ? "x" + std::to_string(j + 1)
                                   : ds.column_names[static_cast<size_t>(j)];
    out += ',';
  }
  out += ds.surrogate_name + "," + ds.label_name + "\n";
  size_t next_label = 0;
  for (Index i = 0; i < ds.n_obs(); ++i) {
    for (Index j = 0; j < ds.p(); ++j) {
      out += format_double(ds.features(i, j));
      out += ',';
    }
    out += format_double(ds.surrogate[i]);
    out += ',';
    if (next_label < ds.labeled_index.size() && ds.labeled_index[next_label] == i) {
      out += ds.labels[static_cast<Index>(next_label)] == 1.0 ? "1" : "0";
      ++next_label;
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write CSV file '" + path + "'");
  file << to_csv(ds);
}

Dataset log1p_counts(const Dataset& ds, const std::vector<Index>& columns,
                     bool include_surrogate) {
  Log1pStep step{columns, include_surrogate};
  for (Index j : columns) {
    if (j < 0 || j >= ds.p()) throw DataError("log1p column out of range");
  }
  Dataset out = ds;
  apply_log1p(step, out);
  out.log.steps.emplace_back(std::move(step));
  return out;
}

Dataset orthogonalize_against_utilization(const Dataset& ds, bool include_surrogate) {
  if (!ds.utilization_col) throw DataError("no utilization column set");
  const Index ucol = *ds.utilization_col;
  const Vector u = ds.features.col(ucol);
  if ((u.array() - u.mean()).abs().maxCoeff() == 0.0) {
    throw DataError("utilization column is constant (singular fit)");
  }
  OrthogonalizeStep step;
  step.utilization_col = ucol;
  step.surrogate = include_surrogate;
  for (Index j = 0; j < ds.p(); ++j) {
    if (j == ucol) continue;
    const auto [a, b] = ols_on_utilization(u, ds.features.col(j));
    step.columns.push_back(j);
    step.intercepts.push_back(a);
    step.slopes.push_back(b);
  }
  if (include_surrogate) {
    std::tie(step.surrogate_intercept, step.surrogate_slope) = ols_on_utilization(u, ds.surrogate);
  }
  Dataset out = ds;
  apply_orthogonalize(step, out);
  out.log.steps.emplace_back(std::move(step));
  return out;
}

Dataset standardize(const Dataset& ds) {
  StandardizeStep step;
  const double n = static_cast<double>(ds.n_obs());
  for (Index j = 0; j < ds.p(); ++j) {
    const auto col = ds.features.col(j);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / n);
    if (!(sd > 0.0)) {
      throw DataError("cannot standardize constant column " + std::to_string(j));
    }
    step.columns.push_back(j);
    step.means.push_back(mean);
    step.scales.push_back(sd);
  }
  Dataset out = ds;
  apply_standardize(step, out);
  out.log.steps.emplace_back(std::move(step));
  return out;
}

Dataset unstandardize(const Dataset& ds) {
  const auto it = std::find_if(ds.log.steps.rbegin(), ds.log.steps.rend(), [](const auto& s) {
    return std::holds_alternative<StandardizeStep>(s);
  });
  if (it == ds.log.steps.rend()) throw DataError("dataset was never standardized");
  const auto& step = std::get<StandardizeStep>(*it);
  Dataset out = ds;
  for (size_t k = 0; k < step.columns.size(); ++k) {
    auto col = out.features.col(step.columns[k]);
    col = (col.array() * step.scales[k] + step.means[k]).matrix();
  }
  out.log.steps.erase(std::next(it).base());
  return out;
}

void unstandardize_coefficients(const TransformLog& log, double& intercept, Vector& beta) {
  const StandardizeStep* step = last_standardize(log);
  if (step == nullptr) return;
  for (size_t k = 0; k < step->columns.size(); ++k) {
    const Index j = step->columns[k];
    beta[j] /= step->scales[k];
    intercept -= beta[j] * step->means[k];
  }
}

Dataset replay(const TransformLog& log, const Dataset& raw) {
  Dataset out = raw;
  for (const auto& step : log.steps) {
    apply_step(step, out);
    out.log.steps.push_back(step);
  }
  return out;
}

}  // namespace pass
