#pragma once

#include "pass/data.hpp"
#include "pass/eval.hpp"
#include "pass/model.hpp"
#include "pass/pass_estimator.hpp"
#include "pass/simgen.hpp"
#include "pass/solver.hpp"
#include "pass/surrogate.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>

namespace pass {

using Json = nlohmann::ordered_json;

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

Json to_json(const GlmFit& fit);
Json to_json(const AlphaFit& fit);
AlphaFit alpha_fit_from_json(const Json& j);
Json to_json(const PassFit& fit);
Json to_json(const Coefficients& coef);
// Accepts both Coefficients and PassFit documents.
Coefficients coefficients_from_json(const Json& j);
Json to_json(const TruthOracle& oracle);
TruthOracle truth_from_json(const Json& j);
Json to_json(const TransformLog& log);
TransformLog transform_log_from_json(const Json& j);
Json to_json(const MetricsReport& report);
Json to_json(const AggregateReport& report);

Json read_json_file(const std::string& path);
void write_json_file(const Json& j, const std::string& path);
void write_text_file(const std::string& text, const std::string& path);
std::string read_text_file(const std::string& path);

// 64-bit FNV-1a, rendered as 16 hex digits.
std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 0xCBF29CE484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace pass
