#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskbounds/harness.hpp"
#include "riskbounds/tailbounds.hpp"

namespace riskbounds {

using Json = nlohmann::json;

/// Shortest round-trip decimal form, always with '.' as separator.
std::string format_double(double x);

/// {bound_name, inputs, terms: [{label, value}], total, conditions: [{name, satisfied, threshold}],
///  diagnostics: [{label, value}]}. Non-finite numbers are written as the strings "inf", "-inf", "nan".
Json to_json(const DeviationBound& bound);
DeviationBound bound_from_json(const Json& j);

/// The distribution-free interval in the same shape, plus lower/upper/alpha_minus/alpha_plus
/// when a sample was supplied.
Json to_json(const VarIntervalLevels& levels, RiskLevel level, const VarConfidenceInterval* interval = nullptr);

Json to_json(const ExperimentRecord& record);
/// Rebuilds a record (plan, counts, bound) from its JSON form. The pass flag
/// is recomputed and checked against the stored one; a mismatch throws.
ExperimentRecord record_from_json(const Json& j);

Json to_json(const ConvergenceResult& result);

/// Column order is fixed:
/// kind,family,params,alpha,n,s_or_eps,R,seed,frequency,stderr,bound_raw,bound_clamped,pass
std::string csv_header();
std::string csv_row(const ExperimentRecord& record);

/// kind,family,params,alpha,n,R,seed,median_abs_var_error,median_cvar_error
std::string convergence_csv_header();
std::vector<std::string> convergence_csv_rows(const ConvergenceResult& result);

/// RFC 4180 quoting: fields containing ',', '"' or a line break are quoted.
std::string csv_field(const std::string& text);

/// One decimal real per line; '#' comment lines and blank lines are skipped.
/// Throws IoError if the file cannot be read, InvalidArgument naming the line
/// for unparsable content or naming the file if it holds no values.
std::vector<double> read_sample_file(const std::filesystem::path& path);

} // namespace riskbounds
