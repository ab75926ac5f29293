#include "riskbounds/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "riskbounds/errors.hpp"

namespace riskbounds {

namespace {

Json number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

double read_number(const Json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        throw InvalidArgument("expected a number, got string '" + s + "'");
    }
    return j.get<double>();
}

Json named_list(const std::vector<NamedValue>& values) {
    Json arr = Json::array();
    for (const auto& v : values) {
        arr.push_back({{"label", v.label}, {"value", number(v.value)}});
    }
    return arr;
}

std::vector<NamedValue> read_named_list(const Json& arr) {
    std::vector<NamedValue> out;
    for (const auto& item : arr) {
        out.push_back({item.at("label").get<std::string>(), read_number(item.at("value"))});
    }
    return out;
}

Json tail_json(const TailModel& tail) {
    if (tail.is_sub_gaussian()) {
        const auto& t = tail.as_sub_gaussian();
        return {{"kind", "subgauss"}, {"sigma", t.sigma}, {"mu", t.mu}};
    }
    const auto& t = tail.as_sub_exponential();
    return {{"kind", "subexp"}, {"sigma", t.sigma}, {"b", t.b}, {"b_prime", t.b_prime}, {"mu", t.mu}};
}

TailModel tail_from_json(const Json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "subgauss") {
        return TailModel::sub_gaussian(j.at("sigma").get<double>(), j.at("mu").get<double>());
    }
    if (kind == "subexp") {
        return TailModel::sub_exponential(j.at("sigma").get<double>(), j.at("b").get<double>(),
                                          j.at("b_prime").get<double>(), j.at("mu").get<double>());
    }
    throw InvalidArgument("unknown tail kind '" + kind + "'");
}

} // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

Json to_json(const DeviationBound& bound) {
    Json inputs = Json::object();
    if (!bound.distribution.empty()) {
        inputs["distribution"] = bound.distribution;
    }
    for (const auto& in : bound.inputs) {
        inputs[in.label] = number(in.value);
    }
    Json conditions = Json::array();
    for (const auto& c : bound.conditions) {
        conditions.push_back({{"name", c.name}, {"satisfied", c.satisfied}, {"threshold", number(c.threshold)}});
    }
    return {{"bound_name", bound.bound_name},
            {"inputs", inputs},
            {"terms", named_list(bound.terms)},
            {"total", number(bound.total)},
            {"conditions", conditions},
            {"diagnostics", named_list(bound.diagnostics)}};
}

DeviationBound bound_from_json(const Json& j) {
    DeviationBound b;
    b.bound_name = j.at("bound_name").get<std::string>();
    for (const auto& [key, value] : j.at("inputs").items()) {
        if (key == "distribution") {
            b.distribution = value.get<std::string>();
        } else {
            b.inputs.push_back({key, read_number(value)});
        }
    }
    b.terms = read_named_list(j.at("terms"));
    if (j.contains("diagnostics")) {
        b.diagnostics = read_named_list(j.at("diagnostics"));
    }
    for (const auto& c : j.at("conditions")) {
        b.conditions.push_back(
            {c.at("name").get<std::string>(), c.at("satisfied").get<bool>(), read_number(c.at("threshold"))});
    }
    b.total = read_number(j.at("total"));
    return b;
}

Json to_json(const VarIntervalLevels& levels, RiskLevel level, const VarConfidenceInterval* interval) {
    Json j = {{"bound_name", "var-interval"},
              {"inputs", {{"alpha", level.value()}, {"n", levels.n}, {"s", levels.s}}},
              {"terms", Json::array({{{"label", "confidence_floor"}, {"value", levels.confidence_floor}}})},
              {"total", levels.confidence_floor},
              {"conditions", Json::array({{{"name", "levels_inside_unit_interval"},
                                           {"satisfied", true},
                                           {"threshold", levels.half_width}}})},
              {"diagnostics", Json::array()},
              {"alpha_minus", levels.alpha_minus},
              {"alpha_plus", levels.alpha_plus},
              {"half_width", levels.half_width}};
    if (interval != nullptr) {
        j["lower"] = interval->lower;
        j["upper"] = interval->upper;
    }
    return j;
}

Json to_json(const ExperimentRecord& record) {
    const auto& plan = record.plan;
    Json j = {{"kind", kind_name(plan.kind)},
              {"distribution", plan.dist.to_string()},
              {"family", plan.dist.family_name()},
              {"params", plan.dist.params_string()},
              {"alpha", plan.level.value()},
              {"n", plan.n},
              {"s_or_eps", kind_parameter(plan.kind)},
              {"R", plan.replications},
              {"seed", plan.master_seed},
              {"hits", record.hits},
              {"frequency", record.frequency},
              {"stderr", record.binomial_stderr},
              {"bound_raw", number(record.bound_raw)},
              {"bound_clamped", record.bound_clamped},
              {"pass", record.pass},
              {"duration_seconds", record.duration_seconds},
              {"bound", to_json(record.bound)}};
    if (const auto* k = std::get_if<CvarUpperDeviation>(&plan.kind)) {
        j["bound_choice"] = to_string(k->bound);
        j["tail"] = tail_json(effective_tail(plan, *k));
    }
    return j;
}

ExperimentRecord record_from_json(const Json& j) {
    const auto kind = j.at("kind").get<std::string>();
    const double param = read_number(j.at("s_or_eps"));
    ExperimentKind k;
    if (kind == "var-coverage") {
        k = VarCoverage{param};
    } else if (kind == "var-deviation") {
        k = VarDeviation{param};
    } else if (kind == "cvar-deviation") {
        k = CvarUpperDeviation{param, parse_cvar_bound_choice(j.at("bound_choice").get<std::string>()),
                               tail_from_json(j.at("tail"))};
    } else {
        throw InvalidArgument("record kind '" + kind + "' cannot be read back as an ExperimentRecord");
    }
    ExperimentPlan plan{parse_distribution(j.at("distribution").get<std::string>()),
                        RiskLevel(j.at("alpha").get<double>()),
                        k,
                        j.at("n").get<std::uint64_t>(),
                        j.at("R").get<std::uint64_t>(),
                        j.at("seed").get<std::uint64_t>()};
    ExperimentRecord rec{plan,
                         j.at("hits").get<std::uint64_t>(),
                         j.at("frequency").get<double>(),
                         j.at("stderr").get<double>(),
                         read_number(j.at("bound_raw")),
                         j.at("bound_clamped").get<double>(),
                         bound_from_json(j.at("bound")),
                         j.at("duration_seconds").get<double>(),
                         false};
    rec.pass = recompute_pass(rec.is_coverage(), rec.frequency, rec.binomial_stderr, rec.bound_clamped);
    if (rec.pass != j.at("pass").get<bool>()) {
        throw InvalidArgument("stored pass flag does not match its recomputation");
    }
    return rec;
}

Json to_json(const ConvergenceResult& result) {
    Json points = Json::array();
    for (const auto& p : result.points) {
        points.push_back({{"n", p.n},
                          {"median_abs_var_error", p.median_abs_var_error},
                          {"median_cvar_error", p.median_cvar_error}});
    }
    return {{"kind", "convergence"},
            {"distribution", result.plan.dist.to_string()},
            {"alpha", result.plan.level.value()},
            {"R", result.plan.replications},
            {"seed", result.plan.master_seed},
            {"points", points},
            {"duration_seconds", result.duration_seconds}};
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\r\n") == std::string::npos) {
        return text;
    }
    std::string out = "\"";
    for (const char ch : text) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

std::string csv_header() {
    return "kind,family,params,alpha,n,s_or_eps,R,seed,frequency,stderr,bound_raw,bound_clamped,pass";
}

std::string csv_row(const ExperimentRecord& record) {
    const auto& plan = record.plan;
    std::string row;
    row += csv_field(kind_name(plan.kind)) + ',';
    row += csv_field(plan.dist.family_name()) + ',';
    row += csv_field(plan.dist.params_string()) + ',';
    row += format_double(plan.level.value()) + ',';
    row += std::to_string(plan.n) + ',';
    row += format_double(kind_parameter(plan.kind)) + ',';
    row += std::to_string(plan.replications) + ',';
    row += std::to_string(plan.master_seed) + ',';
    row += format_double(record.frequency) + ',';
    row += format_double(record.binomial_stderr) + ',';
    row += format_double(record.bound_raw) + ',';
    row += format_double(record.bound_clamped) + ',';
    row += record.pass ? "true" : "false";
    return row;
}

std::string convergence_csv_header() {
    return "kind,family,params,alpha,n,R,seed,median_abs_var_error,median_cvar_error";
}

std::vector<std::string> convergence_csv_rows(const ConvergenceResult& result) {
    const auto& plan = result.plan;
    std::vector<std::string> rows;
    for (const auto& p : result.points) {
        rows.push_back("convergence," + csv_field(plan.dist.family_name()) + ',' +
                       csv_field(plan.dist.params_string()) + ',' + format_double(plan.level.value()) + ',' +
                       std::to_string(p.n) + ',' + std::to_string(plan.replications) + ',' +
                       std::to_string(plan.master_seed) + ',' + format_double(p.median_abs_var_error) + ',' +
                       format_double(p.median_cvar_error));
    }
    return rows;
}

std::vector<double> read_sample_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open sample file '" + path.string() + "'");
    }
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        const auto last = line.find_last_not_of(" \t\r");
        const std::string_view text(line.data() + first, last - first + 1);
        double x = 0.0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(x)) {
            throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": cannot parse '" +
                                  std::string(text) + "' as a finite decimal real");
        }
        values.push_back(x);
    }
    if (in.bad()) {
        throw IoError("error while reading sample file '" + path.string() + "'");
    }
    if (values.empty()) {
        throw InvalidArgument("sample file '" + path.string() + "' contains no values");
    }
    return values;
}

} // namespace riskbounds
