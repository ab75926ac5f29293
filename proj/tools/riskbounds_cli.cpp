// riskbounds: VaR/CVaR estimation, tail-bound evaluation, sample-size
// inversion and Monte Carlo bound validation.
//
// Exit codes: 0 success, 1 input/validation error, 2 infeasible or not
// achievable, 3 I/O error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "riskbounds/distributions.hpp"
#include "riskbounds/errors.hpp"
#include "riskbounds/estimators.hpp"
#include "riskbounds/harness.hpp"
#include "riskbounds/serialize.hpp"
#include "riskbounds/tailbounds.hpp"

namespace rb = riskbounds;

namespace {

enum ExitCode : int { kOk = 0, kInputError = 1, kInfeasible = 2, kIoError = 3 };

struct Common {
    std::string format = "human";
    std::string output;
};

struct TailOverrides {
    std::optional<double> sigma;
    std::optional<double> mu;
    std::optional<double> b;
    std::optional<double> b_prime;

    bool any() const { return sigma || mu || b || b_prime; }
};

/// Opens the output stream lazily: nothing is written before validation ends.
class Output {
public:
    explicit Output(const std::string& path) : path_(path) {}

    std::ostream& stream() {
        if (path_.empty() || path_ == "-") {
            return std::cout;
        }
        if (!file_) {
            file_ = std::make_unique<std::ofstream>(path_);
            if (!*file_) {
                throw rb::IoError("cannot open output file '" + path_ + "'");
            }
        }
        return *file_;
    }

    void flush() {
        stream().flush();
        if (file_ && !*file_) {
            throw rb::IoError("error writing output file '" + path_ + "'");
        }
    }

private:
    std::string path_;
    std::unique_ptr<std::ofstream> file_;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"csv", "json", "human"}))
        ->capture_default_str();
    cmd->add_option("-o,--output", c.output, "Output file (default: standard output)");
}

void add_tail_options(CLI::App* cmd, TailOverrides& t) {
    cmd->add_option("--sigma", t.sigma, "Tail model sigma (overrides the catalog value)");
    cmd->add_option("--mu", t.mu, "Tail model mean");
    cmd->add_option("--b", t.b, "Sub-exponential b");
    cmd->add_option("--b-prime", t.b_prime, "Sub-exponential b' (< 1/b)");
}

/// Starts from the catalog tail model and applies overrides. `want_sub_gaussian`
/// selects the kind the caller needs; switching kinds requires enough overrides.
rb::TailModel resolve_tail(const rb::DistributionSpec& dist, const TailOverrides& t, bool want_sub_gaussian) {
    const rb::TailModel base = rb::default_tail_model(dist);
    const double sigma = t.sigma.value_or(base.sigma());
    const double mu = t.mu.value_or(base.mu());
    if (want_sub_gaussian) {
        if (!base.is_sub_gaussian() && !t.sigma) {
            throw rb::InvalidArgument("the catalog tail model for " + dist.to_string() +
                                      " is sub-exponential; pass --sigma for a sub-Gaussian model");
        }
        if (t.b || t.b_prime) {
            throw rb::InvalidArgument("--b and --b-prime apply to sub-exponential tail models only");
        }
        return rb::TailModel::sub_gaussian(sigma, mu);
    }
    if (base.is_sub_gaussian()) {
        if (!t.b || !t.b_prime) {
            throw rb::InvalidArgument("the catalog tail model for " + dist.to_string() +
                                      " is sub-Gaussian; pass --b and --b-prime for a sub-exponential model");
        }
        return rb::TailModel::sub_exponential(sigma, *t.b, *t.b_prime, mu);
    }
    const auto& se = base.as_sub_exponential();
    return rb::TailModel::sub_exponential(sigma, t.b.value_or(se.b), t.b_prime.value_or(se.b_prime), mu);
}

std::string fmt(double x) {
    return rb::format_double(x);
}

void print_bound_human(std::ostream& os, const rb::DeviationBound& b) {
    os << "bound: " << b.bound_name << '\n';
    if (!b.distribution.empty()) {
        os << "  distribution: " << b.distribution << '\n';
    }
    for (const auto& in : b.inputs) {
        os << "  " << in.label << " = " << fmt(in.value) << '\n';
    }
    for (const auto& c : b.conditions) {
        os << "  condition " << c.name << ": " << (c.satisfied ? "satisfied" : "NOT satisfied")
           << " (threshold " << fmt(c.threshold) << ")\n";
    }
    for (const auto& t : b.terms) {
        os << "  term " << t.label << " = " << fmt(t.value) << '\n';
    }
    for (const auto& d : b.diagnostics) {
        os << "  " << d.label << " = " << fmt(d.value) << '\n';
    }
    if (!b.terms.empty()) {
        os << "  total (raw) = " << fmt(b.total) << '\n';
        os << "  total (clamped to 1) = " << fmt(b.clamped()) << '\n';
    }
}

void print_bound_csv(std::ostream& os, const rb::DeviationBound& b) {
    os << "bound_name,kind,label,value,satisfied\n";
    for (const auto& c : b.conditions) {
        os << rb::csv_field(b.bound_name) << ",condition," << rb::csv_field(c.name) << ',' << fmt(c.threshold) << ','
           << (c.satisfied ? "true" : "false") << '\n';
    }
    for (const auto& t : b.terms) {
        os << rb::csv_field(b.bound_name) << ",term," << rb::csv_field(t.label) << ',' << fmt(t.value) << ",\n";
    }
    for (const auto& d : b.diagnostics) {
        os << rb::csv_field(b.bound_name) << ",diagnostic," << rb::csv_field(d.label) << ',' << fmt(d.value)
           << ",\n";
    }
    if (!b.terms.empty()) {
        os << rb::csv_field(b.bound_name) << ",total,raw," << fmt(b.total) << ",\n";
        os << rb::csv_field(b.bound_name) << ",total,clamped," << fmt(b.clamped()) << ",\n";
    }
}

void emit_bound(Output& out, const std::string& format, const rb::DeviationBound& b) {
    auto& os = out.stream();
    if (format == "json") {
        rb::Json j = rb::to_json(b);
        if (b.terms.empty()) {
            j["total"] = nullptr;
        }
        os << j.dump(2) << '\n';
    } else if (format == "csv") {
        print_bound_csv(os, b);
    } else {
        print_bound_human(os, b);
    }
}

/// The condition report of a simplified bound whose gate failed.
rb::DeviationBound failed_condition_report(const std::string& name, const rb::DistributionSpec& dist,
                                           const rb::TailModel& tail, rb::RiskLevel level, std::uint64_t n,
                                           double eps) {
    rb::DeviationBound b;
    b.bound_name = name;
    b.distribution = dist.to_string();
    b.inputs = {{"alpha", level.value()}, {"n", static_cast<double>(n)}, {"eps", eps}};
    const double v = rb::true_var(dist, level);
    if (tail.is_sub_gaussian()) {
        const auto& t = tail.as_sub_gaussian();
        b.inputs.push_back({"sigma", t.sigma});
        b.inputs.push_back({"mu", t.mu});
        const auto c = rb::check_subgauss_condition(t, v, level);
        b.conditions.push_back({"var_above_mean", c.var_above_mean, t.mu});
        b.conditions.push_back({"sigma_below_threshold", c.satisfied, c.threshold});
    } else {
        const auto& t = tail.as_sub_exponential();
        b.inputs.push_back({"sigma", t.sigma});
        b.inputs.push_back({"b", t.b});
        b.inputs.push_back({"b_prime", t.b_prime});
        b.inputs.push_back({"mu", t.mu});
        const auto c = rb::check_subexp_condition(t, v, level);
        b.conditions.push_back({"var_above_mean", c.var_above_mean, t.mu});
        b.conditions.push_back({"radicand_positive", c.radicand > 0.0, c.radicand});
        b.conditions.push_back({"sigma_below_threshold", c.satisfied, c.threshold});
        b.diagnostics.push_back({"m_b", c.m_b});
        b.diagnostics.push_back({"radicand", c.radicand});
    }
    return b;
}

// --- estimate ---------------------------------------------------------------

struct EstimateArgs {
    Common common;
    std::string input;
    std::string dist;
    double alpha = 0.95;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
};

int run_estimate(const EstimateArgs& a) {
    const rb::RiskLevel level(a.alpha);
    std::optional<rb::DistributionSpec> dist;
    std::optional<rb::SortedSample> sample;
    if (!a.input.empty()) {
        if (!a.dist.empty()) {
            throw rb::InvalidArgument("give either --input or --dist, not both");
        }
        sample.emplace(rb::read_sample_file(a.input));
    } else {
        if (a.dist.empty()) {
            throw rb::InvalidArgument("estimate needs --input FILE or --dist SPEC with --n");
        }
        if (a.n == 0) {
            throw rb::InvalidArgument("--n must be >= 1 when sampling from --dist");
        }
        dist.emplace(rb::parse_distribution(a.dist));
        sample.emplace(rb::sample(*dist, a.n, a.seed));
    }
    const rb::RiskEstimates est = rb::estimate_risk(*sample, level);

    Output out(a.common.output);
    auto& os = out.stream();
    if (a.common.format == "json") {
        rb::Json j = {{"alpha", a.alpha}, {"n", sample->size()}, {"var_estimate", est.var}, {"cvar_estimate", est.cvar}};
        if (dist) {
            const double v = rb::true_var(*dist, level);
            const double c = rb::true_cvar(*dist, level);
            j["distribution"] = dist->to_string();
            j["seed"] = a.seed;
            j["true_var"] = v;
            j["true_cvar"] = c;
            j["var_error"] = est.var - v;
            j["cvar_error"] = est.cvar - c;
        }
        os << j.dump(2) << '\n';
    } else if (a.common.format == "csv") {
        os << "alpha,n,var_estimate,cvar_estimate";
        if (dist) os << ",distribution,seed,true_var,true_cvar,var_error,cvar_error";
        os << '\n' << fmt(a.alpha) << ',' << sample->size() << ',' << fmt(est.var) << ',' << fmt(est.cvar);
        if (dist) {
            const double v = rb::true_var(*dist, level);
            const double c = rb::true_cvar(*dist, level);
            os << ',' << rb::csv_field(dist->to_string()) << ',' << a.seed << ',' << fmt(v) << ',' << fmt(c) << ','
               << fmt(est.var - v) << ',' << fmt(est.cvar - c);
        }
        os << '\n';
    } else {
        os << "n = " << sample->size() << ", alpha = " << fmt(a.alpha) << '\n';
        os << "VaR estimate  = " << fmt(est.var) << '\n';
        os << "CVaR estimate = " << fmt(est.cvar) << '\n';
        if (dist) {
            const double v = rb::true_var(*dist, level);
            const double c = rb::true_cvar(*dist, level);
            os << "true VaR      = " << fmt(v) << "  (error " << fmt(est.var - v) << ")\n";
            os << "true CVaR     = " << fmt(c) << "  (error " << fmt(est.cvar - c) << ")\n";
        }
    }
    out.flush();
    return kOk;
}

// --- bound ------------------------------------------------------------------

struct BoundArgs {
    Common common;
    std::string name;
    std::string dist = "gaussian:mu=0,sigma=1";
    std::string input;
    double alpha = 0.95;
    std::uint64_t n = 0;
    std::optional<double> eps;
    std::optional<double> s;
    std::optional<std::uint64_t> seed;
    TailOverrides tail;
};

double require_eps(const BoundArgs& a) {
    if (!a.eps) {
        throw rb::InvalidArgument("bound " + a.name + " needs --eps");
    }
    return *a.eps;
}

int run_var_interval(const BoundArgs& a) {
    if (!a.s) {
        throw rb::InvalidArgument("bound var-interval needs --s");
    }
    const rb::RiskLevel level(a.alpha);
    std::optional<rb::SortedSample> sample;
    if (!a.input.empty()) {
        sample.emplace(rb::read_sample_file(a.input));
    } else if (a.seed) {
        if (a.n == 0) throw rb::InvalidArgument("--n must be >= 1");
        sample.emplace(rb::sample(rb::parse_distribution(a.dist), a.n, *a.seed));
    }
    const std::uint64_t n = sample ? sample->size() : a.n;
    if (n == 0) {
        throw rb::InvalidArgument("bound var-interval needs --n (or --input / --seed to draw a sample)");
    }
    const rb::VarIntervalLevels lv = rb::var_interval_levels(n, level, *a.s);
    std::optional<rb::VarConfidenceInterval> iv;
    if (sample) iv = rb::var_interval(*sample, level, *a.s);

    Output out(a.common.output);
    auto& os = out.stream();
    if (a.common.format == "json") {
        os << rb::to_json(lv, level, iv ? &*iv : nullptr).dump(2) << '\n';
    } else if (a.common.format == "csv") {
        os << "bound_name,alpha,n,s,alpha_minus,alpha_plus,confidence_floor,lower,upper\n";
        os << "var-interval," << fmt(a.alpha) << ',' << n << ',' << fmt(*a.s) << ',' << fmt(lv.alpha_minus) << ','
           << fmt(lv.alpha_plus) << ',' << fmt(lv.confidence_floor) << ',' << (iv ? fmt(iv->lower) : "") << ','
           << (iv ? fmt(iv->upper) : "") << '\n';
    } else {
        os << "bound: var-interval\n  alpha = " << fmt(a.alpha) << "\n  n = " << n << "\n  s = " << fmt(*a.s)
           << "\n  alpha_minus = " << fmt(lv.alpha_minus) << "\n  alpha_plus = " << fmt(lv.alpha_plus)
           << "\n  confidence_floor = " << fmt(lv.confidence_floor) << '\n';
        if (iv) {
            os << "  interval = [" << fmt(iv->lower) << ", " << fmt(iv->upper) << "]\n";
        }
    }
    out.flush();
    return kOk;
}

int run_bound(const BoundArgs& a) {
    if (a.name == "var-interval") {
        return run_var_interval(a);
    }
    if (a.n == 0) {
        throw rb::InvalidArgument("bound " + a.name + " needs --n >= 1");
    }
    const double eps = require_eps(a);
    if (a.name == "dkw") {
        const rb::DeviationBound b = rb::dkw_deviation_bound(a.n, eps);
        Output out(a.common.output);
        emit_bound(out, a.common.format, b);
        out.flush();
        return kOk;
    }

    const rb::RiskLevel level(a.alpha);
    const rb::DistributionSpec dist = rb::parse_distribution(a.dist);
    rb::DeviationBound b;
    if (a.name == "var-deviation") {
        if (a.tail.any()) throw rb::InvalidArgument("var-deviation takes no tail model options");
        b = rb::var_deviation_bound(dist, level, a.n, eps);
    } else {
        const bool sub_gaussian = a.name == "cvar-subgauss" || a.name == "cvar-subgauss-general";
        const rb::TailModel tail = resolve_tail(dist, a.tail, sub_gaussian);
        try {
            if (a.name == "cvar-subgauss-general") {
                b = rb::cvar_bound_subgauss_general(tail.as_sub_gaussian(), dist, level, a.n, eps);
            } else if (a.name == "cvar-subexp-general") {
                b = rb::cvar_bound_subexp_general(tail.as_sub_exponential(), dist, level, a.n, eps);
            } else if (a.name == "cvar-subgauss") {
                b = rb::cvar_bound_subgauss(tail.as_sub_gaussian(), dist, level, a.n, eps);
            } else if (a.name == "cvar-subexp") {
                b = rb::cvar_bound_subexp(tail.as_sub_exponential(), dist, level, a.n, eps);
            } else {
                throw rb::InvalidArgument("unknown bound '" + a.name + "'");
            }
        } catch (const rb::ConditionViolation&) {
            // The report carries the failure; not an input error.
            b = failed_condition_report(a.name, dist, tail, level, a.n, eps);
        }
    }
    Output out(a.common.output);
    emit_bound(out, a.common.format, b);
    out.flush();
    return kOk;
}

// --- samplesize -------------------------------------------------------------

struct SampleSizeArgs {
    Common common;
    std::string target;
    std::string dist = "gaussian:mu=0,sigma=1";
    double alpha = 0.95;
    double eps = 0.0;
    double delta = 0.0;
    TailOverrides tail;
};

int run_samplesize(const SampleSizeArgs& a) {
    const rb::RiskLevel level(a.alpha);
    const rb::DistributionSpec dist = rb::parse_distribution(a.dist);
    rb::SampleSize r;
    std::string bound_name;
    if (a.target == "var") {
        if (a.tail.any()) throw rb::InvalidArgument("the var target takes no tail model options");
        r = rb::sample_size_for_var(a.eps, a.delta, dist, level);
        bound_name = "var-deviation";
    } else {
        const rb::TailModel base = rb::default_tail_model(dist);
        const bool sub_gaussian = a.tail.b || a.tail.b_prime ? false : (base.is_sub_gaussian() || a.tail.sigma);
        const rb::TailModel tail = resolve_tail(dist, a.tail, sub_gaussian);
        r = rb::sample_size_for_cvar(a.eps, a.delta, tail, dist, level);
        bound_name = tail.is_sub_gaussian() ? "cvar-subgauss-general" : "cvar-subexp-general";
    }

    Output out(a.common.output);
    auto& os = out.stream();
    if (a.common.format == "json") {
        rb::Json j = {{"target", a.target}, {"bound_name", bound_name}, {"distribution", dist.to_string()},
                      {"alpha", a.alpha},   {"eps", a.eps},             {"delta", a.delta},
                      {"achievable", r.achievable}};
        if (r.achievable) {
            j["n"] = r.n;
            j["bound_at_n"] = r.bound_at_n;
            j["bound_at_n_minus_1"] = r.n > 1 ? rb::Json(r.bound_at_n_minus_1) : rb::Json(nullptr);
        } else {
            j["reason"] = r.reason;
        }
        os << j.dump(2) << '\n';
    } else if (a.common.format == "csv") {
        os << "target,bound_name,distribution,alpha,eps,delta,achievable,n,bound_at_n,bound_at_n_minus_1\n";
        os << a.target << ',' << bound_name << ',' << rb::csv_field(dist.to_string()) << ',' << fmt(a.alpha) << ','
           << fmt(a.eps) << ',' << fmt(a.delta) << ',' << (r.achievable ? "true" : "false") << ',';
        if (r.achievable) {
            os << r.n << ',' << fmt(r.bound_at_n) << ',' << (r.n > 1 ? fmt(r.bound_at_n_minus_1) : "");
        } else {
            os << ",,";
        }
        os << '\n';
    } else {
        if (r.achievable) {
            os << "n = " << r.n << '\n';
            os << "bound at n     = " << fmt(r.bound_at_n) << '\n';
            if (r.n > 1) os << "bound at n - 1 = " << fmt(r.bound_at_n_minus_1) << '\n';
        } else {
            os << "not achievable: " << r.reason << '\n';
        }
    }
    out.flush();
    return r.achievable ? kOk : kInfeasible;
}

// --- experiment -------------------------------------------------------------

struct ExperimentArgs {
    Common common;
    std::string kind;
    std::string dist = "gaussian:mu=0,sigma=1";
    double alpha = 0.95;
    std::uint64_t n = 0;
    std::vector<std::uint64_t> n_grid;
    std::optional<double> s;
    std::optional<double> eps;
    std::string bound = "general";
    std::int64_t replications = 2000;
    std::uint64_t seed = 0;
    int threads = 0;
    bool serial = false;
    std::string grid;
    std::string plan_file;
    TailOverrides tail;
};

rb::ExperimentPlan plan_from_json(const rb::Json& j) {
    const auto dist = rb::parse_distribution(j.at("distribution").get<std::string>());
    const rb::RiskLevel level(j.at("alpha").get<double>());
    const auto kind = j.at("kind").get<std::string>();
    const auto reps = j.value("R", std::uint64_t{2000});
    const auto seed = j.value("seed", std::uint64_t{0});
    const auto n = j.value("n", std::uint64_t{0});
    if (kind == "var-coverage") {
        return {dist, level, rb::VarCoverage{j.at("s").get<double>()}, n, reps, seed};
    }
    if (kind == "var-deviation") {
        return {dist, level, rb::VarDeviation{j.at("eps").get<double>()}, n, reps, seed};
    }
    if (kind == "cvar-deviation") {
        const auto base = rb::default_tail_model(dist);
        rb::CvarBoundChoice choice = base.is_sub_gaussian() ? rb::CvarBoundChoice::subgauss_general
                                                            : rb::CvarBoundChoice::subexp_general;
        if (j.contains("bound")) choice = rb::parse_cvar_bound_choice(j.at("bound").get<std::string>());
        return {dist, level, rb::CvarUpperDeviation{j.at("eps").get<double>(), choice, std::nullopt}, n, reps, seed};
    }
    if (kind == "convergence") {
        return {dist, level, rb::Convergence{j.at("n_grid").get<std::vector<std::uint64_t>>()}, 0, reps, seed};
    }
    throw rb::InvalidArgument("unknown experiment kind '" + kind + "' in plan file");
}

std::vector<rb::ExperimentPlan> plans_from_args(const ExperimentArgs& a) {
    if (a.replications < 1) {
        throw rb::InvalidArgument("--R must be >= 1");
    }
    const auto reps = static_cast<std::uint64_t>(a.replications);
    if (!a.grid.empty()) {
        if (a.grid != "default") throw rb::InvalidArgument("unknown grid '" + a.grid + "' (only 'default')");
        return rb::default_grid(a.seed, reps);
    }
    if (!a.plan_file.empty()) {
        std::ifstream in(a.plan_file);
        if (!in) throw rb::IoError("cannot open plan file '" + a.plan_file + "'");
        rb::Json j;
        try {
            j = rb::Json::parse(in);
        } catch (const rb::Json::exception& e) {
            throw rb::InvalidArgument("plan file '" + a.plan_file + "': " + e.what());
        }
        std::vector<rb::ExperimentPlan> plans;
        if (j.is_array()) {
            for (const auto& item : j) plans.push_back(plan_from_json(item));
        } else {
            plans.push_back(plan_from_json(j));
        }
        return plans;
    }
    if (a.kind.empty()) {
        throw rb::InvalidArgument("experiment needs a kind, --grid default or --plan FILE");
    }
    const auto dist = rb::parse_distribution(a.dist);
    const rb::RiskLevel level(a.alpha);
    if (a.kind == "var-coverage") {
        if (!a.s) throw rb::InvalidArgument("var-coverage needs --s");
        return {{dist, level, rb::VarCoverage{*a.s}, a.n, reps, a.seed}};
    }
    if (a.kind == "var-deviation") {
        if (!a.eps) throw rb::InvalidArgument("var-deviation needs --eps");
        return {{dist, level, rb::VarDeviation{*a.eps}, a.n, reps, a.seed}};
    }
    if (a.kind == "cvar-deviation") {
        if (!a.eps) throw rb::InvalidArgument("cvar-deviation needs --eps");
        rb::CvarBoundChoice choice;
        if (a.bound == "general") {
            const bool sg = a.tail.any() ? !(a.tail.b || a.tail.b_prime) && (rb::default_tail_model(dist).is_sub_gaussian() || a.tail.sigma)
                                         : rb::default_tail_model(dist).is_sub_gaussian();
            choice = sg ? rb::CvarBoundChoice::subgauss_general : rb::CvarBoundChoice::subexp_general;
        } else {
            choice = rb::parse_cvar_bound_choice(a.bound);
        }
        std::optional<rb::TailModel> tail;
        if (a.tail.any()) {
            const bool sg = choice == rb::CvarBoundChoice::subgauss_general ||
                            choice == rb::CvarBoundChoice::subgauss_simplified;
            tail = resolve_tail(dist, a.tail, sg);
        }
        return {{dist, level, rb::CvarUpperDeviation{*a.eps, choice, tail}, a.n, reps, a.seed}};
    }
    if (a.kind == "convergence") {
        return {{dist, level, rb::Convergence{a.n_grid}, 0, reps, a.seed}};
    }
    throw rb::InvalidArgument("unknown experiment kind '" + a.kind + "'");
}

int run_experiments(const ExperimentArgs& a) {
    const std::vector<rb::ExperimentPlan> plans = plans_from_args(a);
    bool has_convergence = false;
    bool has_record = false;
    for (const auto& p : plans) {
        rb::validate(p);
        (std::holds_alternative<rb::Convergence>(p.kind) ? has_convergence : has_record) = true;
    }
    if (has_convergence && has_record && a.common.format == "csv") {
        throw rb::InvalidArgument("CSV output cannot mix convergence and bound-validation plans");
    }
    const rb::RunOptions opts{a.serial ? rb::Execution::serial : rb::Execution::parallel, a.threads};

    Output out(a.common.output);
    auto& os = out.stream();
    const std::string& format = a.common.format;
    if (format == "csv") {
        os << (has_convergence ? rb::convergence_csv_header() : rb::csv_header()) << '\n' << std::flush;
    }
    bool all_pass = true;
    for (const auto& p : plans) {
        if (std::holds_alternative<rb::Convergence>(p.kind)) {
            const rb::ConvergenceResult res = rb::run_convergence(p, opts);
            if (format == "csv") {
                for (const auto& row : rb::convergence_csv_rows(res)) os << row << '\n';
            } else if (format == "json") {
                os << rb::to_json(res).dump() << '\n';
            } else {
                os << "convergence " << p.dist.to_string() << " alpha=" << fmt(p.level.value())
                   << " R=" << p.replications << '\n';
                for (const auto& pt : res.points) {
                    os << "  n=" << pt.n << "  median|v_hat - v|=" << fmt(pt.median_abs_var_error)
                       << "  median(c_hat - c)=" << fmt(pt.median_cvar_error) << '\n';
                }
                std::vector<std::uint64_t> ns;
                std::vector<double> errs;
                for (const auto& pt : res.points) {
                    ns.push_back(pt.n);
                    errs.push_back(pt.median_abs_var_error);
                }
                os << "  log-log slope (VaR) = " << fmt(rb::loglog_slope(ns, errs)) << '\n';
            }
        } else {
            const rb::ExperimentRecord rec = rb::run_experiment(p, opts);
            all_pass = all_pass && rec.pass;
            if (format == "csv") {
                os << rb::csv_row(rec) << '\n';
            } else if (format == "json") {
                os << rb::to_json(rec).dump() << '\n';
            } else {
                os << rb::kind_name(p.kind) << ' ' << p.dist.to_string() << " alpha=" << fmt(p.level.value())
                   << " n=" << p.n << " param=" << fmt(rb::kind_parameter(p.kind)) << " R=" << p.replications
                   << ": frequency=" << fmt(rec.frequency) << " stderr=" << fmt(rec.binomial_stderr)
                   << " bound(raw)=" << fmt(rec.bound_raw) << " bound(clamped)=" << fmt(rec.bound_clamped)
                   << (rec.pass ? " PASS" : " FAIL") << '\n';
            }
        }
        os << std::flush;
    }
    out.flush();
    (void)all_pass;
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"VaR/CVaR estimation, concentration bounds and Monte Carlo validation"};
    app.require_subcommand(1);
    app.allow_extras(false);

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Empirical VaR and CVaR of a sample");
    add_common(estimate, est.common);
    estimate->add_option("--input", est.input, "Sample file: one decimal real per line, '#' comments");
    estimate->add_option("--dist", est.dist, "Distribution spec, e.g. gaussian:mu=0,sigma=1");
    estimate->add_option("--n", est.n, "Sample size when drawing from --dist");
    estimate->add_option("--seed", est.seed, "Seed when drawing from --dist");
    estimate->add_option("--alpha", est.alpha, "Risk level in (0,1)")->capture_default_str();

    BoundArgs bnd;
    auto* bound = app.add_subcommand("bound", "Evaluate a concentration bound");
    add_common(bound, bnd.common);
    bound
        ->add_option("name", bnd.name, "var-interval, var-deviation, cvar-subgauss, cvar-subgauss-general, "
                                       "cvar-subexp, cvar-subexp-general or dkw")
        ->required()
        ->check(CLI::IsMember({"var-interval", "var-deviation", "cvar-subgauss", "cvar-subgauss-general",
                               "cvar-subexp", "cvar-subexp-general", "dkw"}));
    bound->add_option("--dist", bnd.dist, "Distribution spec")->capture_default_str();
    bound->add_option("--input", bnd.input, "Sample file (var-interval: report a_n, b_n)");
    bound->add_option("--seed", bnd.seed, "Draw a sample from --dist with this seed (var-interval)");
    bound->add_option("--alpha", bnd.alpha, "Risk level in (0,1)")->capture_default_str();
    bound->add_option("--n", bnd.n, "Sample size");
    bound->add_option("--eps", bnd.eps, "Deviation eps > 0");
    bound->add_option("--s", bnd.s, "Interval exponent s in (0, 1/2)");
    add_tail_options(bound, bnd.tail);

    SampleSizeArgs ss;
    auto* samplesize = app.add_subcommand("samplesize", "Smallest n meeting a bound target");
    add_common(samplesize, ss.common);
    samplesize->add_option("--target", ss.target, "var or cvar")->required()->check(CLI::IsMember({"var", "cvar"}));
    samplesize->add_option("--eps", ss.eps, "Accuracy eps > 0")->required();
    samplesize->add_option("--delta", ss.delta, "Failure probability in (0,1)")->required();
    samplesize->add_option("--dist", ss.dist, "Distribution spec")->capture_default_str();
    samplesize->add_option("--alpha", ss.alpha, "Risk level in (0,1)")->capture_default_str();
    add_tail_options(samplesize, ss.tail);

    ExperimentArgs ex;
    auto* experiment = app.add_subcommand("experiment", "Monte Carlo validation of the bounds");
    add_common(experiment, ex.common);
    ex.common.format = "csv";
    experiment->add_option("kind", ex.kind, "var-coverage, var-deviation, cvar-deviation or convergence")
        ->check(CLI::IsMember({"var-coverage", "var-deviation", "cvar-deviation", "convergence"}));
    experiment->add_option("--dist", ex.dist, "Distribution spec")->capture_default_str();
    experiment->add_option("--alpha", ex.alpha, "Risk level in (0,1)")->capture_default_str();
    experiment->add_option("--n", ex.n, "Sample size per replication");
    experiment->add_option("--n-grid", ex.n_grid, "Sample sizes for convergence")->delimiter(',');
    experiment->add_option("--s", ex.s, "Interval exponent (var-coverage)");
    experiment->add_option("--eps", ex.eps, "Deviation eps (var-deviation, cvar-deviation)");
    experiment
        ->add_option("--bound", ex.bound,
                     "general, subgauss_general, subexp_general, subgauss_simplified or subexp_simplified")
        ->capture_default_str();
    experiment->add_option("--R", ex.replications, "Replications")->capture_default_str();
    experiment->add_option("--seed", ex.seed, "Master seed")->capture_default_str();
    experiment->add_option("--threads", ex.threads, "OpenMP threads (0: default)")->capture_default_str();
    experiment->add_flag("--serial", ex.serial, "Use the serial reference kernels");
    experiment->add_option("--grid", ex.grid, "'default' runs the built-in experiment grid");
    experiment->add_option("--plan", ex.plan_file, "JSON plan file (object or array of objects)");
    add_tail_options(experiment, ex.tail);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*estimate) return run_estimate(est);
        if (*bound) return run_bound(bnd);
        if (*samplesize) return run_samplesize(ss);
        if (*experiment) return run_experiments(ex);
    } catch (const rb::FeasibilityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInfeasible;
    } catch (const rb::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    }
    return kInputError;
}
