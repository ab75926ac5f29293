#include "riskbounds/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "riskbounds/errors.hpp"

namespace riskbounds {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_eps(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw InvalidArgument("experiment eps must be a finite value > 0");
    }
}

bool needs_sub_gaussian(CvarBoundChoice c) {
    return c == CvarBoundChoice::subgauss_general || c == CvarBoundChoice::subgauss_simplified;
}

DeviationBound evaluate_cvar_bound(const ExperimentPlan& plan, const CvarUpperDeviation& kind) {
    const TailModel tail = effective_tail(plan, kind);
    switch (kind.bound) {
    case CvarBoundChoice::subgauss_general:
        return cvar_bound_subgauss_general(tail.as_sub_gaussian(), plan.dist, plan.level, plan.n, kind.eps);
    case CvarBoundChoice::subexp_general:
        return cvar_bound_subexp_general(tail.as_sub_exponential(), plan.dist, plan.level, plan.n, kind.eps);
    case CvarBoundChoice::subgauss_simplified:
        return cvar_bound_subgauss(tail.as_sub_gaussian(), plan.dist, plan.level, plan.n, kind.eps);
    case CvarBoundChoice::subexp_simplified:
        return cvar_bound_subexp(tail.as_sub_exponential(), plan.dist, plan.level, plan.n, kind.eps);
    }
    throw InvalidArgument("unknown CVaR bound choice");
}

ExperimentRecord make_record(const ExperimentPlan& plan, std::uint64_t hits, DeviationBound bound,
                             Clock::time_point start) {
    const double frequency = static_cast<double>(hits) / static_cast<double>(plan.replications);
    const double se = binomial_stderr(frequency, plan.replications);
    const double raw = bound.total;
    const double clamped = bound.clamped();
    const bool coverage = std::holds_alternative<VarCoverage>(plan.kind);
    return ExperimentRecord{plan,   hits, frequency, se, raw, clamped, std::move(bound), seconds_since(start),
                            recompute_pass(coverage, frequency, se, clamped)};
}

template <class K>
const K& kind_as(const ExperimentPlan& plan, const char* op) {
    if (const auto* k = std::get_if<K>(&plan.kind)) {
        return *k;
    }
    throw InvalidArgument(std::string(op) + " called with a " + kind_name(plan.kind) + " plan");
}

} // namespace

std::string to_string(CvarBoundChoice choice) {
    switch (choice) {
    case CvarBoundChoice::subgauss_general:
        return "subgauss_general";
    case CvarBoundChoice::subexp_general:
        return "subexp_general";
    case CvarBoundChoice::subgauss_simplified:
        return "subgauss_simplified";
    case CvarBoundChoice::subexp_simplified:
        return "subexp_simplified";
    }
    return "unknown";
}

CvarBoundChoice parse_cvar_bound_choice(std::string_view text) {
    if (text == "subgauss_general" || text == "cvar-subgauss-general") return CvarBoundChoice::subgauss_general;
    if (text == "subexp_general" || text == "cvar-subexp-general") return CvarBoundChoice::subexp_general;
    if (text == "subgauss_simplified" || text == "cvar-subgauss") return CvarBoundChoice::subgauss_simplified;
    if (text == "subexp_simplified" || text == "cvar-subexp") return CvarBoundChoice::subexp_simplified;
    throw InvalidArgument("unknown CVaR bound choice '" + std::string(text) + "'");
}

std::string kind_name(const ExperimentKind& kind) {
    return std::visit(overloaded{[](const VarCoverage&) { return std::string("var-coverage"); },
                                 [](const VarDeviation&) { return std::string("var-deviation"); },
                                 [](const CvarUpperDeviation&) { return std::string("cvar-deviation"); },
                                 [](const Convergence&) { return std::string("convergence"); }},
                      kind);
}

double kind_parameter(const ExperimentKind& kind) {
    return std::visit(overloaded{[](const VarCoverage& k) { return k.s; },
                                 [](const VarDeviation& k) { return k.eps; },
                                 [](const CvarUpperDeviation& k) { return k.eps; },
                                 [](const Convergence&) { return std::numeric_limits<double>::quiet_NaN(); }},
                      kind);
}

TailModel effective_tail(const ExperimentPlan& plan, const CvarUpperDeviation& kind) {
    return kind.tail ? *kind.tail : default_tail_model(plan.dist);
}

void validate(const ExperimentPlan& plan) {
    if (plan.replications == 0) {
        throw InvalidArgument("replications R must be >= 1");
    }
    std::visit(overloaded{
                   [&](const VarCoverage& k) {
                       if (plan.n == 0) throw InvalidArgument("n must be >= 1");
                       var_interval_levels(plan.n, plan.level, k.s);
                   },
                   [&](const VarDeviation& k) {
                       if (plan.n == 0) throw InvalidArgument("n must be >= 1");
                       require_eps(k.eps);
                   },
                   [&](const CvarUpperDeviation& k) {
                       if (plan.n == 0) throw InvalidArgument("n must be >= 1");
                       require_eps(k.eps);
                       const TailModel tail = effective_tail(plan, k);
                       if (needs_sub_gaussian(k.bound) != tail.is_sub_gaussian()) {
                           throw InvalidArgument("bound choice " + to_string(k.bound) + " needs a " +
                                                 (needs_sub_gaussian(k.bound) ? "sub-Gaussian" : "sub-exponential") +
                                                 " tail model; supply one explicitly");
                       }
                       // Gates the simplified forms and checks v_alpha > mu.
                       evaluate_cvar_bound(plan, k);
                   },
                   [&](const Convergence& k) {
                       if (k.n_grid.size() < 3) {
                           throw InvalidArgument("convergence needs an n-grid of at least 3 points");
                       }
                       for (const auto n : k.n_grid) {
                           if (n == 0) throw InvalidArgument("n-grid entries must be >= 1");
                       }
                   }},
               plan.kind);
}

double binomial_stderr(double frequency, std::uint64_t replications) {
    return std::sqrt(frequency * (1.0 - frequency) / static_cast<double>(replications));
}

bool recompute_pass(bool coverage, double frequency, double stderr_value, double bound_clamped) {
    if (coverage) {
        return frequency >= bound_clamped - 3.0 * stderr_value;
    }
    return frequency <= bound_clamped + 3.0 * stderr_value;
}

ExperimentRecord run_var_coverage(const ExperimentPlan& plan, const RunOptions& opts) {
    const auto& kind = kind_as<VarCoverage>(plan, "run_var_coverage");
    validate(plan);
    const auto start = Clock::now();
    const double v = true_var(plan.dist, plan.level);
    const auto hits = count_replications(plan.replications, opts, [&](std::uint64_t r) {
        const SortedSample s = sample(plan.dist, plan.n, plan.master_seed, r);
        return var_interval(s, plan.level, kind.s).contains(v);
    });
    const VarIntervalLevels lv = var_interval_levels(plan.n, plan.level, kind.s);
    DeviationBound floor;
    floor.bound_name = "var-interval";
    floor.distribution = plan.dist.to_string();
    floor.inputs = {{"alpha", plan.level.value()}, {"n", static_cast<double>(plan.n)}, {"s", kind.s}};
    floor.terms = {{"confidence_floor", lv.confidence_floor}};
    floor.diagnostics = {{"alpha_minus", lv.alpha_minus}, {"alpha_plus", lv.alpha_plus}};
    floor.total = lv.confidence_floor;
    return make_record(plan, hits, std::move(floor), start);
}

ExperimentRecord run_var_deviation(const ExperimentPlan& plan, const RunOptions& opts) {
    const auto& kind = kind_as<VarDeviation>(plan, "run_var_deviation");
    validate(plan);
    const auto start = Clock::now();
    const double v = true_var(plan.dist, plan.level);
    const auto hits = count_replications(plan.replications, opts, [&](std::uint64_t r) {
        const SortedSample s = sample(plan.dist, plan.n, plan.master_seed, r);
        return std::abs(estimate_var(s, plan.level) - v) >= kind.eps;
    });
    return make_record(plan, hits, var_deviation_bound(plan.dist, plan.level, plan.n, kind.eps), start);
}

ExperimentRecord run_cvar_deviation(const ExperimentPlan& plan, const RunOptions& opts) {
    const auto& kind = kind_as<CvarUpperDeviation>(plan, "run_cvar_deviation");
    validate(plan);
    const auto start = Clock::now();
    DeviationBound bound = evaluate_cvar_bound(plan, kind);
    const double c = true_cvar(plan.dist, plan.level);
    const auto hits = count_replications(plan.replications, opts, [&](std::uint64_t r) {
        const SortedSample s = sample(plan.dist, plan.n, plan.master_seed, r);
        return estimate_cvar(s, plan.level) - c > kind.eps;
    });
    return make_record(plan, hits, std::move(bound), start);
}

ExperimentRecord run_experiment(const ExperimentPlan& plan, const RunOptions& opts) {
    return std::visit(overloaded{[&](const VarCoverage&) { return run_var_coverage(plan, opts); },
                                 [&](const VarDeviation&) { return run_var_deviation(plan, opts); },
                                 [&](const CvarUpperDeviation&) { return run_cvar_deviation(plan, opts); },
                                 [&](const Convergence&) -> ExperimentRecord {
                                     throw InvalidArgument("convergence plans produce a ConvergenceResult; "
                                                           "use run_convergence");
                                 }},
                      plan.kind);
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw InvalidArgument("median of an empty set");
    }
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(), values.begin() + mid);
    return 0.5 * (lower + upper);
}

ConvergenceResult run_convergence(const ExperimentPlan& plan, const RunOptions& opts) {
    const auto& kind = kind_as<Convergence>(plan, "run_convergence");
    validate(plan);
    const auto start = Clock::now();
    const double v = true_var(plan.dist, plan.level);
    const double c = true_cvar(plan.dist, plan.level);

    ConvergenceResult result{plan, {}, 0.0};
    for (const std::uint64_t n : kind.n_grid) {
        const auto errors = map_replications<RiskEstimates>(plan.replications, opts, [&](std::uint64_t r) {
            const SortedSample s = sample(plan.dist, n, plan.master_seed, r);
            const RiskEstimates e = estimate_risk(s, plan.level);
            return RiskEstimates{std::abs(e.var - v), e.cvar - c};
        });
        std::vector<double> var_err(errors.size());
        std::vector<double> cvar_err(errors.size());
        std::transform(errors.begin(), errors.end(), var_err.begin(), [](const RiskEstimates& e) { return e.var; });
        std::transform(errors.begin(), errors.end(), cvar_err.begin(), [](const RiskEstimates& e) { return e.cvar; });
        result.points.push_back({n, median(std::move(var_err)), median(std::move(cvar_err))});
    }
    result.duration_seconds = seconds_since(start);
    return result;
}

double loglog_slope(const std::vector<std::uint64_t>& n, const std::vector<double>& y) {
    if (n.size() != y.size() || n.size() < 2) {
        throw InvalidArgument("loglog_slope needs two equally sized series of length >= 2");
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (!(y[i] > 0.0)) {
            throw InvalidArgument("loglog_slope needs positive y values");
        }
        mx += std::log(static_cast<double>(n[i]));
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(n.size());
    my /= static_cast<double>(n.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double dx = std::log(static_cast<double>(n[i])) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

std::vector<ExperimentPlan> default_grid(std::uint64_t master_seed, std::uint64_t replications) {
    const DistributionSpec dists[] = {DistributionSpec::gaussian(0.0, 1.0), DistributionSpec::exponential(1.0),
                                      DistributionSpec::uniform(0.0, 1.0)};
    std::vector<ExperimentPlan> plans;
    for (const auto& dist : dists) {
        const CvarBoundChoice general = default_tail_model(dist).is_sub_gaussian() ? CvarBoundChoice::subgauss_general
                                                                                 : CvarBoundChoice::subexp_general;
        for (const double alpha : {0.9, 0.95}) {
            for (const std::uint64_t n : {std::uint64_t{1000}, std::uint64_t{10000}, std::uint64_t{100000}}) {
                for (const double eps : {0.1, 0.5, 1.0}) {
                    plans.push_back({dist, RiskLevel(alpha), VarDeviation{eps}, n, replications, master_seed});
                    plans.push_back({dist, RiskLevel(alpha), CvarUpperDeviation{eps, general, std::nullopt}, n,
                                     replications, master_seed});
                }
            }
        }
    }
    return plans;
}

} // namespace riskbounds
