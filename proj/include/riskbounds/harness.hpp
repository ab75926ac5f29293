#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "riskbounds/distributions.hpp"
#include "riskbounds/estimators.hpp"
#include "riskbounds/replicate.hpp"
#include "riskbounds/tailbounds.hpp"

namespace riskbounds {

enum class CvarBoundChoice { subgauss_general, subexp_general, subgauss_simplified, subexp_simplified };

std::string to_string(CvarBoundChoice choice);
/// Accepts "subgauss_general" as well as the CLI spelling "cvar-subgauss-general".
CvarBoundChoice parse_cvar_bound_choice(std::string_view text);

struct VarCoverage {
    double s;
};

struct VarDeviation {
    double eps;
};

struct CvarUpperDeviation {
    double eps;
    CvarBoundChoice bound = CvarBoundChoice::subgauss_general;
    std::optional<TailModel> tail;  // default_tail_model(dist) when empty
};

struct Convergence {
    std::vector<std::uint64_t> n_grid;
};

using ExperimentKind = std::variant<VarCoverage, VarDeviation, CvarUpperDeviation, Convergence>;

struct ExperimentPlan {
    DistributionSpec dist;
    RiskLevel level;
    ExperimentKind kind;
    std::uint64_t n = 1;  // unused by Convergence
    std::uint64_t replications = 1;
    std::uint64_t master_seed = 0;
};

/// "var-coverage", "var-deviation", "cvar-deviation" or "convergence".
std::string kind_name(const ExperimentKind& kind);

/// s for coverage plans, eps for deviation plans, NaN for convergence.
double kind_parameter(const ExperimentKind& kind);

/// The tail model a CVaR plan will use.
TailModel effective_tail(const ExperimentPlan& plan, const CvarUpperDeviation& kind);

/// Throws InvalidArgument, FeasibilityError or ConditionViolation for plans
/// that cannot run. Every run_* calls this before sampling.
void validate(const ExperimentPlan& plan);

struct ExperimentRecord {
    ExperimentPlan plan;
    std::uint64_t hits = 0;
    double frequency = 0.0;
    double binomial_stderr = 0.0;
    double bound_raw = 0.0;
    double bound_clamped = 0.0;
    DeviationBound bound;  // per-term breakdown (coverage: the floor as a single term)
    double duration_seconds = 0.0;
    bool pass = false;

    bool is_coverage() const { return std::holds_alternative<VarCoverage>(plan.kind); }
};

/// sqrt(p (1 - p) / R) at the observed frequency p.
double binomial_stderr(double frequency, std::uint64_t replications);

/// Dominance: frequency <= clamped + 3 stderr. Coverage: frequency >= clamped - 3 stderr.
bool recompute_pass(bool coverage, double frequency, double stderr_value, double bound_clamped);

ExperimentRecord run_var_coverage(const ExperimentPlan& plan, const RunOptions& opts = {});
ExperimentRecord run_var_deviation(const ExperimentPlan& plan, const RunOptions& opts = {});
ExperimentRecord run_cvar_deviation(const ExperimentPlan& plan, const RunOptions& opts = {});

/// Dispatches on plan.kind; throws InvalidArgument for Convergence plans.
ExperimentRecord run_experiment(const ExperimentPlan& plan, const RunOptions& opts = {});

struct ConvergencePoint {
    std::uint64_t n;
    double median_abs_var_error;  // median over replications of |v_hat - v_alpha|
    double median_cvar_error;     // median over replications of c_hat - c_alpha
};

struct ConvergenceResult {
    ExperimentPlan plan;
    std::vector<ConvergencePoint> points;
    double duration_seconds = 0.0;
};

ConvergenceResult run_convergence(const ExperimentPlan& plan, const RunOptions& opts = {});

/// Least-squares slope of log(y) against log(n).
double loglog_slope(const std::vector<std::uint64_t>& n, const std::vector<double>& y);

/// Median; averages the two middle values for even sizes.
double median(std::vector<double> values);

/// 3 distributions x alpha {0.9, 0.95} x n {1e3, 1e4, 1e5} x eps {0.1, 0.5, 1.0},
/// each as a VaR-deviation and a general-form CVaR-deviation plan.
std::vector<ExperimentPlan> default_grid(std::uint64_t master_seed, std::uint64_t replications = 2000);

} // namespace riskbounds
