#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "riskbounds/distributions.hpp"
#include "riskbounds/estimators.hpp"

namespace riskbounds {

struct NamedValue {
    std::string label;
    double value;
};

struct ConditionCheck {
    std::string name;
    bool satisfied;
    double threshold;
};

/// An evaluated tail bound. `total` is the sum of `terms` and may exceed 1;
/// `clamped()` gives the probability reading. `diagnostics` carries values
/// that are not summands (delta_epsilon, density constants, log-factors).
struct DeviationBound {
    std::string bound_name;
    std::string distribution;  // spec string of the law, empty for distribution-free bounds
    std::vector<NamedValue> inputs;
    std::vector<NamedValue> terms;
    std::vector<ConditionCheck> conditions;
    std::vector<NamedValue> diagnostics;
    double total = 0.0;

    double clamped() const noexcept { return total < 1.0 ? total : 1.0; }
    double term(std::string_view label) const;
    std::optional<double> diagnostic(std::string_view label) const;
};

// --- DKW and the distribution-free VaR interval -----------------------------

/// 2 exp(-2 n eps^2).
double dkw_bound(std::uint64_t n, double eps);

/// DKW as a one-term DeviationBound, for uniform reporting.
DeviationBound dkw_deviation_bound(std::uint64_t n, double eps);

/// Quantile levels and coverage floor of the distribution-free interval;
/// needs only (n, alpha, s).
struct VarIntervalLevels {
    std::uint64_t n;
    double s;
    double half_width;  // 1 / (2 n^s)
    double alpha_minus;
    double alpha_plus;
    double confidence_floor;  // max(0, 1 - 2 exp(-n^{1-2s} / 8))
};

/// Throws InvalidArgument if s is outside (0, 1/2) and FeasibilityError if
/// alpha -/+ 1/(2 n^s) leaves (0,1).
VarIntervalLevels var_interval_levels(std::uint64_t n, RiskLevel level, double s);

/// Smallest n for which 1/(2 n^s) < min(alpha, 1 - alpha).
std::uint64_t min_feasible_interval_n(RiskLevel level, double s);

struct VarConfidenceInterval {
    double lower;  // empirical quantile at alpha_minus
    double upper;  // empirical quantile at alpha_plus
    double confidence_floor;
    double s;
    double alpha_minus;
    double alpha_plus;

    bool contains(double x) const noexcept { return lower <= x && x <= upper; }
};

VarConfidenceInterval var_interval(const SortedSample& sample, RiskLevel level, double s);

// --- distribution-dependent VaR deviation -----------------------------------

struct DeltaEpsilon {
    double value;  // min(upper_gap, lower_gap)
    double left_arg;
    double right_arg;
    double upper_gap;  // F(v + left_arg) - F(v)
    double lower_gap;  // F(v) - F(v - right_arg)
};

/// CDF mass gaps on either side of v_alpha. Arguments must be > 0 (may be +inf).
DeltaEpsilon delta_epsilon(const DistributionSpec& dist, RiskLevel level, double left_arg, double right_arg);

struct DensityMinimum {
    double argmin;
    double value;
};

/// Minimum of the density over [lo, hi]: 1024-point grid, then golden-section
/// refinement to 1e-6 around the best grid point.
DensityMinimum min_density(const DistributionSpec& dist, double lo, double hi);

/// Total 2 exp(-2 n delta_eps^2). The density-constant form
/// 2 exp(-2 n c eps^2), c = (min f on [v - eps, v + eps])^2, is reported as
/// a diagnostic; it is never smaller than the total.
DeviationBound var_deviation_bound(const DistributionSpec& dist, RiskLevel level, std::uint64_t n, double eps);

// --- CVaR upper-deviation bounds --------------------------------------------

struct SubGaussianCondition {
    bool var_above_mean;  // v_alpha - mu > 0
    bool satisfied;       // var_above_mean && sigma < threshold
    double threshold;     // sqrt((v - mu)^2 / (2 ln(1/(1 - alpha))))
};

SubGaussianCondition check_subgauss_condition(const SubGaussian& tail, double v_alpha, RiskLevel level);

struct SubExponentialCondition {
    bool var_above_mean;
    bool satisfied;
    double m_b;       // min((v - mu)/sigma^2, b')
    double radicand;  // 2 ln(1 - alpha) + 2 (v - mu) m_b
    double threshold; // sqrt(radicand / m_b^2), or 0 when radicand <= 0
};

SubExponentialCondition check_subexp_condition(const SubExponential& tail, double v_alpha, RiskLevel level);

/// Four-term bound valid for any sigma once v_alpha > mu. T1 is evaluated in
/// log space; its per-sample log-factor is reported as the diagnostic
/// "t1_log_factor" (T1 = exp(n * t1_log_factor), so T1 decays in n iff it is
/// negative). Throws ConditionViolation if v_alpha <= mu.
DeviationBound cvar_bound_subgauss_general(const SubGaussian& tail, const DistributionSpec& dist, RiskLevel level,
                                           std::uint64_t n, double eps);

/// Same assembly with the sub-exponential T1 using m_b as the Chernoff exponent.
DeviationBound cvar_bound_subexp_general(const SubExponential& tail, const DistributionSpec& dist,
                                         RiskLevel level, std::uint64_t n, double eps);

/// Dispatches on the tail kind to one of the two general forms above.
DeviationBound cvar_bound_general(const TailModel& tail, const DistributionSpec& dist, RiskLevel level,
                                  std::uint64_t n, double eps);

/// Simplified sub-Gaussian bound. Throws ConditionViolation (carrying the
/// sigma threshold) unless check_subgauss_condition is satisfied.
DeviationBound cvar_bound_subgauss(const SubGaussian& tail, const DistributionSpec& dist, RiskLevel level,
                                   std::uint64_t n, double eps);

/// Simplified sub-exponential bound; gated by check_subexp_condition.
DeviationBound cvar_bound_subexp(const SubExponential& tail, const DistributionSpec& dist, RiskLevel level,
                                 std::uint64_t n, double eps);

// --- bound inversion --------------------------------------------------------

struct SampleSize {
    bool achievable;
    std::uint64_t n;              // smallest n with bound(n) <= delta (0 if not achievable)
    double bound_at_n;
    double bound_at_n_minus_1;    // NaN when n == 1
    std::string reason;           // why not achievable
};

/// Smallest n with var_deviation_bound(...).total <= delta.
SampleSize sample_size_for_var(double eps, double delta, const DistributionSpec& dist, RiskLevel level);

/// Smallest n with cvar_bound_general(...).total <= delta. Reports not
/// achievable when T1's log-factor is >= 0 (T1 >= 1 for every n).
SampleSize sample_size_for_cvar(double eps, double delta, const TailModel& tail, const DistributionSpec& dist,
                                RiskLevel level);

} // namespace riskbounds
