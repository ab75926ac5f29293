#include "riskbounds/tailbounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "riskbounds/errors.hpp"

namespace riskbounds {

namespace {

constexpr std::uint64_t kMaxSearchN = std::uint64_t{1} << 62;

void require_positive_n(std::uint64_t n) {
    if (n == 0) {
        throw InvalidArgument("sample size n must be >= 1");
    }
}

void require_positive_eps(double eps) {
    if (!(eps > 0.0) || std::isnan(eps)) {
        throw InvalidArgument("eps must be > 0");
    }
}

// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b) {
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    if (hi == -std::numeric_limits<double>::infinity()) {
        return hi;
    }
    return hi + std::log1p(std::exp(lo - hi));
}

double half_width(std::uint64_t n, double s) {
    return 0.5 / std::pow(static_cast<double>(n), s);
}

bool interval_feasible(std::uint64_t n, double alpha, double s) {
    const double h = half_width(n, s);
    return alpha - h > 0.0 && alpha + h < 1.0;
}

DeviationBound make_bound(std::string name, const DistributionSpec* dist, RiskLevel level, std::uint64_t n,
                          double eps) {
    DeviationBound b;
    b.bound_name = std::move(name);
    if (dist != nullptr) {
        b.distribution = dist->to_string();
    }
    b.inputs = {{"alpha", level.value()}, {"n", static_cast<double>(n)}, {"eps", eps}};
    return b;
}

void add_tail_inputs(DeviationBound& b, const SubGaussian& t) {
    b.inputs.push_back({"sigma", t.sigma});
    b.inputs.push_back({"mu", t.mu});
}

void add_tail_inputs(DeviationBound& b, const SubExponential& t) {
    b.inputs.push_back({"sigma", t.sigma});
    b.inputs.push_back({"b", t.b});
    b.inputs.push_back({"b_prime", t.b_prime});
    b.inputs.push_back({"mu", t.mu});
}

void finish(DeviationBound& b) {
    double total = 0.0;
    for (const auto& t : b.terms) {
        total += t.value;
    }
    b.total = total;
}

void require_var_above_mean(double v_alpha, double mu) {
    if (!(v_alpha - mu > 0.0)) {
        throw ConditionViolation("CVaR bound requires v_alpha - mu > 0 (v_alpha = " + std::to_string(v_alpha) +
                                     ", mu = " + std::to_string(mu) + ")",
                                 mu);
    }
}

// T4 = exp(-2 n eps (1 - alpha)^2), shared by every CVaR bound.
double dkw_tail_term(std::uint64_t n, double eps, double alpha) {
    const double q = 1.0 - alpha;
    return std::exp(-2.0 * static_cast<double>(n) * eps * q * q);
}

// T2, T3 with the exact delta gaps (general forms).
void add_exact_var_terms(DeviationBound& b, const DistributionSpec& dist, RiskLevel level, std::uint64_t n,
                         double eps) {
    const double dn = static_cast<double>(n);
    const double alpha = level.value();
    const double wide = dn * (1.0 - alpha) * eps / 8.0;
    const double narrow = std::sqrt(eps) / 4.0;
    const DeltaEpsilon d1 = delta_epsilon(dist, level, wide, wide);
    const DeltaEpsilon d2 = delta_epsilon(dist, level, narrow, narrow);
    b.terms.push_back({"var_deviation_wide", 2.0 * std::exp(-2.0 * dn * d1.value * d1.value)});
    b.terms.push_back({"var_deviation_narrow", 2.0 * std::exp(-2.0 * dn * d2.value * d2.value)});
    b.terms.push_back({"dkw_at_var", dkw_tail_term(n, eps, alpha)});
    b.diagnostics.push_back({"wide_radius", wide});
    b.diagnostics.push_back({"narrow_radius", narrow});
    b.diagnostics.push_back({"delta_eps1", d1.value});
    b.diagnostics.push_back({"delta_eps2", d2.value});
}

// T2, T3 through the density constants c1, c2 (simplified forms).
void add_density_var_terms(DeviationBound& b, const DistributionSpec& dist, RiskLevel level, std::uint64_t n,
                           double eps) {
    const double dn = static_cast<double>(n);
    const double alpha = level.value();
    const double v = true_var(dist, level);
    const double wide = dn * (1.0 - alpha) * eps / 8.0;
    const double narrow = std::sqrt(eps) / 4.0;
    const DensityMinimum f1 = min_density(dist, v - wide, v + wide);
    const DensityMinimum f2 = min_density(dist, v - narrow, v + narrow);
    // c1 eps^2 = (f1 * wide)^2 and c2 eps = (f2 * narrow)^2.
    const double scale1 = dn * (1.0 - alpha) / 8.0;
    const double c1 = f1.value * f1.value * scale1 * scale1;
    const double c2 = f2.value * f2.value / 16.0;
    const double g1 = f1.value * wide;
    const double g2 = f2.value * narrow;
    b.terms.push_back({"var_deviation_wide", 2.0 * std::exp(-2.0 * dn * g1 * g1)});
    b.terms.push_back({"var_deviation_narrow", 2.0 * std::exp(-2.0 * dn * g2 * g2)});
    b.terms.push_back({"dkw_at_var", dkw_tail_term(n, eps, alpha)});
    b.diagnostics.push_back({"wide_radius", wide});
    b.diagnostics.push_back({"narrow_radius", narrow});
    b.diagnostics.push_back({"density_min_wide", f1.value});
    b.diagnostics.push_back({"density_min_narrow", f2.value});
    b.diagnostics.push_back({"c1", c1});
    b.diagnostics.push_back({"c2", c2});
}

SampleSize invert_bound(double delta, const std::function<double(std::uint64_t)>& bound) {
    SampleSize out{false, 0, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), ""};
    const double at_one = bound(1);
    if (at_one <= delta) {
        out.achievable = true;
        out.n = 1;
        out.bound_at_n = at_one;
        return out;
    }
    std::uint64_t lo = 1;  // bound(lo) > delta
    std::uint64_t hi = 2;
    double at_hi = bound(hi);
    while (at_hi > delta) {
        if (hi >= kMaxSearchN) {
            out.reason = "bound stays above delta up to n = 2^62";
            return out;
        }
        lo = hi;
        hi *= 2;
        at_hi = bound(hi);
    }
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        const double at_mid = bound(mid);
        if (at_mid <= delta) {
            hi = mid;
            at_hi = at_mid;
        } else {
            lo = mid;
        }
    }
    out.achievable = true;
    out.n = hi;
    out.bound_at_n = at_hi;
    out.bound_at_n_minus_1 = bound(hi - 1);
    return out;
}

void require_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InvalidArgument("delta must lie in (0,1)");
    }
}

} // namespace

double DeviationBound::term(std::string_view label) const {
    for (const auto& t : terms) {
        if (t.label == label) {
            return t.value;
        }
    }
    throw InvalidArgument("bound '" + bound_name + "' has no term '" + std::string(label) + "'");
}

std::optional<double> DeviationBound::diagnostic(std::string_view label) const {
    for (const auto& d : diagnostics) {
        if (d.label == label) {
            return d.value;
        }
    }
    return std::nullopt;
}

double dkw_bound(std::uint64_t n, double eps) {
    require_positive_n(n);
    require_positive_eps(eps);
    return 2.0 * std::exp(-2.0 * static_cast<double>(n) * eps * eps);
}

DeviationBound dkw_deviation_bound(std::uint64_t n, double eps) {
    DeviationBound b;
    b.bound_name = "dkw";
    b.inputs = {{"n", static_cast<double>(n)}, {"eps", eps}};
    b.terms.push_back({"dkw", dkw_bound(n, eps)});
    finish(b);
    return b;
}

std::uint64_t min_feasible_interval_n(RiskLevel level, double s) {
    if (!(s > 0.0 && s < 0.5)) {
        throw InvalidArgument("s must lie in (0, 1/2)");
    }
    const double alpha = level.value();
    const double margin = std::min(alpha, 1.0 - alpha);
    const double estimate = std::pow(0.5 / margin, 1.0 / s);
    if (!(estimate < static_cast<double>(kMaxSearchN))) {
        return std::numeric_limits<std::uint64_t>::max();
    }
    auto n = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(estimate));
    while (!interval_feasible(n, alpha, s)) {
        ++n;
    }
    while (n > 1 && interval_feasible(n - 1, alpha, s)) {
        --n;
    }
    return n;
}

VarIntervalLevels var_interval_levels(std::uint64_t n, RiskLevel level, double s) {
    require_positive_n(n);
    if (!(s > 0.0 && s < 0.5)) {
        throw InvalidArgument("s must lie in (0, 1/2), got " + std::to_string(s));
    }
    const double alpha = level.value();
    const double h = half_width(n, s);
    VarIntervalLevels out{n, s, h, alpha - h, alpha + h, 0.0};
    if (!interval_feasible(n, alpha, s)) {
        const std::uint64_t need = min_feasible_interval_n(level, s);
        throw FeasibilityError("quantile levels alpha -/+ 1/(2 n^s) = [" + std::to_string(out.alpha_minus) + ", " +
                                   std::to_string(out.alpha_plus) + "] leave (0,1) at n = " + std::to_string(n) +
                                   "; minimal feasible n is " + std::to_string(need),
                               need);
    }
    const double exponent = std::pow(static_cast<double>(n), 1.0 - 2.0 * s) / 8.0;
    out.confidence_floor = std::max(0.0, 1.0 - 2.0 * std::exp(-exponent));
    return out;
}

VarConfidenceInterval var_interval(const SortedSample& sample, RiskLevel level, double s) {
    const VarIntervalLevels lv = var_interval_levels(sample.size(), level, s);
    return {empirical_quantile(sample, lv.alpha_minus),
            empirical_quantile(sample, lv.alpha_plus),
            lv.confidence_floor,
            s,
            lv.alpha_minus,
            lv.alpha_plus};
}

DeltaEpsilon delta_epsilon(const DistributionSpec& dist, RiskLevel level, double left_arg, double right_arg) {
    if (!(left_arg > 0.0) || !(right_arg > 0.0)) {
        throw InvalidArgument("delta_epsilon arguments must be > 0");
    }
    const double v = true_var(dist, level);
    const double fv = cdf(dist, v);
    const double upper = std::max(0.0, cdf(dist, v + left_arg) - fv);
    const double lower = std::max(0.0, fv - cdf(dist, v - right_arg));
    return {std::min(upper, lower), left_arg, right_arg, upper, lower};
}

DensityMinimum min_density(const DistributionSpec& dist, double lo, double hi) {
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw InvalidArgument("min_density requires a finite interval lo <= hi");
    }
    constexpr int kGrid = 1024;
    const double step = (hi - lo) / (kGrid - 1);
    DensityMinimum best{lo, density(dist, lo)};
    int best_i = 0;
    for (int i = 1; i < kGrid; ++i) {
        const double x = i == kGrid - 1 ? hi : lo + step * i;
        const double f = density(dist, x);
        if (f < best.value) {
            best = {x, f};
            best_i = i;
        }
    }
    if (best.value == 0.0 || step == 0.0) {
        return best;
    }
    // Golden-section search on the bracketing grid cells.
    double a = std::max(lo, lo + step * (best_i - 1));
    double b = std::min(hi, lo + step * (best_i + 1));
    const double inv_phi = 1.0 / std::numbers::phi;
    double c = b - (b - a) * inv_phi;
    double d = a + (b - a) * inv_phi;
    double fc = density(dist, c);
    double fd = density(dist, d);
    while (b - a > 1e-6) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = density(dist, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = density(dist, d);
        }
    }
    for (const double x : {a, b, c, d}) {
        const double f = density(dist, x);
        if (f < best.value) {
            best = {x, f};
        }
    }
    return best;
}

DeviationBound var_deviation_bound(const DistributionSpec& dist, RiskLevel level, std::uint64_t n, double eps) {
    require_positive_n(n);
    require_positive_eps(eps);
    DeviationBound b = make_bound("var-deviation", &dist, level, n, eps);
    const double dn = static_cast<double>(n);
    const DeltaEpsilon d = delta_epsilon(dist, level, eps, eps);
    b.terms.push_back({"var_deviation", 2.0 * std::exp(-2.0 * dn * d.value * d.value)});

    const double v = true_var(dist, level);
    const DensityMinimum f = min_density(dist, v - eps, v + eps);
    const double c = f.value * f.value;
    b.diagnostics.push_back({"delta_eps", d.value});
    b.diagnostics.push_back({"upper_gap", d.upper_gap});
    b.diagnostics.push_back({"lower_gap", d.lower_gap});
    b.diagnostics.push_back({"density_min", f.value});
    b.diagnostics.push_back({"c", c});
    b.diagnostics.push_back({"density_constant_form", 2.0 * std::exp(-2.0 * dn * c * eps * eps)});
    finish(b);
    return b;
}

SubGaussianCondition check_subgauss_condition(const SubGaussian& tail, double v_alpha, RiskLevel level) {
    const double gap = v_alpha - tail.mu;
    SubGaussianCondition out{gap > 0.0, false, 0.0};
    const double log_inv = -std::log1p(-level.value());  // ln(1/(1-alpha))
    out.threshold = std::sqrt(gap * gap / (2.0 * log_inv));
    out.satisfied = out.var_above_mean && tail.sigma < out.threshold;
    return out;
}

SubExponentialCondition check_subexp_condition(const SubExponential& tail, double v_alpha, RiskLevel level) {
    const double gap = v_alpha - tail.mu;
    SubExponentialCondition out{gap > 0.0, false, 0.0, 0.0, 0.0};
    out.m_b = std::min(gap / (tail.sigma * tail.sigma), tail.b_prime);
    out.radicand = 2.0 * std::log1p(-level.value()) + 2.0 * gap * out.m_b;
    if (!out.var_above_mean || out.radicand <= 0.0) {
        out.threshold = 0.0;
        return out;
    }
    out.threshold = std::sqrt(out.radicand / (out.m_b * out.m_b));
    out.satisfied = tail.sigma < out.threshold;
    return out;
}

DeviationBound cvar_bound_subgauss_general(const SubGaussian& tail, const DistributionSpec& dist, RiskLevel level,
                                           std::uint64_t n, double eps) {
    require_positive_n(n);
    require_positive_eps(eps);
    const double v = true_var(dist, level);
    require_var_above_mean(v, tail.mu);
    DeviationBound b = make_bound("cvar-subgauss-general", &dist, level, n, eps);
    add_tail_inputs(b, tail);
    b.conditions.push_back({"var_above_mean", true, tail.mu});

    const double alpha = level.value();
    const double gap = v - tail.mu;
    const double var2 = tail.sigma * tail.sigma;
    const double log_bracket = log_add_exp(std::log(alpha), -gap * gap / (2.0 * var2));
    const double factor = -eps * (1.0 - alpha) * gap / (2.0 * var2) + log_bracket;
    b.terms.push_back({"chernoff", std::exp(static_cast<double>(n) * factor)});
    b.diagnostics.push_back({"t1_bracket", std::exp(log_bracket)});
    b.diagnostics.push_back({"t1_log_factor", factor});
    add_exact_var_terms(b, dist, level, n, eps);
    finish(b);
    return b;
}

DeviationBound cvar_bound_subexp_general(const SubExponential& tail, const DistributionSpec& dist,
                                         RiskLevel level, std::uint64_t n, double eps) {
    require_positive_n(n);
    require_positive_eps(eps);
    const double v = true_var(dist, level);
    require_var_above_mean(v, tail.mu);
    DeviationBound b = make_bound("cvar-subexp-general", &dist, level, n, eps);
    add_tail_inputs(b, tail);
    b.conditions.push_back({"var_above_mean", true, tail.mu});

    const double alpha = level.value();
    const SubExponentialCondition cond = check_subexp_condition(tail, v, level);
    const double m = cond.m_b;
    const double log_bracket =
        log_add_exp(std::log(alpha), m * (tail.mu - v) + 0.5 * m * m * tail.sigma * tail.sigma);
    const double factor = -eps * (1.0 - alpha) * m / 2.0 + log_bracket;
    b.terms.push_back({"chernoff", std::exp(static_cast<double>(n) * factor)});
    b.diagnostics.push_back({"m_b", m});
    b.diagnostics.push_back({"t1_bracket", std::exp(log_bracket)});
    b.diagnostics.push_back({"t1_log_factor", factor});
    add_exact_var_terms(b, dist, level, n, eps);
    finish(b);
    return b;
}

DeviationBound cvar_bound_general(const TailModel& tail, const DistributionSpec& dist, RiskLevel level,
                                  std::uint64_t n, double eps) {
    if (tail.is_sub_gaussian()) {
        return cvar_bound_subgauss_general(tail.as_sub_gaussian(), dist, level, n, eps);
    }
    return cvar_bound_subexp_general(tail.as_sub_exponential(), dist, level, n, eps);
}

DeviationBound cvar_bound_subgauss(const SubGaussian& tail, const DistributionSpec& dist, RiskLevel level,
                                   std::uint64_t n, double eps) {
    require_positive_n(n);
    require_positive_eps(eps);
    const double v = true_var(dist, level);
    require_var_above_mean(v, tail.mu);
    const SubGaussianCondition cond = check_subgauss_condition(tail, v, level);
    if (!cond.satisfied) {
        throw ConditionViolation("sub-Gaussian sigma = " + std::to_string(tail.sigma) +
                                     " is not below the threshold " + std::to_string(cond.threshold),
                                 cond.threshold);
    }
    DeviationBound b = make_bound("cvar-subgauss", &dist, level, n, eps);
    add_tail_inputs(b, tail);
    b.conditions.push_back({"var_above_mean", true, tail.mu});
    b.conditions.push_back({"sigma_below_threshold", true, cond.threshold});

    const double alpha = level.value();
    const double gap = v - tail.mu;
    const double rate = eps * (1.0 - alpha) * gap / (2.0 * tail.sigma * tail.sigma);
    b.terms.push_back({"chernoff", std::exp(-static_cast<double>(n) * rate)});
    add_density_var_terms(b, dist, level, n, eps);
    finish(b);
    return b;
}

DeviationBound cvar_bound_subexp(const SubExponential& tail, const DistributionSpec& dist, RiskLevel level,
                                 std::uint64_t n, double eps) {
    require_positive_n(n);
    require_positive_eps(eps);
    const double v = true_var(dist, level);
    require_var_above_mean(v, tail.mu);
    const SubExponentialCondition cond = check_subexp_condition(tail, v, level);
    if (!cond.satisfied) {
        throw ConditionViolation("sub-exponential condition fails: radicand = " + std::to_string(cond.radicand) +
                                     ", sigma threshold = " + std::to_string(cond.threshold),
                                 cond.threshold);
    }
    DeviationBound b = make_bound("cvar-subexp", &dist, level, n, eps);
    add_tail_inputs(b, tail);
    b.conditions.push_back({"var_above_mean", true, tail.mu});
    b.conditions.push_back({"radicand_positive", true, cond.radicand});
    b.conditions.push_back({"sigma_below_threshold", true, cond.threshold});

    const double alpha = level.value();
    b.terms.push_back({"chernoff", std::exp(-static_cast<double>(n) * eps * (1.0 - alpha) * cond.m_b / 2.0)});
    b.diagnostics.push_back({"m_b", cond.m_b});
    add_density_var_terms(b, dist, level, n, eps);
    finish(b);
    return b;
}

SampleSize sample_size_for_var(double eps, double delta, const DistributionSpec& dist, RiskLevel level) {
    require_positive_eps(eps);
    require_delta(delta);
    const DeltaEpsilon d = delta_epsilon(dist, level, eps, eps);
    if (d.value <= 0.0) {
        return {false, 0, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                "delta_eps is zero: no CDF mass within eps of v_alpha"};
    }
    return invert_bound(delta, [&](std::uint64_t n) { return 2.0 * std::exp(-2.0 * static_cast<double>(n) * d.value * d.value); });
}

SampleSize sample_size_for_cvar(double eps, double delta, const TailModel& tail, const DistributionSpec& dist,
                                RiskLevel level) {
    require_positive_eps(eps);
    require_delta(delta);
    const DeviationBound probe = cvar_bound_general(tail, dist, level, 1, eps);
    const double factor = *probe.diagnostic("t1_log_factor");
    if (!(factor < 0.0)) {
        return {false, 0, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                "Chernoff term does not decay in n (per-sample log-factor " + std::to_string(factor) + " >= 0)"};
    }
    return invert_bound(delta, [&](std::uint64_t n) { return cvar_bound_general(tail, dist, level, n, eps).total; });
}

} // namespace riskbounds
