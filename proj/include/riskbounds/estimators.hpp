#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace riskbounds {

/// Immutable, ascending sample of finite doubles. Construction sorts once;
/// every estimator below relies on the ordering.
class SortedSample {
public:
    /// Sorts `values`. Throws InvalidArgument on an empty input or any
    /// NaN / infinite entry.
    explicit SortedSample(std::vector<double> values);

    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }

    /// k-th smallest value, 1-based (X_[k]).
    double order_statistic(std::size_t k) const;

    double min() const noexcept { return values_.front(); }
    double max() const noexcept { return values_.back(); }

private:
    std::vector<double> values_;
};

/// Risk level alpha, strictly inside (0,1).
class RiskLevel {
public:
    explicit RiskLevel(double alpha);
    double value() const noexcept { return alpha_; }

private:
    double alpha_;
};

/// Fraction of sample values <= x.
double empirical_cdf(const SortedSample& sample, double x);

/// 1-based index of inf{x : F_n(x) >= p}. The index is ceil(n p), corrected so
/// that it agrees with the comparison `k / n >= p` carried out in double
/// arithmetic (n p can round across an integer).
std::size_t empirical_quantile_index(std::size_t n, double p);

/// inf{x : F_n(x) >= p} for p in (0,1], i.e. X_[ceil(n p)].
double empirical_quantile(const SortedSample& sample, double p);

/// Empirical VaR: the alpha-quantile of the sample.
double estimate_var(const SortedSample& sample, RiskLevel level);

/// Empirical CVaR: v + sum (X_i - v)^+ / (n (1 - alpha)) with v the empirical VaR.
double estimate_cvar(const SortedSample& sample, RiskLevel level);

/// Both estimates from one pass; cheaper when the caller needs the pair.
struct RiskEstimates {
    double var;
    double cvar;
};
RiskEstimates estimate_risk(const SortedSample& sample, RiskLevel level);

} // namespace riskbounds
