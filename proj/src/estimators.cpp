#include "riskbounds/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "riskbounds/errors.hpp"

namespace riskbounds {

namespace {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace

SortedSample::SortedSample(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw InvalidArgument("sample must contain at least one value");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw InvalidArgument("sample value at index " + std::to_string(i) + " is not finite");
        }
    }
    std::sort(values_.begin(), values_.end());
}

double SortedSample::order_statistic(std::size_t k) const {
    if (k == 0 || k > values_.size()) {
        throw InvalidArgument("order statistic index " + std::to_string(k) + " outside [1, " +
                              std::to_string(values_.size()) + "]");
    }
    return values_[k - 1];
}

RiskLevel::RiskLevel(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("risk level alpha must lie in (0,1), got " + std::to_string(alpha));
    }
}

double empirical_cdf(const SortedSample& sample, double x) {
    if (std::isnan(x)) {
        throw InvalidArgument("empirical_cdf: x is NaN");
    }
    const auto v = sample.values();
    const auto count = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), x) - v.begin());
    return static_cast<double>(count) / static_cast<double>(v.size());
}

std::size_t empirical_quantile_index(std::size_t n, double p) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw InvalidArgument("quantile level p must lie in (0,1], got " + std::to_string(p));
    }
    const double dn = static_cast<double>(n);
    auto k = static_cast<std::size_t>(std::ceil(dn * p));
    k = std::clamp<std::size_t>(k, 1, n);
    while (k > 1 && static_cast<double>(k - 1) / dn >= p) {
        --k;
    }
    while (k < n && static_cast<double>(k) / dn < p) {
        ++k;
    }
    return k;
}

double empirical_quantile(const SortedSample& sample, double p) {
    return sample.order_statistic(empirical_quantile_index(sample.size(), p));
}

double estimate_var(const SortedSample& sample, RiskLevel level) {
    return empirical_quantile(sample, level.value());
}

RiskEstimates estimate_risk(const SortedSample& sample, RiskLevel level) {
    const std::size_t k = empirical_quantile_index(sample.size(), level.value());
    const auto v = sample.values();
    const double var = v[k - 1];
    // Values at or below the quantile contribute nothing to the positive part.
    CompensatedSum excess;
    for (std::size_t i = k; i < v.size(); ++i) {
        excess.add(v[i] - var);
    }
    const double n = static_cast<double>(v.size());
    const double cvar = var + excess.value() / (n * (1.0 - level.value()));
    return {var, cvar};
}

double estimate_cvar(const SortedSample& sample, RiskLevel level) {
    return estimate_risk(sample, level).cvar;
}

} // namespace riskbounds
