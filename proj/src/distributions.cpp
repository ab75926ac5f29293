#include "riskbounds/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "riskbounds/errors.hpp"
#include "riskbounds/rng.hpp"

namespace riskbounds {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void require_not_nan(double x, const char* where) {
    if (std::isnan(x)) {
        throw InvalidArgument(std::string(where) + ": argument is NaN");
    }
}

void require_finite(double x, const char* name) {
    if (!std::isfinite(x)) {
        throw InvalidArgument(std::string(name) + " must be finite");
    }
}

std::string format_number(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_number(std::string_view text, std::string_view key) {
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, value);
    if (text.empty() || res.ec != std::errc() || res.ptr != last) {
        throw InvalidArgument("distribution parameter '" + std::string(key) + "' has malformed value '" +
                              std::string(text) + "'");
    }
    return value;
}

} // namespace

// --- standard normal -------------------------------------------------------

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw InvalidArgument("normal_quantile: p must lie in (0,1)");
    }
    // Acklam's coefficients; relative error below 1.15e-9 before refinement.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    constexpr double p_high = 1.0 - p_low;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= p_high) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Halley step. In the upper tail work with the survival function so the
    // residual is not swamped by 1 - p cancellation.
    double e;
    if (x > 0.0) {
        e = (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
    } else {
        e = normal_cdf(x) - p;
    }
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

// --- DistributionSpec ------------------------------------------------------

DistributionSpec DistributionSpec::gaussian(double mu, double sigma) {
    require_finite(mu, "gaussian mu");
    require_finite(sigma, "gaussian sigma");
    if (!(sigma > 0.0)) {
        throw InvalidArgument("gaussian sigma must be > 0");
    }
    return DistributionSpec(Gaussian{mu, sigma});
}

DistributionSpec DistributionSpec::exponential(double rate) {
    require_finite(rate, "exponential rate");
    if (!(rate > 0.0)) {
        throw InvalidArgument("exponential rate must be > 0");
    }
    return DistributionSpec(Exponential{rate});
}

DistributionSpec DistributionSpec::uniform(double a, double b) {
    require_finite(a, "uniform a");
    require_finite(b, "uniform b");
    if (!(a < b)) {
        throw InvalidArgument("uniform requires a < b");
    }
    return DistributionSpec(Uniform{a, b});
}

std::string DistributionSpec::family_name() const {
    return std::visit(overloaded{[](const Gaussian&) { return std::string("gaussian"); },
                                 [](const Exponential&) { return std::string("exponential"); },
                                 [](const Uniform&) { return std::string("uniform"); }},
                      family_);
}

std::string DistributionSpec::params_string() const {
    return std::visit(
        overloaded{
            [](const Gaussian& g) { return "mu=" + format_number(g.mu) + ",sigma=" + format_number(g.sigma); },
            [](const Exponential& e) { return "rate=" + format_number(e.rate); },
            [](const Uniform& u) { return "a=" + format_number(u.a) + ",b=" + format_number(u.b); }},
        family_);
}

std::string DistributionSpec::to_string() const {
    return family_name() + ":" + params_string();
}

double DistributionSpec::mean() const {
    return std::visit(overloaded{[](const Gaussian& g) { return g.mu; },
                                 [](const Exponential& e) { return 1.0 / e.rate; },
                                 [](const Uniform& u) { return 0.5 * (u.a + u.b); }},
                      family_);
}

DistributionSpec parse_distribution(std::string_view text) {
    const auto colon = text.find(':');
    const std::string_view family = text.substr(0, colon);
    const std::string_view rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

    std::vector<std::string_view> allowed;
    std::map<std::string, double, std::less<>> params;
    if (family == "gaussian") {
        allowed = {"mu", "sigma"};
        params = {{"mu", 0.0}, {"sigma", 1.0}};
    } else if (family == "exponential") {
        allowed = {"rate"};
        params = {{"rate", 1.0}};
    } else if (family == "uniform") {
        allowed = {"a", "b"};
        params = {{"a", 0.0}, {"b", 1.0}};
    } else {
        throw InvalidArgument("unknown distribution family '" + std::string(family) +
                              "' (expected gaussian, exponential or uniform)");
    }

    std::vector<std::string_view> seen;
    std::size_t pos = 0;
    while (pos < rest.size()) {
        auto comma = rest.find(',', pos);
        if (comma == std::string_view::npos) {
            comma = rest.size();
        }
        const std::string_view item = rest.substr(pos, comma - pos);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw InvalidArgument("distribution parameter '" + std::string(item) + "' is not key=value");
        }
        const std::string_view key = item.substr(0, eq);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw InvalidArgument("unknown parameter '" + std::string(key) + "' for " + std::string(family));
        }
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
            throw InvalidArgument("parameter '" + std::string(key) + "' given twice");
        }
        seen.push_back(key);
        params.find(key)->second = parse_number(item.substr(eq + 1), key);
        pos = comma + 1;
    }

    if (family == "gaussian") {
        return DistributionSpec::gaussian(params.at("mu"), params.at("sigma"));
    }
    if (family == "exponential") {
        return DistributionSpec::exponential(params.at("rate"));
    }
    return DistributionSpec::uniform(params.at("a"), params.at("b"));
}

// --- analytic functions ----------------------------------------------------

double cdf(const DistributionSpec& dist, double x) {
    require_not_nan(x, "cdf");
    return std::visit(overloaded{[x](const Gaussian& g) { return normal_cdf((x - g.mu) / g.sigma); },
                                 [x](const Exponential& e) { return x <= 0.0 ? 0.0 : -std::expm1(-e.rate * x); },
                                 [x](const Uniform& u) {
                                     if (x <= u.a) return 0.0;
                                     if (x >= u.b) return 1.0;
                                     return (x - u.a) / (u.b - u.a);
                                 }},
                      dist.family());
}

double density(const DistributionSpec& dist, double x) {
    require_not_nan(x, "density");
    return std::visit(overloaded{[x](const Gaussian& g) { return normal_pdf((x - g.mu) / g.sigma) / g.sigma; },
                                 [x](const Exponential& e) { return x < 0.0 ? 0.0 : e.rate * std::exp(-e.rate * x); },
                                 [x](const Uniform& u) { return (x < u.a || x > u.b) ? 0.0 : 1.0 / (u.b - u.a); }},
                      dist.family());
}

double quantile(const DistributionSpec& dist, double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw InvalidArgument("quantile: p must lie in (0,1)");
    }
    return std::visit(overloaded{[p](const Gaussian& g) { return g.mu + g.sigma * normal_quantile(p); },
                                 [p](const Exponential& e) { return -std::log1p(-p) / e.rate; },
                                 [p](const Uniform& u) { return u.a + p * (u.b - u.a); }},
                      dist.family());
}

double true_var(const DistributionSpec& dist, RiskLevel level) {
    return quantile(dist, level.value());
}

double true_cvar(const DistributionSpec& dist, RiskLevel level) {
    const double alpha = level.value();
    return std::visit(overloaded{[alpha](const Gaussian& g) {
                                     const double z = normal_quantile(alpha);
                                     return g.mu + g.sigma * normal_pdf(z) / (1.0 - alpha);
                                 },
                                 [alpha](const Exponential& e) { return (1.0 - std::log1p(-alpha)) / e.rate; },
                                 [alpha](const Uniform& u) {
                                     const double v = u.a + alpha * (u.b - u.a);
                                     return 0.5 * (v + u.b);
                                 }},
                      dist.family());
}

SortedSample sample(const DistributionSpec& dist, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    if (n == 0) {
        throw InvalidArgument("sample size n must be >= 1");
    }
    Engine engine = make_engine(seed, stream);
    std::vector<double> draws(n);
    for (auto& x : draws) {
        x = quantile(dist, uniform_open01(engine));
    }
    return SortedSample(std::move(draws));
}

// --- tail models -----------------------------------------------------------

TailModel TailModel::sub_gaussian(double sigma, double mu) {
    require_finite(sigma, "sub-Gaussian sigma");
    require_finite(mu, "sub-Gaussian mu");
    if (!(sigma > 0.0)) {
        throw InvalidArgument("sub-Gaussian sigma must be > 0");
    }
    return TailModel(SubGaussian{sigma, mu});
}

TailModel TailModel::sub_exponential(double sigma, double b, double b_prime, double mu) {
    require_finite(sigma, "sub-exponential sigma");
    require_finite(b, "sub-exponential b");
    require_finite(b_prime, "sub-exponential b'");
    require_finite(mu, "sub-exponential mu");
    if (!(sigma > 0.0)) {
        throw InvalidArgument("sub-exponential sigma must be > 0");
    }
    if (!(b > 0.0)) {
        throw InvalidArgument("sub-exponential b must be > 0");
    }
    if (!(b_prime > 0.0 && b_prime < 1.0 / b)) {
        throw InvalidArgument("sub-exponential b' must lie in (0, 1/b)");
    }
    return TailModel(SubExponential{sigma, b, b_prime, mu});
}

const SubGaussian& TailModel::as_sub_gaussian() const {
    if (const auto* p = std::get_if<SubGaussian>(&kind_)) {
        return *p;
    }
    throw InvalidArgument("tail model is sub-exponential, a sub-Gaussian model is required");
}

const SubExponential& TailModel::as_sub_exponential() const {
    if (const auto* p = std::get_if<SubExponential>(&kind_)) {
        return *p;
    }
    throw InvalidArgument("tail model is sub-Gaussian, a sub-exponential model is required");
}

double TailModel::sigma() const noexcept {
    return std::visit([](const auto& t) { return t.sigma; }, kind_);
}

double TailModel::mu() const noexcept {
    return std::visit([](const auto& t) { return t.mu; }, kind_);
}

TailModel default_tail_model(const DistributionSpec& dist) {
    return std::visit(overloaded{[](const Gaussian& g) { return TailModel::sub_gaussian(g.sigma, g.mu); },
                                 [](const Exponential& e) {
                                     return TailModel::sub_exponential(2.0 / e.rate, 2.0 / e.rate, e.rate / 4.0,
                                                                       1.0 / e.rate);
                                 },
                                 [](const Uniform& u) {
                                     return TailModel::sub_gaussian(0.5 * (u.b - u.a), 0.5 * (u.a + u.b));
                                 }},
                      dist.family());
}

} // namespace riskbounds
