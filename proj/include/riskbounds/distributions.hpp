#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "riskbounds/estimators.hpp"

namespace riskbounds {

struct Gaussian {
    double mu;
    double sigma;
};

struct Exponential {
    double rate;
};

struct Uniform {
    double a;
    double b;
};

/// A reference law with continuous, strictly increasing CDF and closed-form
/// VaR/CVaR. Parameters are validated on construction.
class DistributionSpec {
public:
    using Family = std::variant<Gaussian, Exponential, Uniform>;

    static DistributionSpec gaussian(double mu, double sigma);
    static DistributionSpec exponential(double rate);
    static DistributionSpec uniform(double a, double b);

    const Family& family() const noexcept { return family_; }

    /// "gaussian", "exponential" or "uniform".
    std::string family_name() const;
    /// Parameter list as used in the spec grammar, e.g. "mu=0,sigma=1".
    std::string params_string() const;
    /// Full spec string, e.g. "gaussian:mu=0,sigma=1".
    std::string to_string() const;

    double mean() const;

private:
    explicit DistributionSpec(Family f) : family_(f) {}
    Family family_;
};

/// Parses `family:key=value,...`. Families and keys:
///   gaussian:mu=<real>,sigma=<real>     (mu defaults to 0, sigma to 1)
///   exponential:rate=<real>             (rate defaults to 1)
///   uniform:a=<real>,b=<real>           (a defaults to 0, b to 1)
/// Unknown families, unknown or repeated keys and malformed numbers throw InvalidArgument.
DistributionSpec parse_distribution(std::string_view text);

double cdf(const DistributionSpec& dist, double x);
double density(const DistributionSpec& dist, double x);
/// Analytic inverse CDF for p in (0,1).
double quantile(const DistributionSpec& dist, double p);

/// v_alpha = F^{-1}(alpha).
double true_var(const DistributionSpec& dist, RiskLevel level);
/// c_alpha = E[X | X >= v_alpha], closed form per family.
double true_cvar(const DistributionSpec& dist, RiskLevel level);

/// n i.i.d. draws by inverse transform from substream (seed, stream).
SortedSample sample(const DistributionSpec& dist, std::size_t n, std::uint64_t seed,
                    std::uint64_t stream = 0);

/// Standard normal CDF, density and quantile. The quantile is Acklam's
/// rational approximation followed by one Halley step against the CDF.
double normal_cdf(double z);
double normal_pdf(double z);
double normal_quantile(double p);

struct SubGaussian {
    double sigma;
    double mu;
};

struct SubExponential {
    double sigma;
    double b;
    double b_prime;
    double mu;
};

/// Tail description consumed by the CVaR bounds.
class TailModel {
public:
    using Kind = std::variant<SubGaussian, SubExponential>;

    /// Throws InvalidArgument unless sigma > 0.
    static TailModel sub_gaussian(double sigma, double mu);
    /// Throws InvalidArgument unless sigma > 0, b > 0 and 0 < b_prime < 1/b.
    static TailModel sub_exponential(double sigma, double b, double b_prime, double mu);

    const Kind& kind() const noexcept { return kind_; }
    bool is_sub_gaussian() const noexcept { return std::holds_alternative<SubGaussian>(kind_); }
    const SubGaussian& as_sub_gaussian() const;
    const SubExponential& as_sub_exponential() const;

    double sigma() const noexcept;
    double mu() const noexcept;

private:
    explicit TailModel(Kind k) : kind_(k) {}
    Kind kind_;
};

/// Catalogued tail parameters for each family:
///   Gaussian(mu, sigma)  -> SubGaussian{sigma, mu}
///   Uniform(a, b)        -> SubGaussian{(b-a)/2, (a+b)/2}         (Hoeffding's lemma)
///   Exponential(rate)    -> SubExponential{2/rate, 2/rate, rate/4, 1/rate}
TailModel default_tail_model(const DistributionSpec& dist);

} // namespace riskbounds
