#include <doctest.h>

#include <cmath>
#include <limits>

#include "riskbounds/distributions.hpp"
#include "riskbounds/errors.hpp"
#include "riskbounds/tailbounds.hpp"

using namespace riskbounds;

namespace {

const DistributionSpec kGauss = DistributionSpec::gaussian(0, 1);
const DistributionSpec kExp = DistributionSpec::exponential(1);
const DistributionSpec kUnif = DistributionSpec::uniform(0, 1);
constexpr double kInf = std::numeric_limits<double>::infinity();

// Reference values below were computed independently with 30-digit
// arbitrary-precision arithmetic (mpmath).
constexpr double kDeltaEpsGauss95 = 0.009494824390495149;   // min gap at eps = 0.1
constexpr double kLowerGapGauss95 = 0.011190836213344302;

double sum_terms(const DeviationBound& b) {
    double s = 0.0;
    for (const auto& t : b.terms) s += t.value;
    return s;
}

void check_well_formed(const DeviationBound& b) {
    for (const auto& t : b.terms) {
        CHECK(t.value >= 0.0);
    }
    CHECK(b.total == sum_terms(b));
}

} // namespace

TEST_CASE("dkw_bound") {
    CHECK(dkw_bound(100, 0.1) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-15));
    CHECK(dkw_bound(100, 0.1) == doctest::Approx(0.27067).epsilon(1e-5));
    double prev = dkw_bound(50, 0.01);
    for (double eps = 0.02; eps < 2.0; eps += 0.01) {
        const double b = dkw_bound(50, eps);
        CHECK(b < prev);
        prev = b;
    }
    CHECK(dkw_bound(50, 100.0) == 0.0);
    CHECK_THROWS_AS(dkw_bound(1, 0.0), InvalidArgument);
    CHECK_THROWS_AS(dkw_bound(1, -1.0), InvalidArgument);
    CHECK_THROWS_AS(dkw_bound(0, 0.1), InvalidArgument);
    CHECK(dkw_deviation_bound(100, 0.1).total == dkw_bound(100, 0.1));
}

TEST_CASE("var_interval_levels") {
    const auto lv = var_interval_levels(10000, RiskLevel(0.9), 0.3);
    CHECK(lv.half_width == doctest::Approx(0.031547867224009662).epsilon(1e-13));
    CHECK(lv.alpha_minus == doctest::Approx(0.9 - 0.031547867224009662).epsilon(1e-13));
    CHECK(lv.alpha_plus == doctest::Approx(0.9 + 0.031547867224009662).epsilon(1e-13));
    CHECK(lv.confidence_floor == doctest::Approx(0.9862014594734675).epsilon(1e-13));

    CHECK_THROWS_AS(var_interval_levels(10, RiskLevel(0.5), 0.0), InvalidArgument);
    CHECK_THROWS_AS(var_interval_levels(10, RiskLevel(0.5), 0.5), InvalidArgument);

    // n = 1000, alpha = 0.95, s = 0.25: alpha+ = 0.95 + 0.08891 > 1.
    try {
        var_interval_levels(1000, RiskLevel(0.95), 0.25);
        FAIL("expected FeasibilityError");
    } catch (const FeasibilityError& e) {
        // 1/(2 n^0.25) < 0.05 needs n > 10^4; at n = 10^4 alpha+ rounds to exactly 1.
        CHECK(e.min_feasible_n() == 10001);
    }
}

TEST_CASE("min_feasible_interval_n is the boundary") {
    for (const double a : {0.5, 0.9, 0.95, 0.99, 0.01}) {
        for (const double s : {0.1, 0.25, 0.3, 0.45}) {
            const RiskLevel level(a);
            const auto n = min_feasible_interval_n(level, s);
            CAPTURE(a);
            CAPTURE(s);
            CHECK_NOTHROW(var_interval_levels(n, level, s));
            if (n > 1) {
                CHECK_THROWS_AS(var_interval_levels(n - 1, level, s), FeasibilityError);
            }
        }
    }
}

TEST_CASE("var_interval on a small sample") {
    std::vector<double> v(10);
    for (int i = 0; i < 10; ++i) v[i] = i + 1;
    const SortedSample s(v);
    const RiskLevel level(0.5);
    const auto iv = var_interval(s, level, 0.49);
    const double h = 0.5 / std::pow(10.0, 0.49);
    CHECK(iv.alpha_minus == doctest::Approx(0.5 - h));
    CHECK(iv.lower == s.order_statistic(static_cast<std::size_t>(std::ceil(10 * (0.5 - h)))));
    CHECK(iv.upper == s.order_statistic(static_cast<std::size_t>(std::ceil(10 * (0.5 + h)))));
    CHECK(iv.lower <= 5.0);
    CHECK(iv.upper >= 5.0);
    CHECK(iv.contains(estimate_var(s, level)));
    CHECK(iv.confidence_floor == 0.0);  // 1 - 2 exp(-10^0.02 / 8) < 0
}

TEST_CASE("delta_epsilon") {
    const auto d = delta_epsilon(kGauss, RiskLevel(0.95), 0.1, 0.1);
    CHECK(d.value == doctest::Approx(kDeltaEpsGauss95).epsilon(1e-10));
    CHECK(d.lower_gap == doctest::Approx(kLowerGapGauss95).epsilon(1e-10));
    CHECK(d.value == d.upper_gap);

    const auto u = delta_epsilon(kUnif, RiskLevel(0.5), 0.1, 0.1);
    CHECK(u.value == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(u.upper_gap == doctest::Approx(u.lower_gap).epsilon(1e-14));

    for (const auto& dist : {kGauss, kExp, kUnif}) {
        for (const double a : {0.1, 0.5, 0.9, 0.95}) {
            const auto inf = delta_epsilon(dist, RiskLevel(a), kInf, kInf);
            CHECK(inf.value == doctest::Approx(std::min(a, 1 - a)).epsilon(1e-12));
            const auto some = delta_epsilon(dist, RiskLevel(a), 0.3, 0.7);
            CHECK(some.value > 0.0);  // strictly increasing CDF
            CHECK(some.value <= std::min(a, 1 - a) + 1e-15);
        }
    }
    CHECK_THROWS_AS(delta_epsilon(kGauss, RiskLevel(0.9), 0.0, 0.1), InvalidArgument);
    CHECK_THROWS_AS(delta_epsilon(kGauss, RiskLevel(0.9), 0.1, -1.0), InvalidArgument);
}

TEST_CASE("min_density") {
    // Gaussian density on [1, 2] is decreasing: minimum at 2.
    const auto g = min_density(kGauss, 1.0, 2.0);
    CHECK(g.argmin == doctest::Approx(2.0));
    CHECK(g.value == doctest::Approx(normal_pdf(2.0)).epsilon(1e-12));
    // Symmetric interval around 0: minimum at either end.
    CHECK(min_density(kGauss, -1.5, 1.5).value == doctest::Approx(normal_pdf(1.5)).epsilon(1e-12));
    // Uniform inside its support is flat; crossing the edge drops to 0.
    CHECK(min_density(kUnif, 0.2, 0.8).value == 1.0);
    CHECK(min_density(kUnif, 0.9, 1.1).value == 0.0);
    CHECK(min_density(kExp, -0.5, 0.5).value == 0.0);
    // A bimodal-free interior minimum check: Gaussian with mu = 3 on [0, 6].
    const auto shifted = min_density(DistributionSpec::gaussian(3, 1), 0.0, 6.0);
    CHECK(shifted.value == doctest::Approx(normal_pdf(3.0)).epsilon(1e-12));
}

TEST_CASE("var_deviation_bound") {
    const RiskLevel level(0.95);
    const auto b = var_deviation_bound(kGauss, level, 1000, 0.1);
    check_well_formed(b);
    CHECK(b.total == doctest::Approx(1.670033690449889).epsilon(1e-9));
    CHECK(b.clamped() == 1.0);
    CHECK(*b.diagnostic("delta_eps") == doctest::Approx(kDeltaEpsGauss95).epsilon(1e-10));

    const auto big = var_deviation_bound(kGauss, level, 100000, 0.1);
    CHECK(big.total == doctest::Approx(2.954974091814006e-08).epsilon(1e-7));

    // Density-constant form: c = f(v + eps)^2 for the decreasing Gaussian tail.
    const double f = normal_pdf(1.6448536269514727 + 0.1);
    CHECK(*b.diagnostic("c") == doctest::Approx(f * f).epsilon(1e-9));
    for (const auto& dist : {kGauss, kExp, kUnif}) {
        for (const double eps : {0.01, 0.1, 0.5}) {
            const auto db = var_deviation_bound(dist, level, 500, eps);
            CHECK(*db.diagnostic("density_constant_form") >= db.total * (1 - 1e-12));
        }
    }
}

TEST_CASE("check_subgauss_condition") {
    const RiskLevel level(0.99);
    const double v = true_var(kGauss, level);
    const auto c = check_subgauss_condition({1.0, 0.0}, v, level);
    CHECK(c.var_above_mean);
    CHECK(c.threshold == doctest::Approx(0.7665435225820252).epsilon(1e-10));
    CHECK_FALSE(c.satisfied);

    const auto half = check_subgauss_condition({c.threshold / 2, 0.0}, v, level);
    CHECK(half.satisfied);
    const auto at = check_subgauss_condition({c.threshold, 0.0}, v, level);
    CHECK_FALSE(at.satisfied);  // strict inequality

    const RiskLevel low(0.3);
    const auto below = check_subgauss_condition({0.1, 0.0}, true_var(kGauss, low), low);
    CHECK_FALSE(below.var_above_mean);
    CHECK_FALSE(below.satisfied);
}

TEST_CASE("check_subexp_condition") {
    const RiskLevel level(0.95);
    const SubExponential tail = default_tail_model(kExp).as_sub_exponential();
    const double v = true_var(kExp, level);
    const auto c = check_subexp_condition(tail, v, level);
    CHECK(c.var_above_mean);
    CHECK(c.m_b == 0.25);
    CHECK(c.radicand == doctest::Approx(-4.993598410330986).epsilon(1e-12));
    CHECK(c.radicand < 0.0);
    CHECK(c.threshold == 0.0);
    CHECK_FALSE(c.satisfied);

    // Huge v - mu: the positive part of the radicand dominates.
    const auto big = check_subexp_condition({1.0, 1.0, 0.5, 0.0}, 1000.0, level);
    CHECK(big.satisfied);
    CHECK(big.m_b == 0.5);

    const auto below = check_subexp_condition(tail, 0.5, level);
    CHECK_FALSE(below.var_above_mean);
    CHECK_FALSE(below.satisfied);
}

TEST_CASE("general sub-Gaussian CVaR bound") {
    const RiskLevel level(0.95);
    const SubGaussian tail{1.0, 0.0};
    const auto b = cvar_bound_subgauss_general(tail, kGauss, level, 1000, 0.5);
    check_well_formed(b);
    REQUIRE(b.terms.size() == 4);
    CHECK(b.term("dkw_at_var") == doctest::Approx(0.0820849986238988).epsilon(1e-12));
    CHECK(*b.diagnostic("t1_bracket") == doctest::Approx(1.2085227122870803).epsilon(1e-12));

    // T1 from its closed form.
    const double v = 1.6448536269514727;
    const double log_t1 = -1000 * 0.5 * 0.05 * v / 2 + 1000 * std::log(0.95 + std::exp(-v * v / 2));
    CHECK(std::log(b.term("chernoff")) == doctest::Approx(log_t1).epsilon(1e-10));
    CHECK(*b.diagnostic("t1_log_factor") == doctest::Approx(log_t1 / 1000).epsilon(1e-10));

    // T2, T3 from delta_epsilon at the two radii.
    const double wide = 1000 * 0.05 * 0.5 / 8;
    const double narrow = std::sqrt(0.5) / 4;
    const double d1 = delta_epsilon(kGauss, level, wide, wide).value;
    const double d2 = delta_epsilon(kGauss, level, narrow, narrow).value;
    CHECK(b.term("var_deviation_wide") == doctest::Approx(2 * std::exp(-2000 * d1 * d1)).epsilon(1e-12));
    CHECK(b.term("var_deviation_narrow") == doctest::Approx(2 * std::exp(-2000 * d2 * d2)).epsilon(1e-12));

    // As eps grows, T1 and T4 vanish while T2, T3 saturate: delta_eps cannot
    // exceed min(1 - alpha, alpha).
    const auto far = cvar_bound_subgauss_general(tail, kGauss, level, 1000, 1e4);
    const double floor_term = 2 * std::exp(-2000 * 0.05 * 0.05);
    CHECK(far.term("chernoff") < 1e-12);
    CHECK(far.term("dkw_at_var") < 1e-12);
    CHECK(far.term("var_deviation_wide") == doctest::Approx(floor_term).epsilon(1e-9));
    CHECK(far.term("var_deviation_narrow") == doctest::Approx(floor_term).epsilon(1e-9));

    CHECK_THROWS_AS(cvar_bound_subgauss_general({1.0, 5.0}, kGauss, level, 100, 0.5), ConditionViolation);
}

TEST_CASE("T1 log-factor decides monotonicity in n") {
    const RiskLevel level(0.95);
    for (const double sigma : {0.3, 0.6, 1.0, 2.0}) {
        for (const double eps : {0.1, 1.0, 5.0}) {
            const SubGaussian tail{sigma, 0.0};
            const double factor = *cvar_bound_subgauss_general(tail, kGauss, level, 1, eps).diagnostic("t1_log_factor");
            double prev_t1 = -1.0;
            double prev_rest = kInf;
            for (std::uint64_t n = 10; n <= 100000; n *= 10) {
                const auto b = cvar_bound_subgauss_general(tail, kGauss, level, n, eps);
                const double t1 = b.term("chernoff");
                const double rest =
                    b.term("var_deviation_wide") + b.term("var_deviation_narrow") + b.term("dkw_at_var");
                if (prev_t1 >= 0.0) {
                    if (factor < 0) {
                        CHECK(t1 <= prev_t1);
                    } else {
                        CHECK(t1 >= prev_t1);
                    }
                }
                CHECK(rest <= prev_rest + 1e-15);
                prev_t1 = t1;
                prev_rest = rest;
            }
        }
    }
}

TEST_CASE("general sub-exponential CVaR bound") {
    const RiskLevel level(0.95);
    const SubExponential tail = default_tail_model(kExp).as_sub_exponential();
    const auto b = cvar_bound_subexp_general(tail, kExp, level, 100, 1.0);
    check_well_formed(b);
    CHECK(*b.diagnostic("m_b") == 0.25);
    CHECK(*b.diagnostic("t1_bracket") == doctest::Approx(1.6380229607734123).epsilon(1e-12));
    CHECK(b.term("chernoff") == doctest::Approx(1.4473196622040272e21).epsilon(1e-10));

    // m_b -> 0: T1 -> (alpha + 1)^n, reported as is.
    const SubExponential tiny{1.0, 1.0, 1e-12, 0.0};
    const auto t = cvar_bound_subexp_general(tiny, kExp, level, 50, 1.0);
    CHECK(t.term("chernoff") == doctest::Approx(std::pow(1.95, 50)).epsilon(1e-9));

    const auto far = cvar_bound_subexp_general(tail, kExp, level, 100, 1e4);
    CHECK(far.term("var_deviation_wide") == doctest::Approx(2 * std::exp(-200 * 0.05 * 0.05)).epsilon(1e-9));
    CHECK(far.term("var_deviation_narrow") == doctest::Approx(far.term("var_deviation_wide")).epsilon(1e-9));
    CHECK(far.term("dkw_at_var") < 1e-12);

    // Large n: T1 overflows to +inf rather than wrapping or clamping.
    const auto huge = cvar_bound_subexp_general(tail, kExp, level, 1'000'000, 1.0);
    CHECK(std::isinf(huge.total));
    CHECK(huge.clamped() == 1.0);
}

TEST_CASE("simplified sub-Gaussian CVaR bound") {
    const RiskLevel level(0.95);
    const double v = true_var(kUnif, level);
    const double threshold = check_subgauss_condition({0.5, 0.5}, v, level).threshold;
    const SubGaussian tail{threshold / 2, 0.5};
    const auto b = cvar_bound_subgauss(tail, kUnif, level, 100, 0.5);
    check_well_formed(b);
    REQUIRE(b.terms.size() == 4);
    const double rate = 0.5 * 0.05 * (v - 0.5) / (2 * tail.sigma * tail.sigma);
    CHECK(b.term("chernoff") == doctest::Approx(std::exp(-100 * rate)).epsilon(1e-12));
    CHECK(b.term("chernoff") > 0.0);
    CHECK(b.term("chernoff") <= 1.0);
    CHECK(b.term("dkw_at_var") == doctest::Approx(std::exp(-2 * 100 * 0.5 * 0.0025)).epsilon(1e-12));
    // Both density neighbourhoods reach past the support edge at 1, where the
    // density is 0, so c1 = c2 = 0 and those terms sit at 2.
    CHECK(*b.diagnostic("c1") == 0.0);
    CHECK(b.term("var_deviation_wide") == 2.0);

    // Inside the support the density constants are 1 and the terms are exact.
    const RiskLevel mid(0.5);
    const double vm = true_var(kUnif, mid);
    const double thr_mid = check_subgauss_condition({0.5, 0.0}, vm, mid).threshold;
    const auto inner = cvar_bound_subgauss({thr_mid / 2, 0.0}, kUnif, mid, 20, 0.1);
    const double narrow = std::sqrt(0.1) / 4;
    CHECK(*inner.diagnostic("c2") == doctest::Approx(1.0 / 16).epsilon(1e-12));
    CHECK(inner.term("var_deviation_narrow") ==
          doctest::Approx(2 * std::exp(-2 * 20 * narrow * narrow)).epsilon(1e-12));

    try {
        cvar_bound_subgauss({1.0, 0.0}, kGauss, RiskLevel(0.99), 100, 0.5);
        FAIL("expected ConditionViolation");
    } catch (const ConditionViolation& e) {
        CHECK(e.threshold() == doctest::Approx(0.7665435225820252).epsilon(1e-10));
    }
}

TEST_CASE("simplified sub-Gaussian bound decreases once n is large") {
    const RiskLevel level(0.5);
    const double v = true_var(kGauss, level);
    const SubGaussian tail{0.05, -1.0};
    REQUIRE(check_subgauss_condition(tail, v, level).satisfied);
    double prev = kInf;
    for (std::uint64_t n = 1000; n <= 64000; n *= 2) {
        const auto b = cvar_bound_subgauss(tail, kGauss, level, n, 2.0);
        CHECK(b.total - b.term("var_deviation_wide") <= prev);
        prev = b.total - b.term("var_deviation_wide");
    }
}

TEST_CASE("simplified sub-exponential CVaR bound") {
    const RiskLevel level(0.95);
    const double v = true_var(kUnif, level);
    // sigma small enough that m_b = b' and the radicand is positive.
    const SubExponential tail{0.05, 1.0, 0.9, -10.0};
    const auto cond = check_subexp_condition(tail, v, level);
    REQUIRE(cond.satisfied);
    const auto b = cvar_bound_subexp(tail, kUnif, level, 200, 0.5);
    check_well_formed(b);
    REQUIRE(b.terms.size() == 4);
    CHECK(b.term("chernoff") == doctest::Approx(std::exp(-200 * 0.5 * 0.05 * cond.m_b / 2)).epsilon(1e-12));
    const auto doubled = cvar_bound_subexp(tail, kUnif, level, 400, 0.5);
    CHECK(doubled.total <= b.total);

    CHECK_THROWS_AS(cvar_bound_subexp(default_tail_model(kExp).as_sub_exponential(), kExp, level, 100, 0.5),
                    ConditionViolation);
}

TEST_CASE("cvar_bound_general dispatches on tail kind") {
    const RiskLevel level(0.9);
    CHECK(cvar_bound_general(default_tail_model(kGauss), kGauss, level, 100, 1.0).bound_name ==
          "cvar-subgauss-general");
    CHECK(cvar_bound_general(default_tail_model(kExp), kExp, level, 100, 1.0).bound_name == "cvar-subexp-general");
}

TEST_CASE("sample_size_for_var") {
    const RiskLevel level(0.95);
    const auto r = sample_size_for_var(0.1, 0.05, kGauss, level);
    REQUIRE(r.achievable);
    // ceil(ln(40) / (2 delta_eps^2)) with the exact delta_eps.
    const double closed = std::ceil(std::log(40.0) / (2 * kDeltaEpsGauss95 * kDeltaEpsGauss95));
    CHECK(closed == 20460.0);
    CHECK(static_cast<double>(r.n) == closed);
    CHECK(r.bound_at_n <= 0.05);
    CHECK(r.bound_at_n_minus_1 > 0.05);
    CHECK(var_deviation_bound(kGauss, level, r.n, 0.1).total <= 0.05);
    CHECK(var_deviation_bound(kGauss, level, r.n - 1, 0.1).total > 0.05);

    // delta near 1 still needs 2 exp(-2 n d^2) <= delta, i.e. ln(2/delta) / (2 d^2).
    const auto near_one = sample_size_for_var(0.1, 0.999999, kGauss, level);
    CHECK(near_one.n == 3845);

    // Halving eps roughly quadruples n.
    const auto half = sample_size_for_var(0.05, 0.05, kGauss, level);
    const double ratio = static_cast<double>(half.n) / static_cast<double>(r.n);
    CHECK(ratio > 2.0);
    CHECK(ratio < 8.0);
    CHECK(half.n == 75325);

    CHECK_THROWS_AS(sample_size_for_var(0.1, 0.0, kGauss, level), InvalidArgument);
    CHECK_THROWS_AS(sample_size_for_var(0.1, 1.0, kGauss, level), InvalidArgument);
    CHECK_THROWS_AS(sample_size_for_var(0.0, 0.5, kGauss, level), InvalidArgument);
}

TEST_CASE("sample_size_for_cvar") {
    const RiskLevel level(0.95);
    // Diverging Chernoff term: Gaussian with its own sigma and small eps.
    const auto div = sample_size_for_cvar(0.5, 0.05, default_tail_model(kGauss), kGauss, level);
    CHECK_FALSE(div.achievable);
    CHECK_FALSE(div.reason.empty());

    // A tail with a contracting bracket: T4 alone needs n >= ln(1/0.05)/(2 * 2 * 0.0025) = 300.
    const TailModel tight = TailModel::sub_gaussian(0.5, 0.0);
    const auto r = sample_size_for_cvar(2.0, 0.05, tight, kGauss, level);
    REQUIRE(r.achievable);
    CHECK(r.n >= 300);
    CHECK(cvar_bound_general(tight, kGauss, level, r.n, 2.0).total <= 0.05);
    CHECK(cvar_bound_general(tight, kGauss, level, r.n - 1, 2.0).total > 0.05);
    CHECK(r.bound_at_n_minus_1 > 0.05);

    const auto near_one = sample_size_for_cvar(2.0, 0.999999, tight, kGauss, level);
    REQUIRE(near_one.achievable);
    CHECK(cvar_bound_general(tight, kGauss, level, near_one.n, 2.0).total <= 0.999999);
}
