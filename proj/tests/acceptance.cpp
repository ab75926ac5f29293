// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "riskbounds/distributions.hpp"
#include "riskbounds/errors.hpp"
#include "riskbounds/estimators.hpp"
#include "riskbounds/harness.hpp"
#include "riskbounds/serialize.hpp"
#include "riskbounds/tailbounds.hpp"

namespace rb = riskbounds;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

constexpr std::uint64_t kSeed = 20240601;

// inf{x : F_n(x) >= p} by scanning the distinct sample values.
double quantile_by_scan(const std::vector<double>& xs, double p) {
    const double n = static_cast<double>(xs.size());
    double best = INFINITY;
    for (double x : xs) {
        std::size_t count = 0;
        for (double y : xs) count += y <= x ? 1 : 0;
        if (static_cast<double>(count) / n >= p && x < best) best = x;
    }
    return best;
}

Outcome quantile_oracle() {
    std::uint64_t checked = 0;
    std::uint64_t mismatches = 0;
    for (std::size_t len = 1; len <= 8; ++len) {
        std::size_t total = 1;
        for (std::size_t i = 0; i < len; ++i) total *= 4;
        std::vector<double> xs(len);
        for (std::size_t code = 0; code < total; ++code) {
            std::size_t c = code;
            for (std::size_t i = 0; i < len; ++i, c /= 4) xs[i] = static_cast<double>(c % 4);
            const rb::SortedSample sample(xs);
            for (int k = 1; k <= 99; ++k) {
                const double p = k / 100.0;
                ++checked;
                if (rb::empirical_quantile(sample, p) != quantile_by_scan(xs, p)) ++mismatches;
            }
        }
    }
    return {mismatches == 0, std::to_string(checked) + " cases, " + std::to_string(mismatches) + " mismatches"};
}

Outcome estimator_consistency() {
    const rb::RiskLevel level(0.95);
    struct Case {
        rb::DistributionSpec dist;
        double v;
        double c;
    };
    const Case cases[] = {{rb::DistributionSpec::gaussian(0.0, 1.0), 1.6449, 2.0627},
                          {rb::DistributionSpec::exponential(1.0), 2.9957, 3.9957}};
    bool ok = true;
    std::string detail;
    char buf[160];
    for (const auto& cs : cases) {
        const auto est = rb::estimate_risk(rb::sample(cs.dist, 1'000'000, 7), level);
        const double ev = std::fabs(est.var - cs.v);
        const double ec = std::fabs(est.cvar - cs.c);
        ok = ok && ev <= 0.02 && ec <= 0.02;
        std::snprintf(buf, sizeof buf, "%s%s |dv|=%.4g |dc|=%.4g", detail.empty() ? "" : "; ",
                      cs.dist.family_name().c_str(), ev, ec);
        detail += buf;
    }
    return {ok, detail};
}

Outcome interval_coverage() {
    const rb::RiskLevel level(0.9);
    const double floor = 1.0 - 2.0 * std::exp(-std::pow(1e4, 0.4) / 8.0);
    bool ok = true;
    std::string detail;
    char buf[160];
    for (const auto& dist : {rb::DistributionSpec::gaussian(0.0, 1.0), rb::DistributionSpec::exponential(1.0),
                             rb::DistributionSpec::uniform(0.0, 1.0)}) {
        const rb::ExperimentPlan plan{dist, level, rb::VarCoverage{0.3}, 10'000, 2000, kSeed};
        const auto rec = rb::run_experiment(plan);
        ok = ok && rec.frequency >= floor;
        std::snprintf(buf, sizeof buf, "%s%s coverage=%.4f", detail.empty() ? "" : "; ",
                      dist.family_name().c_str(), rec.frequency);
        detail += buf;
    }
    std::snprintf(buf, sizeof buf, " (floor %.4f)", floor);
    return {ok, detail + buf};
}

Outcome dominance(const std::vector<rb::ExperimentPlan>& plans) {
    int violations = 0;
    double worst_margin = INFINITY;
    for (const auto& plan : plans) {
        const auto rec = rb::run_experiment(plan);
        if (!rec.pass) ++violations;
        worst_margin = std::min(worst_margin, rec.bound_clamped + 3.0 * rec.binomial_stderr - rec.frequency);
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu grid points, %d violations, smallest margin %.4g", plans.size(), violations,
                  worst_margin);
    return {violations == 0, buf};
}

Outcome var_deviation_dominance() {
    std::vector<rb::ExperimentPlan> plans;
    for (const auto& dist : {rb::DistributionSpec::gaussian(0.0, 1.0), rb::DistributionSpec::exponential(1.0)})
        for (double alpha : {0.9, 0.95})
            for (std::uint64_t n : {1000, 10000})
                for (double eps : {0.05, 0.1, 0.2})
                    plans.push_back({dist, rb::RiskLevel(alpha), rb::VarDeviation{eps}, n, 2000, kSeed});
    return dominance(plans);
}

std::vector<rb::ExperimentPlan> cvar_grid(const std::vector<rb::DistributionSpec>& dists) {
    std::vector<rb::ExperimentPlan> plans;
    for (const auto& dist : dists) {
        const auto choice = rb::default_tail_model(dist).is_sub_gaussian() ? rb::CvarBoundChoice::subgauss_general
                                                                           : rb::CvarBoundChoice::subexp_general;
        for (double alpha : {0.9, 0.95})
            for (std::uint64_t n : {1000, 10000})
                for (double eps : {0.5, 1.0})
                    plans.push_back({dist, rb::RiskLevel(alpha), rb::CvarUpperDeviation{eps, choice, std::nullopt}, n,
                                     2000, kSeed});
    }
    return plans;
}

Outcome cvar_subgauss_dominance() {
    return dominance(cvar_grid({rb::DistributionSpec::gaussian(0.0, 1.0), rb::DistributionSpec::uniform(0.0, 1.0)}));
}

Outcome cvar_subexp_dominance() {
    return dominance(cvar_grid({rb::DistributionSpec::exponential(1.0)}));
}

Outcome condition_diagnostics() {
    const auto gauss = rb::DistributionSpec::gaussian(0.0, 1.0);
    const rb::RiskLevel a99(0.99);
    const auto sg = rb::check_subgauss_condition(rb::default_tail_model(gauss).as_sub_gaussian(),
                                                 rb::true_var(gauss, a99), a99);
    const auto expo = rb::DistributionSpec::exponential(1.0);
    const rb::RiskLevel a95(0.95);
    const auto se = rb::check_subexp_condition(rb::default_tail_model(expo).as_sub_exponential(),
                                               rb::true_var(expo, a95), a95);
    const bool ok = std::fabs(sg.threshold - 0.7666) <= 1e-3 && !sg.satisfied && se.radicand < 0.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "threshold=%.6f satisfied=%s radicand=%.6f", sg.threshold,
                  sg.satisfied ? "yes" : "no", se.radicand);
    return {ok, buf};
}

Outcome convergence_rate() {
    const rb::ExperimentPlan plan{rb::DistributionSpec::gaussian(0.0, 1.0), rb::RiskLevel(0.95),
                                  rb::Convergence{{1000, 4000, 16000}}, 0, 500, kSeed};
    const auto res = rb::run_convergence(plan);
    std::vector<std::uint64_t> ns;
    std::vector<double> errs;
    for (const auto& pt : res.points) {
        ns.push_back(pt.n);
        errs.push_back(pt.median_abs_var_error);
    }
    const double slope = rb::loglog_slope(ns, errs);
    char buf[80];
    std::snprintf(buf, sizeof buf, "slope=%.4f", slope);
    return {std::fabs(slope + 0.5) <= 0.15, buf};
}

Outcome sample_size_round_trip() {
    const auto r = rb::sample_size_for_var(0.1, 0.05, rb::DistributionSpec::gaussian(0.0, 1.0), rb::RiskLevel(0.95));
    const bool bracket = r.achievable && r.bound_at_n <= 0.05 && 0.05 < r.bound_at_n_minus_1;
    const std::int64_t diff = static_cast<std::int64_t>(r.n) - 20656;
    char buf[200];
    std::snprintf(buf, sizeof buf, "n=%llu bound(n)=%.6g bound(n-1)=%.6g bracket=%s, distance from 20656 = %lld",
                  static_cast<unsigned long long>(r.n), r.bound_at_n, r.bound_at_n_minus_1, bracket ? "ok" : "broken",
                  static_cast<long long>(diff));
    return {bracket && std::llabs(diff) <= 1, buf};
}

Outcome determinism() {
    const rb::ExperimentPlan plans[] = {
        {rb::DistributionSpec::gaussian(0.0, 1.0), rb::RiskLevel(0.9), rb::VarCoverage{0.3}, 2000, 400, kSeed},
        {rb::DistributionSpec::exponential(1.0), rb::RiskLevel(0.95), rb::VarDeviation{0.1}, 1000, 400, kSeed},
        {rb::DistributionSpec::uniform(0.0, 1.0), rb::RiskLevel(0.95),
         rb::CvarUpperDeviation{0.05, rb::CvarBoundChoice::subgauss_general, std::nullopt}, 1000, 400, kSeed},
    };
    bool ok = true;
    for (const auto& plan : plans) {
        const auto freq = [&](rb::RunOptions opts) {
            return rb::to_json(rb::run_experiment(plan, opts)).at("frequency").dump();
        };
        const std::string a = freq({rb::Execution::parallel, 0});
        const std::string b = freq({rb::Execution::parallel, 0});
        const std::string c = freq({rb::Execution::parallel, 3});
        const std::string d = freq({rb::Execution::serial, 1});
        ok = ok && a == b && a == c && a == d;
    }
    return {ok, ok ? "frequency fields identical across repeats and thread counts" : "frequency fields differ"};
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"quantile oracle equivalence", quantile_oracle},
        {"estimator consistency", estimator_consistency},
        {"VaR interval coverage", interval_coverage},
        {"VaR deviation dominance", var_deviation_dominance},
        {"CVaR sub-Gaussian general dominance", cvar_subgauss_dominance},
        {"CVaR sub-exponential general dominance", cvar_subexp_dominance},
        {"condition diagnostics", condition_diagnostics},
        {"convergence rate", convergence_rate},
        {"sample-size round trip", sample_size_round_trip},
        {"determinism", determinism},
    };
    int failed = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out{false, ""};
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += out.pass ? 0 : 1;
        std::printf("%s %2d %s: %s [%.2fs]\n", out.pass ? "PASS" : "FAIL", index, c.name, out.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", index - failed, index);
    return failed == 0 ? 0 : 1;
}
