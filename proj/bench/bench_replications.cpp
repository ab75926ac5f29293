// Times the serial reference kernels against the OpenMP ones on the
// replication loops the harness runs, and checks they agree.
//
// usage: bench_replications [R] [n] [repeats]

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <omp.h>

#include "riskbounds/distributions.hpp"
#include "riskbounds/harness.hpp"

namespace rb = riskbounds;

namespace {

template <class F>
double best_of(int repeats, F&& f) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    const std::uint64_t R = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2000;
    const std::uint64_t n = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 10000;
    const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;

    const rb::RiskLevel level(0.95);
    const std::vector<rb::ExperimentPlan> plans = {
        {rb::DistributionSpec::gaussian(0.0, 1.0), level, rb::VarCoverage{0.3}, n, R, 7},
        {rb::DistributionSpec::exponential(1.0), level, rb::VarDeviation{0.1}, n, R, 7},
        {rb::DistributionSpec::uniform(0.0, 1.0), level,
         rb::CvarUpperDeviation{0.05, rb::CvarBoundChoice::subgauss_general, std::nullopt}, n, R, 7},
    };

    std::cout << "threads available: " << omp_get_max_threads() << ", R = " << R << ", n = " << n << '\n';
    std::cout << "kind,distribution,serial_s,parallel_s,speedup,hits_equal\n";
    int mismatches = 0;
    for (const auto& p : plans) {
        std::optional<rb::ExperimentRecord> serial_rec;
        std::optional<rb::ExperimentRecord> parallel_rec;
        const double ts =
            best_of(repeats, [&] { serial_rec.emplace(rb::run_experiment(p, {rb::Execution::serial, 0})); });
        const double tp =
            best_of(repeats, [&] { parallel_rec.emplace(rb::run_experiment(p, {rb::Execution::parallel, 0})); });
        const bool same = serial_rec->hits == parallel_rec->hits;
        mismatches += same ? 0 : 1;
        std::cout << rb::kind_name(p.kind) << ',' << p.dist.to_string() << ',' << ts << ',' << tp << ','
                  << ts / tp << ',' << (same ? "yes" : "no") << '\n';
    }
    return mismatches == 0 ? 0 : 1;
}
