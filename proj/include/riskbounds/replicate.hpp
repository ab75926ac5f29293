#pragma once

// Replication kernels. Replication r (1-based) is a pure function of r, so the
// OpenMP kernels may schedule replications in any order; outputs are stored
// by index or reduced with integer addition, which keeps results identical to
// the serial reference for every thread count.

#include <cstdint>
#include <vector>

#include <omp.h>

namespace riskbounds {

enum class Execution { serial, parallel };

struct RunOptions {
    Execution execution = Execution::parallel;
    int threads = 0;  // 0: OpenMP default
};

namespace kernels {

template <class Pred>
std::uint64_t count_serial(std::uint64_t replications, Pred&& pred) {
    std::uint64_t hits = 0;
    for (std::uint64_t r = 1; r <= replications; ++r) {
        hits += pred(r) ? 1 : 0;
    }
    return hits;
}

template <class Pred>
std::uint64_t count_parallel(std::uint64_t replications, Pred&& pred, int threads) {
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
    const auto total = static_cast<std::int64_t>(replications);
    std::uint64_t hits = 0;
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : hits) num_threads(nthreads)
    for (std::int64_t i = 0; i < total; ++i) {
        hits += pred(static_cast<std::uint64_t>(i) + 1) ? 1 : 0;
    }
    return hits;
}

template <class T, class Fn>
std::vector<T> map_serial(std::uint64_t replications, Fn&& fn) {
    std::vector<T> out(replications);
    for (std::uint64_t r = 1; r <= replications; ++r) {
        out[r - 1] = fn(r);
    }
    return out;
}

template <class T, class Fn>
std::vector<T> map_parallel(std::uint64_t replications, Fn&& fn, int threads) {
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
    const auto total = static_cast<std::int64_t>(replications);
    std::vector<T> out(replications);
#pragma omp parallel for schedule(dynamic, 4) num_threads(nthreads)
    for (std::int64_t i = 0; i < total; ++i) {
        out[static_cast<std::size_t>(i)] = fn(static_cast<std::uint64_t>(i) + 1);
    }
    return out;
}

} // namespace kernels

template <class Pred>
std::uint64_t count_replications(std::uint64_t replications, const RunOptions& opts, Pred&& pred) {
    if (opts.execution == Execution::serial) {
        return kernels::count_serial(replications, pred);
    }
    return kernels::count_parallel(replications, pred, opts.threads);
}

template <class T, class Fn>
std::vector<T> map_replications(std::uint64_t replications, const RunOptions& opts, Fn&& fn) {
    if (opts.execution == Execution::serial) {
        return kernels::map_serial<T>(replications, fn);
    }
    return kernels::map_parallel<T>(replications, fn, opts.threads);
}

} // namespace riskbounds
