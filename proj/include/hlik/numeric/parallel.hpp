#pragma once

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hlik::num {

// jobs > 0 wins; otherwise HLIK_JOBS; otherwise all hardware threads.
inline int resolve_jobs(int jobs = 0) {
    if (jobs > 0) return jobs;
    if (const char* env = std::getenv("HLIK_JOBS")) {
        const int j = std::atoi(env);
        if (j > 0) return j;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// Evaluate fn(i) for i in [0, n) into a vector. Each slot is written by
// exactly one iteration, so the result is bitwise independent of the worker
// count; any reduction over it must happen serially afterwards. The first
// exception thrown by fn is rethrown after the loop drains.
template <typename T, typename Fn>
std::vector<T> fill_indexed(std::size_t n, Fn&& fn, int jobs = 0) {
    std::vector<T> out(n);
    const int nt = resolve_jobs(jobs);
#ifdef _OPENMP
    if (nt > 1) {
        std::exception_ptr eptr = nullptr;
#pragma omp parallel for schedule(static) num_threads(nt)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            try {
                out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical
                if (!eptr) eptr = std::current_exception();
            }
        }
        if (eptr) std::rethrow_exception(eptr);
        return out;
    }
#endif
    (void)nt;
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
}

// Serial reference for fill_indexed; kept for bit-for-bit comparison tests
// and for the kernel benchmark.
template <typename T, typename Fn>
std::vector<T> fill_indexed_serial(std::size_t n, Fn&& fn) {
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
}

}  // namespace hlik::num
