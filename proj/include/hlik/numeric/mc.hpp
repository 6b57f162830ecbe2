#pragma once

#include <cmath>
#include <cstddef>

#include "hlik/errors.hpp"
#include "hlik/numeric/parallel.hpp"
#include "hlik/numeric/rng.hpp"

namespace hlik::num {

struct McResult {
    double mean = 0.0;
    double se = 0.0;  // sample sd / sqrt(n)
    std::size_t n = 0;
};

// Monte Carlo expectation of g(sample). Draw i uses the engine at counter i
// of `stream`, and the reduction over the buffered values is serial, so the
// result is bitwise identical for any `jobs`.
//
// sampler: callable(VariateEngine&) -> Sample; g: callable(const Sample&) -> double.
template <typename G, typename Sampler>
McResult mc_expect(G&& g, Sampler&& sampler, std::size_t n, RngStream stream, int jobs = 0) {
    if (n < 2) throw InvalidConfig("mc_expect: n must be >= 2");
    const auto values = fill_indexed<double>(
        n,
        [&](std::size_t i) {
            VariateEngine eng = engine_for(stream, i);
            return g(sampler(eng));
        },
        jobs);

    double sum = 0.0;
    for (const double v : values) {
        if (!std::isfinite(v)) throw NonFinite("mc_expect: non-finite draw of g");
        sum += v;
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    return {mean, sd / std::sqrt(static_cast<double>(n)), n};
}

template <typename G, typename Sampler>
McResult mc_expect_serial(G&& g, Sampler&& sampler, std::size_t n, RngStream stream) {
    if (n < 2) throw InvalidConfig("mc_expect: n must be >= 2");
    const auto values = fill_indexed_serial<double>(n, [&](std::size_t i) {
        VariateEngine eng = engine_for(stream, i);
        return g(sampler(eng));
    });
    double sum = 0.0;
    for (const double v : values) {
        if (!std::isfinite(v)) throw NonFinite("mc_expect: non-finite draw of g");
        sum += v;
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    return {mean, sd / std::sqrt(static_cast<double>(n)), n};
}

}  // namespace hlik::num
