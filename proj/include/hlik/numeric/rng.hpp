#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hlik::num {

// Counter-based substream addressing: a (seed, stream_id) pair names one
// deterministic stream, and work item k inside that stream gets its own
// engine via engine_at(k). The draw sequence depends only on these three
// integers, never on thread count or evaluation order.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    RngStream substream(std::uint64_t id) const { return RngStream{seed, id}; }
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t s = a;
    std::uint64_t h = splitmix64(s);
    s ^= b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h = splitmix64(s);
    s ^= c + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return splitmix64(s);
}
}  // namespace detail

// Uniform/exponential/normal variates with fully pinned-down algorithms on
// top of the (portable) mt19937_64 bit stream. std::*_distribution is
// deliberately avoided: its output is implementation-defined.
class VariateEngine {
  public:
    explicit VariateEngine(std::uint64_t key) : gen_(key) {}

    // strictly inside (0, 1)
    double uniform01() {
        const std::uint64_t bits = gen_() >> 11;  // top 53 bits
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    double exponential(double mean = 1.0) { return -mean * std::log(uniform01()); }

    // Box-Muller; two uniforms per variate, no caching.
    double normal(double mu = 0.0, double sd = 1.0) {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mu + sd * r * std::cos(6.283185307179586476925286766559 * u2);
    }

  private:
    std::mt19937_64 gen_;
};

inline VariateEngine engine_for(const RngStream& s, std::uint64_t counter = 0) {
    return VariateEngine(detail::mix3(s.seed, s.stream_id, counter));
}

}  // namespace hlik::num
