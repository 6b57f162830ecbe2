#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "hlik/errors.hpp"

namespace hlik::num {

constexpr double inf = std::numeric_limits<double>::infinity();

// Open interval with extended-real endpoints.
struct Interval {
    double lower = -inf;
    double upper = inf;

    Interval() = default;
    Interval(double lo, double hi) : lower(lo), upper(hi) {
        if (!(lower < upper)) throw InvalidConfig("Interval: lower must be < upper");
        if (std::isnan(lower) || std::isnan(upper)) throw InvalidConfig("Interval: NaN endpoint");
    }

    bool finite() const { return std::isfinite(lower) && std::isfinite(upper); }
    bool lower_finite() const { return std::isfinite(lower); }
    bool upper_finite() const { return std::isfinite(upper); }

    bool contains(double x) const { return x > lower && x < upper; }
    double width() const { return upper - lower; }

    static Interval real_line() { return Interval(-inf, inf); }
    static Interval positive_half_line() { return Interval(0.0, inf); }
};

// Axis-aligned box, dimension >= 1.
struct BoxDomain {
    std::vector<Interval> axes;

    BoxDomain() = default;
    explicit BoxDomain(std::vector<Interval> a) : axes(std::move(a)) {
        if (axes.empty()) throw InvalidConfig("BoxDomain: dimension must be >= 1");
    }
    explicit BoxDomain(Interval a) : axes{a} {}

    int dim() const { return static_cast<int>(axes.size()); }

    bool contains(const std::vector<double>& x) const {
        if (static_cast<int>(x.size()) != dim()) return false;
        for (int j = 0; j < dim(); ++j)
            if (!axes[j].contains(x[j])) return false;
        return true;
    }
};

}  // namespace hlik::num
