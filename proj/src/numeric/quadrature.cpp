#include "hlik/numeric/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "hlik/errors.hpp"

namespace hlik::num {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

unsigned depth_for(int max_subdivisions) {
    unsigned d = 1;
    int n = 2;
    while (n < max_subdivisions && d < 24) {
        n *= 2;
        ++d;
    }
    return d;
}

struct Piece {
    // integrand already pulled back to a finite interval [a, b]
    std::function<double(double)> g;
    double a, b;
};

// Decompose one axis into finite pieces per the tail-map policy.
std::vector<Piece> pieces_for_axis(const std::function<double(double)>& f, const Interval& ax,
                                   TailMap map) {
    const auto guard = [f](double v) {
        const double y = f(v);
        if (std::isnan(y)) throw NonFinite("integrate: integrand returned NaN");
        if (std::isinf(y)) throw NonFinite("integrate: integrand returned inf");
        return y;
    };

    if (ax.finite()) return {Piece{guard, ax.lower, ax.upper}};

    if (map == TailMap::none)
        throw InvalidConfig("integrate: infinite axis with tail_map=none");

    const bool exp_maps = map == TailMap::exp_compactify;
    // half-line pullbacks onto t in (0,1):
    //   exp map        v = a - log(1-t), Jacobian 1/(1-t)
    //   algebraic map  v = a + t/(1-t),  Jacobian 1/(1-t)^2
    // The exp map needs integrands decaying at least like e^{-v}; the
    // algebraic one also absorbs slower exponential rates and power tails.
    const auto up_from = [guard, exp_maps](double a) {
        if (exp_maps)
            return std::function<double(double)>(
                [guard, a](double t) { return guard(a - std::log1p(-t)) / (1.0 - t); });
        return std::function<double(double)>([guard, a](double t) {
            const double om = 1.0 - t;
            return guard(a + t / om) / (om * om);
        });
    };
    const auto down_from = [guard, exp_maps](double b) {
        if (exp_maps)
            return std::function<double(double)>(
                [guard, b](double t) { return guard(b + std::log(t)) / t; });
        return std::function<double(double)>([guard, b](double t) {
            const double om = 1.0 - t;
            return guard(b - t / om) / (om * om);
        });
    };

    if (ax.lower_finite()) return {Piece{up_from(ax.lower), 0.0, 1.0}};
    if (ax.upper_finite()) return {Piece{down_from(ax.upper), 0.0, 1.0}};

    if (map == TailMap::exp_compactify) {
        return {Piece{down_from(0.0), 0.0, 1.0}, Piece{up_from(0.0), 0.0, 1.0}};
    }
    // whole line, logistic: v = log(t/(1-t))
    return {Piece{[guard](double t) {
                      return guard(std::log(t / (1.0 - t))) / (t * (1.0 - t));
                  },
                  0.0, 1.0}};
}

}  // namespace

void QuadratureSpec::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw InvalidConfig("QuadratureSpec: tolerances must be > 0");
    if (max_subdivisions < 1)
        throw InvalidConfig("QuadratureSpec: max_subdivisions must be >= 1");
}

QuadratureResult integrate(const std::function<double(double)>& f, const Interval& domain,
                           const QuadratureSpec& spec) {
    spec.validate();
    const unsigned depth = depth_for(spec.max_subdivisions);

    double total = 0.0, err = 0.0, l1 = 0.0;
    for (const Piece& p : pieces_for_axis(f, domain, spec.tail_map)) {
        double e = 0.0, pl1 = 0.0;
        // ask for one digit beyond rel_tol; the Kronrod error estimate is
        // conservative and the slack keeps honest convergence out of the
        // NonConvergent branch below
        const double v = GK::integrate(p.g, p.a, p.b, depth, spec.rel_tol * 0.1, &e, &pl1);
        if (!std::isfinite(v)) throw NonFinite("integrate: non-finite result");
        total += v;
        err += e;
        l1 += pl1;
    }
    const double scale = std::max(std::abs(total), l1);
    if (err > std::max(spec.abs_tol, spec.rel_tol * scale) * 10.0)
        throw NonConvergent("integrate: subdivision budget exhausted (error estimate " +
                            std::to_string(err) + ")");
    return {total, err};
}

QuadratureResult integrate(const std::function<double(const std::vector<double>&)>& f,
                           const BoxDomain& domain, const QuadratureSpec& spec) {
    spec.validate();
    const int d = domain.dim();
    if (d == 1) {
        return integrate([&f](double v) { return f({v}); }, domain.axes[0], spec);
    }
    // Integrate out the last axis, then recurse; inner tolerances tightened
    // one decade so the outer error estimate stays meaningful.
    QuadratureSpec inner = spec;
    inner.rel_tol = spec.rel_tol / 10.0;
    inner.abs_tol = spec.abs_tol / 10.0;

    BoxDomain outer_box(std::vector<Interval>(domain.axes.begin(), domain.axes.end() - 1));
    double worst_inner = 0.0;
    const auto outer_f = [&](const std::vector<double>& head) {
        std::vector<double> x(head);
        x.push_back(0.0);
        const auto inner_f = [&](double v) {
            x.back() = v;
            return f(x);
        };
        const QuadratureResult r = integrate(inner_f, domain.axes.back(), inner);
        worst_inner = std::max(worst_inner, r.error);
        return r.value;
    };
    QuadratureResult r = integrate(outer_f, outer_box, spec);
    r.error += worst_inner;
    return r;
}

}  // namespace hlik::num
