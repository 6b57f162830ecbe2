#pragma once

#include <functional>
#include <vector>

#include "hlik/numeric/interval.hpp"

namespace hlik::num {

// Change of variables used for infinite axes. Finite-domain quadrature is
// the only primitive; infinite supports are pulled back onto (0,1):
//   logistic_compactify: v = logit(t) on the whole line and the algebraic
//                        map v = a + t/(1-t) on half-lines (the default;
//                        the algebraic map also absorbs power tails and
//                        exponential rates below 1),
//   exp_compactify:      exponential maps v = a - log(1-t) everywhere
//                        (whole line split at 0); adequate only for
//                        integrands decaying at least like e^{-|v|},
//   none:                infinite axes are rejected.
enum class TailMap { none, exp_compactify, logistic_compactify };

struct QuadratureSpec {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    int max_subdivisions = 2000;
    TailMap tail_map = TailMap::logistic_compactify;

    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // absolute error estimate
};

// Adaptive Gauss-Kronrod over one axis. Throws NonFinite if f produces
// NaN/inf at a node, NonConvergent if the subdivision budget is exhausted
// before |error| <= max(abs_tol, rel_tol * scale); divergent integrands end
// up there instead of being silently truncated.
QuadratureResult integrate(const std::function<double(double)>& f, const Interval& domain,
                           const QuadratureSpec& spec = {});

// Iterated (tensor) integration over a box, innermost axis last. Intended
// for d <= 3.
QuadratureResult integrate(const std::function<double(const std::vector<double>&)>& f,
                           const BoxDomain& domain, const QuadratureSpec& spec = {});

}  // namespace hlik::num
