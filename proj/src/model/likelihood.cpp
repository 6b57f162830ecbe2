#include "hlik/model/likelihood.hpp"

#include <cmath>

#include "hlik/numeric/fdiff.hpp"
#include "hlik/numeric/special.hpp"

namespace hlik::model {

namespace {

Vec concat(const Vec& a, const Vec& b) {
    Vec out(a.size() + b.size());
    out << a, b;
    return out;
}

// map the unit pilot grid through the quadrature tail maps so infinite
// supports get scanned where their mass can be
double pullback_node(const num::Interval& ax, double t) {
    if (ax.finite()) return ax.lower + t * ax.width();
    if (ax.lower_finite()) return ax.lower + t / (1.0 - t);
    if (ax.upper_finite()) return ax.upper - t / (1.0 - t);
    return std::log(t / (1.0 - t));
}

}  // namespace

double h_loglik(const JointModel& m, const ObservedData& y, const Vec& theta, const Vec& v) {
    if (!m.in_theta_support(theta)) throw OutOfSupport("h_loglik: theta outside its support");
    if (!m.in_v_support(theta, v)) throw OutOfSupport("h_loglik: v outside its support");
    return m.log_cond(theta, v, y) + m.log_marg_v(theta, v);
}

Vec h_score(const JointModel& m, const ObservedData& y, const Vec& theta, const Vec& v) {
    if (m.h_score) return m.h_score(theta, v, y);
    const int p = m.theta_dim;
    const auto f = [&](const Vec& phi) {
        return m.log_cond(phi.head(p), phi.tail(m.v_dim), y) +
               m.log_marg_v(phi.head(p), phi.tail(m.v_dim));
    };
    return num::gradient(f, concat(theta, v));
}

Mat h_hessian(const JointModel& m, const ObservedData& y, const Vec& theta, const Vec& v) {
    if (m.h_hessian) return m.h_hessian(theta, v, y);
    const int p = m.theta_dim;
    const auto f = [&](const Vec& phi) {
        return m.log_cond(phi.head(p), phi.tail(m.v_dim), y) +
               m.log_marg_v(phi.head(p), phi.tail(m.v_dim));
    };
    return num::hessian(f, concat(theta, v));
}

Vec find_v_mode(const JointModel& m, const ObservedData& y, const Vec& theta) {
    const int d = m.v_dim;
    const num::BoxDomain support = m.support_v(theta);

    Vec v = m.init_v ? m.init_v(theta) : Vec::Zero(d);
    if (!m.in_v_support(theta, v)) {
        // fall back to the center of each (mapped) axis
        for (int j = 0; j < d; ++j) v[j] = pullback_node(support.axes[j], 0.5);
    }

    double h = h_loglik(m, y, theta, v);
    const double score_tol = 1e-10;

    for (int iter = 0; iter < 200; ++iter) {
        Vec g = h_score(m, y, theta, v).tail(d);
        if (g.lpNorm<Eigen::Infinity>() < score_tol) return v;

        const Mat Hvv = h_hessian(m, y, theta, v).bottomRightCorner(d, d);
        Vec step;
        bool newton_ok = false;
        Eigen::LDLT<Mat> ldlt(-Hvv);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
            step = ldlt.solve(g);
            newton_ok = step.dot(g) > 0.0;
        }
        if (!newton_ok) {
            // steepest ascent, scaled to an O(1) move
            step = g / std::max(1.0, g.lpNorm<Eigen::Infinity>());
        }

        double t = 1.0;
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
            const Vec cand = v + t * step;
            if (m.in_v_support(theta, cand)) {
                const double hc = h_loglik(m, y, theta, cand);
                if (std::isfinite(hc) && hc > h) {
                    v = cand;
                    h = hc;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if (!moved) {
            // h is flat to machine precision; pure Newton polish still
            // contracts a genuinely interior score quadratically
            for (int k = 0; k < 4 && newton_ok; ++k) {
                const Vec cand = v + step;
                if (!m.in_v_support(theta, cand)) break;
                const Vec g2 = h_score(m, y, theta, cand).tail(d);
                if (!(g2.lpNorm<Eigen::Infinity>() < g.lpNorm<Eigen::Infinity>())) break;
                v = cand;
                g = g2;
                if (g.lpNorm<Eigen::Infinity>() < score_tol) break;
                Eigen::LDLT<Mat> ldlt2(-h_hessian(m, y, theta, v).bottomRightCorner(d, d));
                newton_ok = ldlt2.info() == Eigen::Success && ldlt2.isPositive();
                if (newton_ok) step = ldlt2.solve(g);
            }
            if (g.lpNorm<Eigen::Infinity>() < 1e-8) {
                Eigen::LLT<Mat> llt(-h_hessian(m, y, theta, v).bottomRightCorner(d, d));
                if (llt.info() == Eigen::Success) return v;
            }
            throw NoInteriorMode("find_v_mode: iteration stalled with nonzero v-score "
                                 "(no interior stationary point)");
        }
        if (v.lpNorm<Eigen::Infinity>() > 1e10)
            throw NoInteriorMode("find_v_mode: iterate escaped; h has no interior maximum");
    }
    throw NoInteriorMode("find_v_mode: no stationary point within the iteration budget");
}

double marginal_loglik(const JointModel& m, const ObservedData& y, const Vec& theta,
                       const num::QuadratureSpec& spec) {
    if (!m.in_theta_support(theta)) throw OutOfSupport("marginal_loglik: theta outside support");
    const int d = m.v_dim;
    const num::BoxDomain support = m.support_v(theta);

    // pilot shift M: scan max, improved by the interior mode when it exists
    double M = -num::inf;
    const int K = d == 1 ? 129 : (d == 2 ? 17 : 9);
    std::vector<int> idx(d, 0);
    Vec v(d);
    const auto scan = [&](auto&& self, int axis) -> void {
        if (axis == d) {
            if (m.in_v_support(theta, v)) {
                const double h = m.log_cond(theta, v, y) + m.log_marg_v(theta, v);
                if (std::isfinite(h) && h > M) M = h;
            }
            return;
        }
        for (int k = 0; k < K; ++k) {
            v[axis] = pullback_node(support.axes[axis], (k + 0.5) / K);
            self(self, axis + 1);
        }
    };
    scan(scan, 0);
    try {
        const Vec mode = find_v_mode(m, y, theta);
        M = std::max(M, h_loglik(m, y, theta, mode));
    } catch (const NoInteriorMode&) {
        // boundary-dominated integrand; the scan maximum is enough
    }
    if (!std::isfinite(M)) throw NonFinite("marginal_loglik: h is -inf over the pilot scan");

    const auto integrand = [&](const std::vector<double>& x) {
        Vec vv = Eigen::Map<const Vec>(x.data(), d);
        const double h = m.log_cond(theta, vv, y) + m.log_marg_v(theta, vv);
        return std::exp(h - M);
    };
    const num::QuadratureResult r = num::integrate(integrand, support, spec);
    if (!(r.value > 0.0)) throw NonConvergent("marginal_loglik: integral not positive");
    return M + std::log(r.value);
}

double laplace_marginal(const JointModel& m, const ObservedData& y, const Vec& theta) {
    if (!m.in_theta_support(theta)) throw OutOfSupport("laplace_marginal: theta outside support");
    const int d = m.v_dim;
    const Vec mode = find_v_mode(m, y, theta);
    const Mat neg_hvv = -h_hessian(m, y, theta, mode).bottomRightCorner(d, d);
    Eigen::LLT<Mat> llt(neg_hvv);
    if (llt.info() != Eigen::Success)
        throw HessianNotNegDef("laplace_marginal: -d2h/dv2 not positive definite at the mode");
    double half_log_det = 0.0;
    for (int j = 0; j < d; ++j) half_log_det += std::log(llt.matrixL()(j, j));
    return h_loglik(m, y, theta, mode) - half_log_det + 0.5 * d * std::log(num::two_pi);
}

}  // namespace hlik::model
