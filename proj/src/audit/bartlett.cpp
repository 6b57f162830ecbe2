#include "hlik/audit/bartlett.hpp"

#include <algorithm>
#include <cmath>

#include "hlik/model/likelihood.hpp"
#include "hlik/numeric/fdiff.hpp"
#include "hlik/numeric/parallel.hpp"

namespace hlik::audit {

namespace {

using model::ObservedData;

void require_theta_free_support(const JointModel& m) {
    if (m.support_v_depends_on_theta)
        throw NotApplicable("Bartlett audit: support of f_theta(v) depends on theta");
}

// score of the v-marginal, analytic when declared
Vec marg_score(const JointModel& m, const Vec& theta, const Vec& v) {
    if (m.marg_v_score) return m.marg_v_score(theta, v);
    return num::gradient([&](const Vec& vv) { return m.log_marg_v(theta, vv); }, v);
}

Mat marg_score_jac(const JointModel& m, const Vec& theta, const Vec& v) {
    if (m.marg_v_score_jac) return m.marg_v_score_jac(theta, v);
    return num::hessian([&](const Vec& vv) { return m.log_marg_v(theta, vv); }, v);
}

double density(const JointModel& m, const Vec& theta, const Vec& v) {
    return std::exp(m.log_marg_v(theta, v));
}

// interior reference point on each axis, used to anchor boundary paths
Vec central_v(const JointModel& m, const Vec& theta) {
    const num::BoxDomain sup = m.support_v(theta);
    Vec c(m.v_dim);
    if (m.init_v) {
        c = m.init_v(theta);
        if (m.in_v_support(theta, c)) return c;
    }
    for (int j = 0; j < m.v_dim; ++j) {
        const auto& ax = sup.axes[j];
        if (ax.finite())
            c[j] = 0.5 * (ax.lower + ax.upper);
        else if (ax.lower_finite())
            c[j] = ax.lower + 1.0;
        else if (ax.upper_finite())
            c[j] = ax.upper - 1.0;
        else
            c[j] = 0.0;
    }
    return c;
}

}  // namespace

const char* to_string(BoundaryVerdict v) {
    switch (v) {
        case BoundaryVerdict::vanishes: return "vanishes";
        case BoundaryVerdict::non_vanishing: return "non-vanishing";
        case BoundaryVerdict::equal_endpoints: return "equal-endpoints";
    }
    return "?";
}

const char* to_string(IdentityVerdict v) {
    switch (v) {
        case IdentityVerdict::bartlized: return "Bartlized";
        case IdentityVerdict::first_only: return "FirstOnly";
        case IdentityVerdict::fails: return "Fails";
        case IdentityVerdict::not_applicable: return "NotApplicable";
    }
    return "?";
}

namespace {
// finite-difference scores cap the attainable quadrature accuracy; ask only
// for what the integrand can deliver (the error estimate is reported either
// way and feeds the verdict tolerance)
num::QuadratureSpec fd_aware(num::QuadratureSpec spec, bool analytic, double floor_rel) {
    if (!analytic) {
        spec.rel_tol = std::max(spec.rel_tol, floor_rel);
        spec.abs_tol = std::max(spec.abs_tol, floor_rel * 1e-2);
    }
    return spec;
}
}  // namespace

Vec check_condition1(const JointModel& m, const Vec& theta, const num::QuadratureSpec& spec_in,
                     double* err) {
    require_theta_free_support(m);
    const num::QuadratureSpec spec =
        fd_aware(spec_in, static_cast<bool>(m.marg_v_score), 1e-7);
    const int d = m.v_dim;
    const num::BoxDomain sup = m.support_v(theta);
    Vec out(d);
    double worst = 0.0;
    for (int j = 0; j < d; ++j) {
        const auto f = [&](const std::vector<double>& x) {
            const Vec v = Eigen::Map<const Vec>(x.data(), d);
            return marg_score(m, theta, v)[j] * density(m, theta, v);
        };
        const auto r = num::integrate(f, sup, spec);
        out[j] = r.value;
        worst = std::max(worst, r.error);
    }
    if (err) *err = worst;
    return out;
}

Mat check_condition2(const JointModel& m, const Vec& theta, const num::QuadratureSpec& spec_in,
                     double* err) {
    require_theta_free_support(m);
    const num::QuadratureSpec spec = fd_aware(
        spec_in, static_cast<bool>(m.marg_v_score) && static_cast<bool>(m.marg_v_score_jac),
        1e-6);
    const int d = m.v_dim;
    const num::BoxDomain sup = m.support_v(theta);
    Mat out(d, d);
    double worst = 0.0;
    for (int j = 0; j < d; ++j) {
        for (int k = j; k < d; ++k) {
            const auto f = [&](const std::vector<double>& x) {
                const Vec v = Eigen::Map<const Vec>(x.data(), d);
                const Vec s = marg_score(m, theta, v);
                const Mat js = marg_score_jac(m, theta, v);
                return (js(j, k) + s[j] * s[k]) * density(m, theta, v);
            };
            const auto r = num::integrate(f, sup, spec);
            out(j, k) = out(k, j) = r.value;
            worst = std::max(worst, r.error);
        }
    }
    if (err) *err = worst;
    return out;
}

std::vector<FaceReport> check_boundary(const JointModel& m, const Vec& theta, int order) {
    require_theta_free_support(m);
    if (order != 1 && order != 2)
        throw InvalidConfig("check_boundary: order must be 1 or 2");

    const int d = m.v_dim;
    const num::BoxDomain sup = m.support_v(theta);
    const Vec center = central_v(m, theta);

    // density scale for the vanishing tolerance
    double scale = std::abs(order == 1 ? density(m, theta, center)
                                       : marg_score(m, theta, center)[0] *
                                             density(m, theta, center));
    scale = std::max(scale, 1e-8);
    const double tol = 1e-6 * scale;

    std::vector<FaceReport> faces;
    for (int j = 0; j < d; ++j) {
        const auto value_at = [&](double vj) {
            Vec v = center;
            v[j] = vj;
            const double f = density(m, theta, v);
            if (order == 1) return f;
            return marg_score(m, theta, v)[j] * f;  // df/dv_j = S_j f
        };

        double limits[2] = {0.0, 0.0};
        for (int side = 0; side < 2; ++side) {
            const bool upper = side == 1;
            const double endpoint = upper ? sup.axes[j].upper : sup.axes[j].lower;
            double limit;
            if (std::isfinite(endpoint)) {
                // geometric approach + one Richardson step per pair
                const double span =
                    sup.axes[j].finite() ? 0.25 * sup.axes[j].width() : 1.0;
                const double sgn = upper ? -1.0 : 1.0;
                double q_prev = value_at(endpoint + sgn * span);
                limit = q_prev;
                double delta = span * 0.5;
                for (int k = 0; k < 40 && delta > 1e-13 * std::max(1.0, std::abs(endpoint));
                     ++k, delta *= 0.5) {
                    const double q = value_at(endpoint + sgn * delta);
                    limit = q + (q - q_prev);  // cancels the O(delta) term for ratio 1/2
                    q_prev = q;
                }
            } else {
                // walk out geometrically; the tail either dies or it does not
                const double sgn = upper ? 1.0 : -1.0;
                double w = std::max(1.0, std::abs(center[j]));
                limit = value_at(sgn * w);
                for (int k = 0; k < 48; ++k) {
                    w *= 2.0;
                    if (!std::isfinite(sgn * w)) break;
                    const double q = value_at(sgn * w);
                    limit = q;
                    if (std::abs(q) < 1e-300) break;
                }
            }
            limits[side] = limit;
            FaceReport fr;
            fr.axis = j;
            fr.upper = upper;
            fr.order = order;
            fr.limit = limit;
            fr.verdict = std::abs(limit) <= tol ? BoundaryVerdict::vanishes
                                                : BoundaryVerdict::non_vanishing;
            faces.push_back(fr);
        }
        // sufficient-not-necessary refinement: equal nonzero endpoint values
        // on a finite axis still telescope to zero
        if (sup.axes[j].finite() && std::abs(limits[0]) > tol &&
            std::abs(limits[1]) > tol && std::abs(limits[0] - limits[1]) <= tol) {
            faces[faces.size() - 2].verdict = BoundaryVerdict::equal_endpoints;
            faces[faces.size() - 1].verdict = BoundaryVerdict::equal_endpoints;
        }
    }
    return faces;
}

FullIdentityReport check_full_identities(const JointModel& m, const Vec& theta, int n_data,
                                         std::size_t n_mc, num::RngStream stream, int jobs) {
    require_theta_free_support(m);
    if (!m.sample_v || !m.sample_y_given_v)
        throw InvalidConfig("check_full_identities: model lacks samplers");
    if (n_mc < 2) throw InvalidConfig("check_full_identities: n_mc must be >= 2");

    const int p = m.theta_dim, d = m.v_dim, q = p + d;
    // per draw: score (q), H + s s^T (q*q), marginal blocks (q*q)
    const int stride = q + q * q + q * q;

    const auto rows = num::fill_indexed<Vec>(
        n_mc,
        [&](std::size_t i) {
            num::VariateEngine eng = num::engine_for(stream, i);
            const Vec v = m.sample_v(theta, eng);
            const ObservedData y(m.sample_y_given_v(theta, v, n_data, eng));

            const Vec s = model::h_score(m, y, theta, v);
            const Mat H = model::h_hessian(m, y, theta, v);
            const Mat M2 = H + s * s.transpose();

            // same two-term object for log f_theta(v) alone: its blocks are
            // the A / B / C decomposition
            Vec phi(q);
            phi << theta, v;
            const auto lm = [&](const Vec& ph) {
                return m.log_marg_v(ph.head(p), ph.tail(d));
            };
            Vec gm(q);
            if (m.marg_v_theta_grad && m.marg_v_score) {
                gm.head(p) = m.marg_v_theta_grad(theta, v);
                gm.tail(d) = m.marg_v_score(theta, v);
            } else {
                gm = num::gradient(lm, phi);
            }
            const Mat Hm = num::hessian(lm, phi);
            const Mat Mm = Hm + gm * gm.transpose();

            Vec row(stride);
            row.head(q) = s;
            row.segment(q, q * q) = Eigen::Map<const Vec>(M2.data(), q * q);
            row.segment(q + q * q, q * q) = Eigen::Map<const Vec>(Mm.data(), q * q);
            return row;
        },
        jobs);

    Vec mean = Vec::Zero(stride);
    for (const Vec& r : rows) mean += r;
    mean /= static_cast<double>(n_mc);
    Vec var = Vec::Zero(stride);
    for (const Vec& r : rows) var += (r - mean).cwiseAbs2();
    var /= static_cast<double>(n_mc - 1);
    const Vec se = (var / static_cast<double>(n_mc)).cwiseSqrt();

    FullIdentityReport rep;
    rep.n_mc = n_mc;
    rep.score_mean = mean.head(q);
    rep.score_se = se.head(q);
    rep.second_identity = Eigen::Map<const Mat>(mean.segment(q, q * q).data(), q, q);
    rep.second_identity_se = Eigen::Map<const Mat>(se.segment(q, q * q).data(), q, q);
    const Mat Mm = Eigen::Map<const Mat>(mean.segment(q + q * q, q * q).data(), q, q);
    const Mat Mm_se = Eigen::Map<const Mat>(se.segment(q + q * q, q * q).data(), q, q);
    rep.a_block = Mm.topLeftCorner(p, p);
    rep.a_se = Mm_se.topLeftCorner(p, p);
    rep.b_block = Mm.topRightCorner(p, d);
    rep.b_se = Mm_se.topRightCorner(p, d);
    rep.c_block = Mm.bottomRightCorner(d, d);
    rep.c_se = Mm_se.bottomRightCorner(d, d);
    return rep;
}

double identity_tolerance(double quad_err, double mc_se) {
    return std::max({1e-6, 5.0 * quad_err, 3.0 * mc_se});
}

std::vector<Vec> default_theta_grid(const JointModel& m, int k) {
    if (m.theta_dim != 1)
        throw InvalidConfig("default_theta_grid: only scalar-theta models have grids");
    if (k < 1) throw InvalidConfig("default_theta_grid: k must be >= 1");
    const num::Interval r = m.theta_audit_range;
    std::vector<Vec> grid;
    for (int i = 0; i < k; ++i) {
        const double t = k == 1 ? 0.5 : static_cast<double>(i) / (k - 1);
        double val;
        if (r.lower > 0.0) {
            val = std::exp(std::log(r.lower) + t * (std::log(r.upper) - std::log(r.lower)));
        } else {
            val = r.lower + t * r.width();
        }
        grid.push_back(Vec::Constant(1, val));
    }
    return grid;
}

BartlettReport audit_model(const JointModel& m, const std::vector<Vec>& grid, int n_data,
                           std::size_t n_mc, num::RngStream stream,
                           const num::QuadratureSpec& spec, int jobs) {
    BartlettReport report;
    report.model = m.name;
    std::uint64_t point_id = 0;
    for (const Vec& theta : grid) {
        ThetaPointReport pt;
        pt.theta = theta;
        if (m.support_v_depends_on_theta) {
            pt.verdict = IdentityVerdict::not_applicable;
            report.points.push_back(std::move(pt));
            ++point_id;
            continue;
        }
        pt.cond1 = check_condition1(m, theta, spec, &pt.cond1_err);
        pt.cond2 = check_condition2(m, theta, spec, &pt.cond2_err);
        pt.faces = check_boundary(m, theta, 1);
        const auto faces2 = check_boundary(m, theta, 2);
        pt.faces.insert(pt.faces.end(), faces2.begin(), faces2.end());
        if (n_mc >= 2)
            pt.full = check_full_identities(m, theta, n_data, n_mc,
                                            stream.substream(point_id), jobs);

        double mc_se = 0.0;
        if (pt.full) {
            mc_se = pt.full->score_se.maxCoeff();
            mc_se = std::max(mc_se, pt.full->second_identity_se.maxCoeff());
        }
        pt.tolerance = identity_tolerance(std::max(pt.cond1_err, pt.cond2_err), mc_se);
        const bool c1 = pt.cond1.lpNorm<Eigen::Infinity>() <= pt.tolerance;
        const bool c2 = pt.cond2.lpNorm<Eigen::Infinity>() <= pt.tolerance;
        pt.verdict = c1 && c2 ? IdentityVerdict::bartlized
                              : (c1 ? IdentityVerdict::first_only : IdentityVerdict::fails);
        report.points.push_back(std::move(pt));
        ++point_id;
    }
    return report;
}

std::vector<BartlizeCandidate> bartlize_search(const JointModel& m, const std::vector<Vec>& grid,
                                               const std::vector<model::MonotoneTransform>& catalog,
                                               const num::QuadratureSpec& spec) {
    require_theta_free_support(m);
    std::vector<BartlizeCandidate> out;
    for (const auto& t : catalog) {
        BartlizeCandidate cand;
        cand.transform = t.name;
        JointModel wrapped;
        try {
            wrapped = model::with_unobservable_transform(m, t);
        } catch (const InvalidConfig&) {
            continue;  // transform not applicable to this support
        }
        cand.report.model = wrapped.name;
        bool all_ok = true;
        double worst = 0.0;
        for (const Vec& theta : grid) {
            ThetaPointReport pt;
            pt.theta = theta;
            pt.cond1 = check_condition1(wrapped, theta, spec, &pt.cond1_err);
            pt.cond2 = check_condition2(wrapped, theta, spec, &pt.cond2_err);
            pt.tolerance = identity_tolerance(std::max(pt.cond1_err, pt.cond2_err), 0.0);
            const double r1 = pt.cond1.lpNorm<Eigen::Infinity>();
            const double r2 = pt.cond2.lpNorm<Eigen::Infinity>();
            worst = std::max({worst, r1, r2});
            const bool c1 = r1 <= pt.tolerance;
            const bool c2 = r2 <= pt.tolerance;
            pt.verdict = c1 && c2 ? IdentityVerdict::bartlized
                                  : (c1 ? IdentityVerdict::first_only : IdentityVerdict::fails);
            all_ok = all_ok && c1 && c2;
            cand.report.points.push_back(std::move(pt));
        }
        cand.passes = all_ok;
        cand.worst_residual = worst;
        out.push_back(std::move(cand));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.passes != b.passes) return a.passes;
        return a.worst_residual < b.worst_residual;
    });
    if (out.empty() || !out.front().passes)
        throw EmptyCatalogResult("bartlize_search: no catalog transform clears both conditions");
    return out;
}

}  // namespace hlik::audit
