#include "hlik/model/transforms.hpp"

#include <cmath>

namespace hlik::model {

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

MonotoneTransform identity_transform() {
    MonotoneTransform t;
    t.name = "identity";
    t.label = VScale::natural;
    t.fwd = [](double u) { return u; };
    t.inv = [](double v) { return v; };
    t.inv_d1 = [](double) { return 1.0; };
    t.inv_d2 = [](double) { return 0.0; };
    t.log_jac = [](double) { return 0.0; };
    t.log_jac_d1 = [](double) { return 0.0; };
    t.log_jac_d2 = [](double) { return 0.0; };
    t.applicable = [](const num::Interval&) { return true; };
    t.map_support = [](const num::Interval& s) { return s; };
    return t;
}

MonotoneTransform log_transform() {
    MonotoneTransform t;
    t.name = "log";
    t.label = VScale::log;
    t.fwd = [](double u) { return std::log(u); };
    t.inv = [](double v) { return std::exp(v); };
    t.inv_d1 = [](double v) { return std::exp(v); };
    t.inv_d2 = [](double v) { return std::exp(v); };
    t.log_jac = [](double v) { return v; };
    t.log_jac_d1 = [](double) { return 1.0; };
    t.log_jac_d2 = [](double) { return 0.0; };
    t.applicable = [](const num::Interval& s) { return s.lower >= 0.0; };
    t.map_support = [](const num::Interval& s) {
        const double lo = s.lower > 0.0 ? std::log(s.lower) : -num::inf;
        const double hi = s.upper_finite() ? std::log(s.upper) : num::inf;
        return num::Interval(lo, hi);
    };
    return t;
}

MonotoneTransform logit_transform() {
    MonotoneTransform t;
    t.name = "logit";
    t.label = VScale::custom;
    // u = a + (b-a) sigmoid(v); a, b bound at wrap time via map_support, so
    // the functions below close over nothing: wrapping specializes them.
    t.applicable = [](const num::Interval& s) { return s.finite(); };
    t.map_support = [](const num::Interval&) { return num::Interval::real_line(); };
    // fwd/inv filled when the support is known; see specialize below.
    return t;
}

namespace {

MonotoneTransform specialize_logit(const num::Interval& s) {
    MonotoneTransform t = logit_transform();
    const double a = s.lower, w = s.width();
    t.fwd = [a, w](double u) { return std::log((u - a) / (a + w - u)); };
    t.inv = [a, w](double v) { return a + w * sigmoid(v); };
    t.inv_d1 = [w](double v) {
        const double sg = sigmoid(v);
        return w * sg * (1.0 - sg);
    };
    t.inv_d2 = [w](double v) {
        const double sg = sigmoid(v);
        return w * sg * (1.0 - sg) * (1.0 - 2.0 * sg);
    };
    t.log_jac = [w](double v) {
        return std::log(w) - v - 2.0 * std::log1p(std::exp(-v));
    };
    t.log_jac_d1 = [](double v) { return 1.0 - 2.0 * sigmoid(v); };
    t.log_jac_d2 = [](double v) {
        const double sg = sigmoid(v);
        return -2.0 * sg * (1.0 - sg);
    };
    return t;
}

}  // namespace

std::vector<MonotoneTransform> transform_catalog() {
    return {identity_transform(), log_transform(), logit_transform()};
}

JointModel with_unobservable_transform(const JointModel& base, const MonotoneTransform& t_in) {
    if (t_in.name == "identity") return base;

    const Vec ref_theta = Vec::Constant(
        base.theta_dim, 0.5 * (base.theta_audit_range.lower + base.theta_audit_range.upper));
    const num::BoxDomain base_support = base.support_v(ref_theta);
    for (const auto& ax : base_support.axes)
        if (!t_in.applicable(ax))
            throw InvalidConfig("transform '" + t_in.name + "' not applicable to this support");

    // logit needs the concrete endpoints
    MonotoneTransform t = t_in;
    if (t_in.name == "logit") {
        if (base.support_v_depends_on_theta)
            throw InvalidConfig("logit transform needs a theta-free support");
        for (const auto& ax : base_support.axes)
            if (ax.lower != base_support.axes[0].lower || ax.upper != base_support.axes[0].upper)
                throw InvalidConfig("logit transform needs identical axis supports");
        t = specialize_logit(base_support.axes[0]);
    }

    JointModel m = base;
    m.name = base.name + "+" + t.name;
    m.v_scale = t.label;
    m.oracle = ModelOracle{};
    m.predictive = PredictiveOracle{};

    const int d = base.v_dim;
    const auto to_u = [t, d](const Vec& v) {
        Vec u(d);
        for (int j = 0; j < d; ++j) u[j] = t.inv(v[j]);
        return u;
    };
    const auto jac_sum = [t, d](const Vec& v) {
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += t.log_jac(v[j]);
        return s;
    };

    m.log_cond = [base, to_u](const Vec& th, const Vec& v, const ObservedData& y) {
        return base.log_cond(th, to_u(v), y);
    };
    m.log_marg_v = [base, to_u, jac_sum](const Vec& th, const Vec& v) {
        return base.log_marg_v(th, to_u(v)) + jac_sum(v);
    };
    m.support_v = [base, t](const Vec& th) {
        std::vector<num::Interval> axes;
        for (const auto& ax : base.support_v(th).axes) axes.push_back(t.map_support(ax));
        return num::BoxDomain(std::move(axes));
    };

    if (base.sample_v) {
        m.sample_v = [base, t, d](const Vec& th, num::VariateEngine& eng) {
            Vec u = base.sample_v(th, eng);
            Vec v(d);
            for (int j = 0; j < d; ++j) v[j] = t.fwd(u[j]);
            return v;
        };
    }
    if (base.sample_y_given_v) {
        m.sample_y_given_v = [base, to_u](const Vec& th, const Vec& v, int n,
                                          num::VariateEngine& eng) {
            return base.sample_y_given_v(th, to_u(v), n, eng);
        };
    }
    if (base.init_v) {
        m.init_v = [base, t, d](const Vec& th) {
            Vec u = base.init_v(th);
            Vec v(d);
            for (int j = 0; j < d; ++j) v[j] = t.fwd(u[j]);
            return v;
        };
    }

    const int p = base.theta_dim;
    if (base.h_score) {
        m.h_score = [base, t, to_u, p, d](const Vec& th, const Vec& v, const ObservedData& y) {
            const Vec u = to_u(v);
            const Vec s = base.h_score(th, u, y);
            Vec out(p + d);
            out.head(p) = s.head(p);
            for (int j = 0; j < d; ++j)
                out[p + j] = s[p + j] * t.inv_d1(v[j]) + t.log_jac_d1(v[j]);
            return out;
        };
    }
    if (base.h_hessian && base.h_score) {
        m.h_hessian = [base, t, to_u, p, d](const Vec& th, const Vec& v, const ObservedData& y) {
            const Vec u = to_u(v);
            const Vec s = base.h_score(th, u, y);
            const Mat H = base.h_hessian(th, u, y);
            Mat out(p + d, p + d);
            out.topLeftCorner(p, p) = H.topLeftCorner(p, p);
            for (int j = 0; j < d; ++j) {
                const double d1 = t.inv_d1(v[j]);
                for (int i = 0; i < p; ++i) {
                    out(i, p + j) = H(i, p + j) * d1;
                    out(p + j, i) = out(i, p + j);
                }
                for (int k = 0; k < d; ++k) {
                    double val = H(p + j, p + k) * d1 * t.inv_d1(v[k]);
                    if (j == k) val += s[p + j] * t.inv_d2(v[j]) + t.log_jac_d2(v[j]);
                    out(p + j, p + k) = val;
                }
            }
            return out;
        };
    }
    if (base.marg_v_score) {
        m.marg_v_score = [base, t, to_u, d](const Vec& th, const Vec& v) {
            const Vec s = base.marg_v_score(th, to_u(v));
            Vec out(d);
            for (int j = 0; j < d; ++j) out[j] = s[j] * t.inv_d1(v[j]) + t.log_jac_d1(v[j]);
            return out;
        };
    }
    if (base.marg_v_score_jac && base.marg_v_score) {
        m.marg_v_score_jac = [base, t, to_u, d](const Vec& th, const Vec& v) {
            const Vec u = to_u(v);
            const Vec s = base.marg_v_score(th, u);
            const Mat J = base.marg_v_score_jac(th, u);
            Mat out(d, d);
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) {
                    double val = J(j, k) * t.inv_d1(v[j]) * t.inv_d1(v[k]);
                    if (j == k) val += s[j] * t.inv_d2(v[j]) + t.log_jac_d2(v[j]);
                    out(j, k) = val;
                }
            return out;
        };
    }
    if (base.marg_v_theta_grad) {
        m.marg_v_theta_grad = [base, to_u](const Vec& th, const Vec& v) {
            return base.marg_v_theta_grad(th, to_u(v));
        };
    }
    return m;
}

JointModel with_log_parameter(const JointModel& base) {
    for (const auto& ax : base.support_theta.axes)
        if (ax.lower < 0.0)
            throw InvalidConfig("log parameter scale requires a positive theta support");

    JointModel m = base;
    m.name = base.name + "@log-theta";
    m.theta_scales.assign(base.theta_dim, ParamScale::log);
    m.oracle = ModelOracle{};
    m.predictive = base.predictive;  // predictive oracles are v-side objects

    const int p = base.theta_dim;
    const int d = base.v_dim;
    const auto to_nat = [p](const Vec& eta) {
        Vec th(p);
        for (int i = 0; i < p; ++i) th[i] = std::exp(eta[i]);
        return th;
    };

    m.log_cond = [base, to_nat](const Vec& eta, const Vec& v, const ObservedData& y) {
        return base.log_cond(to_nat(eta), v, y);
    };
    m.log_marg_v = [base, to_nat](const Vec& eta, const Vec& v) {
        return base.log_marg_v(to_nat(eta), v);
    };
    {
        std::vector<num::Interval> axes;
        for (const auto& ax : base.support_theta.axes) {
            const double lo = ax.lower > 0.0 ? std::log(ax.lower) : -num::inf;
            const double hi = ax.upper_finite() ? std::log(ax.upper) : num::inf;
            axes.emplace_back(lo, hi);
        }
        m.support_theta = num::BoxDomain(std::move(axes));
    }
    m.support_v = [base, to_nat](const Vec& eta) { return base.support_v(to_nat(eta)); };
    m.theta_audit_range =
        num::Interval(std::log(base.theta_audit_range.lower), std::log(base.theta_audit_range.upper));

    if (base.sample_v)
        m.sample_v = [base, to_nat](const Vec& eta, num::VariateEngine& eng) {
            return base.sample_v(to_nat(eta), eng);
        };
    if (base.sample_y_given_v)
        m.sample_y_given_v = [base, to_nat](const Vec& eta, const Vec& v, int n,
                                            num::VariateEngine& eng) {
            return base.sample_y_given_v(to_nat(eta), v, n, eng);
        };
    if (base.init_theta)
        m.init_theta = [base, p](const ObservedData& y) {
            Vec th = base.init_theta(y);
            Vec eta(p);
            for (int i = 0; i < p; ++i) eta[i] = std::log(th[i]);
            return eta;
        };
    if (base.init_v)
        m.init_v = [base, to_nat](const Vec& eta) { return base.init_v(to_nat(eta)); };

    if (base.h_score) {
        m.h_score = [base, to_nat, p, d](const Vec& eta, const Vec& v, const ObservedData& y) {
            const Vec th = to_nat(eta);
            Vec s = base.h_score(th, v, y);
            for (int i = 0; i < p; ++i) s[i] *= th[i];
            return s;
        };
    }
    if (base.h_hessian && base.h_score) {
        m.h_hessian = [base, to_nat, p, d](const Vec& eta, const Vec& v, const ObservedData& y) {
            const Vec th = to_nat(eta);
            const Vec s = base.h_score(th, v, y);
            Mat H = base.h_hessian(th, v, y);
            // d/deta_i = theta_i d/dtheta_i
            for (int i = 0; i < p; ++i)
                for (int j = 0; j < p + d; ++j) H(i, j) *= th[i];
            for (int j = 0; j < p; ++j)
                for (int i = 0; i < p + d; ++i) H(i, j) *= th[j];
            for (int i = 0; i < p; ++i) H(i, i) += s[i] * th[i];
            return H;
        };
    }
    if (base.marg_v_score)
        m.marg_v_score = [base, to_nat](const Vec& eta, const Vec& v) {
            return base.marg_v_score(to_nat(eta), v);
        };
    if (base.marg_v_score_jac)
        m.marg_v_score_jac = [base, to_nat](const Vec& eta, const Vec& v) {
            return base.marg_v_score_jac(to_nat(eta), v);
        };
    if (base.marg_v_theta_grad)
        m.marg_v_theta_grad = [base, to_nat, p](const Vec& eta, const Vec& v) {
            const Vec th = to_nat(eta);
            Vec g = base.marg_v_theta_grad(th, v);
            for (int i = 0; i < p; ++i) g[i] *= th[i];
            return g;
        };
    return m;
}

}  // namespace hlik::model
