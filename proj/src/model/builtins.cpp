#include "hlik/model/builtins.hpp"

#include <cmath>
#include <map>

#include "hlik/model/transforms.hpp"
#include "hlik/numeric/special.hpp"

namespace hlik::model {

namespace {

// ---------------------------------------------------------------------
// exponential future-observation model on the natural u scale
// ---------------------------------------------------------------------
JointModel exponential_future_natural() {
    JointModel m;
    m.name = "exp-future-natural";
    m.theta_dim = 1;
    m.v_dim = 1;
    m.theta_scales = {ParamScale::natural};
    m.v_scale = VScale::natural;
    m.support_theta = num::BoxDomain(num::Interval::positive_half_line());
    m.support_v = [](const Vec&) {
        return num::BoxDomain(num::Interval::positive_half_line());
    };
    m.theta_audit_range = num::Interval(0.25, 4.0);

    m.log_cond = [](const Vec& th, const Vec&, const ObservedData& y) {
        const double lam = th[0];
        return -y.n() * std::log(lam) - y.total() / lam;
    };
    m.log_marg_v = [](const Vec& th, const Vec& v) {
        const double lam = th[0];
        return -std::log(lam) - v[0] / lam;
    };

    m.h_score = [](const Vec& th, const Vec& v, const ObservedData& y) {
        const double lam = th[0], u = v[0];
        Vec s(2);
        s[0] = -(y.n() + 1) / lam + (y.total() + u) / (lam * lam);
        s[1] = -1.0 / lam;
        return s;
    };
    m.h_hessian = [](const Vec& th, const Vec& v, const ObservedData& y) {
        const double lam = th[0], u = v[0];
        Mat H(2, 2);
        H(0, 0) = (y.n() + 1) / (lam * lam) - 2.0 * (y.total() + u) / (lam * lam * lam);
        H(0, 1) = H(1, 0) = 1.0 / (lam * lam);
        H(1, 1) = 0.0;
        return H;
    };
    m.marg_v_score = [](const Vec& th, const Vec&) {
        return Vec::Constant(1, -1.0 / th[0]);
    };
    m.marg_v_score_jac = [](const Vec&, const Vec&) { return Mat::Zero(1, 1); };
    m.marg_v_theta_grad = [](const Vec& th, const Vec& v) {
        const double lam = th[0];
        return Vec::Constant(1, -1.0 / lam + v[0] / (lam * lam));
    };

    m.sample_v = [](const Vec& th, num::VariateEngine& eng) {
        return Vec::Constant(1, eng.exponential(th[0]));
    };
    m.sample_y_given_v = [](const Vec& th, const Vec&, int n, num::VariateEngine& eng) {
        std::vector<double> y(n);
        for (double& yi : y) yi = eng.exponential(th[0]);
        return y;
    };
    m.init_theta = [](const ObservedData& y) { return Vec::Constant(1, y.mean()); };
    m.init_v = [](const Vec& th) { return Vec::Constant(1, th[0]); };

    m.oracle.expected_hessian = [](const Vec& th, const ObservedData& y) {
        const double lam = th[0];
        Mat I(2, 2);
        I(0, 0) = (y.n() + 1) / (lam * lam);
        I(0, 1) = I(1, 0) = -1.0 / (lam * lam);
        I(1, 1) = 0.0;
        return I;
    };
    m.oracle.marginal_loglik = [](const Vec& th, const ObservedData& y) {
        const double lam = th[0];
        return -y.n() * std::log(lam) - y.total() / lam;
    };
    return m;
}

PredictiveOracle exponential_predictive() {
    PredictiveOracle p;
    p.to_r = [](double v, const ObservedData& y) { return std::exp(v) / y.mean(); };
    p.from_r = [](double r, const ObservedData& y) { return std::log(r * y.mean()); };
    p.dv_dr = [](double r, const ObservedData&) { return 1.0 / r; };
    p.r_support = [](const ObservedData&) { return num::Interval::positive_half_line(); };

    // r = y_{n+1} / ybar_n is Pareto of order n+1 regardless of lambda.
    p.pivotal_log_density = [](double r, const ObservedData& y) {
        if (r < 0.0) return -num::inf;
        return -(y.n() + 1.0) * std::log1p(r / y.n());
    };
    p.pivotal_hdp_c = [](double alpha, const ObservedData& y) {
        const double n = y.n();
        return n * (std::pow(alpha, -1.0 / n) - 1.0);
    };
    p.posterior_log_density = [](double r, const ObservedData& y, bool log_prior) {
        const double n = y.n();
        if (r < 0.0) return -num::inf;
        if (log_prior) return -(n + 1.0) * std::log1p(r / n);
        if (y.n() < 2)
            throw ImproperPosterior("flat-lambda posterior is improper for n = 1");
        return std::log((n - 1.0) / n) - n * std::log1p(r / n);
    };
    p.posterior_hdp_c = [](double alpha, const ObservedData& y, bool log_prior) {
        const double n = y.n();
        if (log_prior) return n * (std::pow(alpha, -1.0 / n) - 1.0);
        if (y.n() < 2)
            throw ImproperPosterior("flat-lambda posterior is improper for n = 1");
        return n * (std::pow(alpha, -1.0 / (n - 1.0)) - 1.0);
    };
    return p;
}

// ---------------------------------------------------------------------
// Bayarri two-level exponential
// ---------------------------------------------------------------------
JointModel bayarri_natural() {
    JointModel m;
    m.name = "bayarri";
    m.theta_dim = 1;
    m.v_dim = 1;
    m.theta_scales = {ParamScale::natural};
    m.v_scale = VScale::natural;
    m.support_theta = num::BoxDomain(num::Interval::positive_half_line());
    m.support_v = [](const Vec&) {
        return num::BoxDomain(num::Interval::positive_half_line());
    };
    m.theta_audit_range = num::Interval(0.25, 4.0);

    m.log_cond = [](const Vec&, const Vec& v, const ObservedData& y) {
        const double u = v[0];
        return y.n() * std::log(u) - u * y.total();
    };
    m.log_marg_v = [](const Vec& th, const Vec& v) {
        return std::log(th[0]) - th[0] * v[0];
    };

    m.h_score = [](const Vec& th, const Vec& v, const ObservedData& y) {
        const double u = v[0];
        Vec s(2);
        s[0] = 1.0 / th[0] - u;
        s[1] = y.n() / u - y.total() - th[0];
        return s;
    };
    m.h_hessian = [](const Vec& th, const Vec& v, const ObservedData& y) {
        const double u = v[0];
        Mat H(2, 2);
        H(0, 0) = -1.0 / (th[0] * th[0]);
        H(0, 1) = H(1, 0) = -1.0;
        H(1, 1) = -y.n() / (u * u);
        return H;
    };
    m.marg_v_score = [](const Vec& th, const Vec&) { return Vec::Constant(1, -th[0]); };
    m.marg_v_score_jac = [](const Vec&, const Vec&) { return Mat::Zero(1, 1); };
    m.marg_v_theta_grad = [](const Vec& th, const Vec& v) {
        return Vec::Constant(1, 1.0 / th[0] - v[0]);
    };

    m.sample_v = [](const Vec& th, num::VariateEngine& eng) {
        return Vec::Constant(1, eng.exponential(1.0 / th[0]));
    };
    m.sample_y_given_v = [](const Vec&, const Vec& v, int n, num::VariateEngine& eng) {
        std::vector<double> y(n);
        for (double& yi : y) yi = eng.exponential(1.0 / v[0]);
        return y;
    };
    m.init_theta = [](const ObservedData& y) { return Vec::Constant(1, 1.0 / y.mean()); };
    m.init_v = [](const Vec& th) { return Vec::Constant(1, 1.0 / th[0]); };
    return m;
}

// ---------------------------------------------------------------------
// normal location model with a future observation, sigma known
// ---------------------------------------------------------------------
JointModel normal_future(double sigma) {
    if (!(sigma > 0.0)) throw InvalidConfig("normal_location_future: sigma must be > 0");
    const double s2 = sigma * sigma;
    const double log_norm = -0.5 * std::log(num::two_pi * s2);

    JointModel m;
    m.name = "normal-future";
    m.theta_dim = 1;
    m.v_dim = 1;
    m.theta_scales = {ParamScale::natural};
    m.v_scale = VScale::natural;
    m.support_theta = num::BoxDomain(num::Interval::real_line());
    m.support_v = [](const Vec&) { return num::BoxDomain(num::Interval::real_line()); };
    m.theta_audit_range = num::Interval(-2.0, 2.0);

    m.log_cond = [s2, log_norm](const Vec& th, const Vec&, const ObservedData& y) {
        const double dev = y.mean() - th[0];
        return y.n() * log_norm - (y.centered_ss() + y.n() * dev * dev) / (2.0 * s2);
    };
    m.log_marg_v = [s2, log_norm](const Vec& th, const Vec& v) {
        const double d = v[0] - th[0];
        return log_norm - d * d / (2.0 * s2);
    };

    m.h_score = [s2](const Vec& th, const Vec& v, const ObservedData& y) {
        Vec s(2);
        s[0] = (y.total() - y.n() * th[0] + v[0] - th[0]) / s2;
        s[1] = -(v[0] - th[0]) / s2;
        return s;
    };
    m.h_hessian = [s2](const Vec&, const Vec&, const ObservedData& y) {
        Mat H(2, 2);
        H(0, 0) = -(y.n() + 1) / s2;
        H(0, 1) = H(1, 0) = 1.0 / s2;
        H(1, 1) = -1.0 / s2;
        return H;
    };
    m.marg_v_score = [s2](const Vec& th, const Vec& v) {
        return Vec::Constant(1, -(v[0] - th[0]) / s2);
    };
    m.marg_v_score_jac = [s2](const Vec&, const Vec&) {
        return Mat::Constant(1, 1, -1.0 / s2);
    };
    m.marg_v_theta_grad = [s2](const Vec& th, const Vec& v) {
        return Vec::Constant(1, (v[0] - th[0]) / s2);
    };

    m.sample_v = [sigma](const Vec& th, num::VariateEngine& eng) {
        return Vec::Constant(1, eng.normal(th[0], sigma));
    };
    m.sample_y_given_v = [sigma](const Vec& th, const Vec&, int n, num::VariateEngine& eng) {
        std::vector<double> y(n);
        for (double& yi : y) yi = eng.normal(th[0], sigma);
        return y;
    };
    m.init_theta = [](const ObservedData& y) { return Vec::Constant(1, y.mean()); };
    m.init_v = [](const Vec& th) { return Vec::Constant(1, th[0]); };

    m.oracle.exact_mhle = [](const ObservedData& y) {
        return std::make_pair(Vec::Constant(1, y.mean()), Vec::Constant(1, y.mean()));
    };
    m.oracle.expected_hessian = [s2](const Vec&, const ObservedData& y) {
        Mat I(2, 2);
        I(0, 0) = (y.n() + 1) / s2;
        I(0, 1) = I(1, 0) = -1.0 / s2;
        I(1, 1) = 1.0 / s2;
        return I;
    };
    m.oracle.marginal_loglik = [s2, log_norm](const Vec& th, const ObservedData& y) {
        const double dev = y.mean() - th[0];
        return y.n() * log_norm - (y.centered_ss() + y.n() * dev * dev) / (2.0 * s2);
    };

    // Gaussian 3-in-1: pivotal, flat-prior posterior predictive, and the
    // h-distribution all agree; canonical scale is v itself.
    const double pred_var_factor = s2;
    PredictiveOracle p;
    p.to_r = [](double v, const ObservedData&) { return v; };
    p.from_r = [](double r, const ObservedData&) { return r; };
    p.dv_dr = [](double, const ObservedData&) { return 1.0; };
    p.r_support = [](const ObservedData&) { return num::Interval::real_line(); };
    p.pivotal_log_density = [pred_var_factor](double r, const ObservedData& y) {
        const double var = pred_var_factor * (1.0 + 1.0 / y.n());
        const double d = r - y.mean();
        return -0.5 * std::log(num::two_pi * var) - d * d / (2.0 * var);
    };
    const auto piv = p.pivotal_log_density;
    p.posterior_log_density = [piv](double r, const ObservedData& y, bool log_prior) {
        if (log_prior)
            throw Unsupported("normal-future: theta spans the real line; no log-scale prior");
        return piv(r, y);
    };
    m.predictive = p;
    return m;
}

// exact MHLE / profile closed forms for the log-scale exponential model
void attach_exp_log_oracles(JointModel& m, bool log_scale_param) {
    m.oracle.exact_mhle = [log_scale_param](const ObservedData& y) {
        const double lam = y.mean();
        const double th = log_scale_param ? std::log(lam) : lam;
        return std::make_pair(Vec::Constant(1, th), Vec::Constant(1, std::log(lam)));
    };
    m.oracle.marginal_loglik = [log_scale_param](const Vec& th, const ObservedData& y) {
        const double lam = log_scale_param ? std::exp(th[0]) : th[0];
        return -y.n() * std::log(lam) - y.total() / lam;
    };
    if (!log_scale_param) {
        m.oracle.expected_hessian = [](const Vec& th, const ObservedData& y) {
            const double lam = th[0];
            Mat I(2, 2);
            I(0, 0) = (y.n() + 1) / (lam * lam);
            I(0, 1) = I(1, 0) = -1.0 / lam;
            I(1, 1) = 1.0;
            return I;
        };
    } else {
        m.oracle.expected_hessian = [](const Vec&, const ObservedData& y) {
            Mat I(2, 2);
            I(0, 0) = y.n() + 1.0;
            I(0, 1) = I(1, 0) = -1.0;
            I(1, 1) = 1.0;
            return I;
        };
    }
    m.oracle.profile_theta = [log_scale_param](const ObservedData& y, const Vec& v) {
        const double lam = (y.total() + std::exp(v[0])) / (y.n() + 1.0);
        return Vec::Constant(1, log_scale_param ? std::log(lam) : lam);
    };
    m.oracle.profile_curvature = [log_scale_param](const ObservedData& y, const Vec& v) {
        if (log_scale_param) return y.n() + 1.0;
        const double lam = (y.total() + std::exp(v[0])) / (y.n() + 1.0);
        return (y.n() + 1.0) / (lam * lam);
    };
}

}  // namespace

JointModel exponential_future(UScale scale, ThetaScale param_scale) {
    JointModel m = exponential_future_natural();
    if (scale == UScale::log_u) {
        m = with_unobservable_transform(m, log_transform());
        m.name = "exp-future-log";
    }
    if (param_scale == ThetaScale::log_lambda) m = with_log_parameter(m);

    if (scale == UScale::log_u) {
        attach_exp_log_oracles(m, param_scale == ThetaScale::log_lambda);
        m.predictive = exponential_predictive();
    } else {
        // natural-u closed forms survive the parameter relabeling only on
        // the lambda scale; keep them there.
        if (param_scale == ThetaScale::lambda) {
            JointModel base = exponential_future_natural();
            m.oracle = base.oracle;
        }
    }
    return m;
}

JointModel bayarri_marginal(UScale scale) {
    JointModel m = bayarri_natural();
    if (scale == UScale::log_u) {
        m = with_unobservable_transform(m, log_transform());
        m.name = "bayarri-log";
    }
    return m;
}

JointModel normal_location_future(double sigma) { return normal_future(sigma); }

std::vector<std::string> registered_models() {
    return {"exp-future-log", "exp-future-natural", "bayarri", "bayarri-log", "normal-future"};
}

JointModel make_model(const std::string& name) {
    if (name == "exp-future-log") return exponential_future(UScale::log_u);
    if (name == "exp-future-natural") return exponential_future(UScale::natural_u);
    if (name == "bayarri") return bayarri_marginal(UScale::natural_u);
    if (name == "bayarri-log") return bayarri_marginal(UScale::log_u);
    if (name == "normal-future") return normal_location_future(1.0);
    throw InvalidConfig("unknown model '" + name + "'; known: exp-future-log, "
                        "exp-future-natural, bayarri, bayarri-log, normal-future");
}

}  // namespace hlik::model
