#pragma once

#include <functional>
#include <string>
#include <utility>

#include "hlik/model/types.hpp"
#include "hlik/numeric/interval.hpp"
#include "hlik/numeric/rng.hpp"

namespace hlik::model {

// Closed forms a model may declare. Everything here is optional: the
// generic numeric paths never require them, and tests use them as oracles
// against those paths.
struct ModelOracle {
    // joint maximizer (theta_hat, v_hat)
    std::function<std::pair<Vec, Vec>(const ObservedData&)> exact_mhle;
    // E_theta[-d2 h / d phi2] in the model's working scales
    std::function<Mat(const Vec& theta, const ObservedData&)> expected_hessian;
    std::function<double(const Vec& theta, const ObservedData&)> marginal_loglik;
    // theta maximizing h at fixed v, and the profiled curvature -d2h/dtheta2
    std::function<Vec(const ObservedData&, const Vec& v)> profile_theta;
    std::function<double(const ObservedData&, const Vec& v)> profile_curvature;
};

// Predictive closed forms on the model's canonical comparison scale r
// (a data-dependent monotone function of the scalar v).
struct PredictiveOracle {
    std::function<double(double v, const ObservedData&)> to_r;
    std::function<double(double r, const ObservedData&)> from_r;
    std::function<double(double r, const ObservedData&)> dv_dr;
    std::function<num::Interval(const ObservedData&)> r_support;

    std::function<double(double r, const ObservedData&)> pivotal_log_density;
    // flat prior on the natural or the log parameter scale
    std::function<double(double r, const ObservedData&, bool log_scale_prior)>
        posterior_log_density;
    // upper endpoint (on r scale) of the highest-density region [0, c]
    std::function<double(double alpha, const ObservedData&, bool log_scale_prior)>
        posterior_hdp_c;
    std::function<double(double alpha, const ObservedData&)> pivotal_hdp_c;
};

// Evaluator bundle for f_theta(y, v) = f_theta(y|v) f_theta(v), plus the
// metadata and optional analytic pieces the rest of the toolkit consumes.
// Immutable after construction; all evaluators are pure.
struct JointModel {
    std::string name;
    int theta_dim = 1;
    int v_dim = 1;
    std::vector<ParamScale> theta_scales;
    VScale v_scale = VScale::natural;

    std::function<double(const Vec& theta, const Vec& v, const ObservedData& y)> log_cond;
    std::function<double(const Vec& theta, const Vec& v)> log_marg_v;

    num::BoxDomain support_theta;
    std::function<num::BoxDomain(const Vec& theta)> support_v;
    // Theta-dependent supports are tolerated but flagged; Bartlett audits on
    // such models report NotApplicable instead of a numeric verdict.
    bool support_v_depends_on_theta = false;
    // finite range the audit theta grid is drawn from
    num::Interval theta_audit_range{0.25, 4.0};

    // optional analytic derivatives (empty std::function means absent)
    std::function<Vec(const Vec& theta, const Vec& v, const ObservedData& y)> h_score;
    std::function<Mat(const Vec& theta, const Vec& v, const ObservedData& y)> h_hessian;
    std::function<Vec(const Vec& theta, const Vec& v)> marg_v_score;       // d log f(v) / dv
    std::function<Mat(const Vec& theta, const Vec& v)> marg_v_score_jac;   // d2 log f(v) / dv2
    std::function<Vec(const Vec& theta, const Vec& v)> marg_v_theta_grad;  // d log f(v) / dtheta

    // samplers
    std::function<Vec(const Vec& theta, num::VariateEngine&)> sample_v;
    std::function<std::vector<double>(const Vec& theta, const Vec& v, int n,
                                      num::VariateEngine&)>
        sample_y_given_v;

    // initializers: method-of-moments theta, and a point near the center of
    // f(v | theta) to start v iterations from
    std::function<Vec(const ObservedData&)> init_theta;
    std::function<Vec(const Vec& theta)> init_v;

    ModelOracle oracle;
    PredictiveOracle predictive;

    bool in_theta_support(const Vec& theta) const {
        return support_theta.contains(std::vector<double>(theta.begin(), theta.end()));
    }
    bool in_v_support(const Vec& theta, const Vec& v) const {
        return support_v(theta).contains(std::vector<double>(v.begin(), v.end()));
    }
};

// Model bound to a data set; h(theta, v) = log f(y|v) + log f(v).
struct HLogLik {
    const JointModel* model = nullptr;
    const ObservedData* data = nullptr;

    double operator()(const Vec& theta, const Vec& v) const {
        return model->log_cond(theta, v, *data) + model->log_marg_v(theta, v);
    }
};

}  // namespace hlik::model
