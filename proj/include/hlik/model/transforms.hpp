#pragma once

#include <string>
#include <vector>

#include "hlik/model/joint_model.hpp"

namespace hlik::model {

// Scalar monotone change of variables v = fwd(u), applied coordinatewise to
// the unobservable. Carries enough derivatives that analytic scores and
// Hessians survive the wrapping via the chain rule.
struct MonotoneTransform {
    std::string name;
    VScale label = VScale::custom;

    std::function<double(double u)> fwd;
    std::function<double(double v)> inv;        // u(v)
    std::function<double(double v)> inv_d1;     // u'(v)
    std::function<double(double v)> inv_d2;     // u''(v)
    std::function<double(double v)> log_jac;    // log |u'(v)|
    std::function<double(double v)> log_jac_d1;
    std::function<double(double v)> log_jac_d2;

    std::function<bool(const num::Interval&)> applicable;
    std::function<num::Interval(const num::Interval&)> map_support;
};

MonotoneTransform identity_transform();
MonotoneTransform log_transform();    // v = log u, needs u-support in (0, inf)
MonotoneTransform logit_transform();  // needs a bounded u-support

// The fixed search catalog: identity, log, logit.
std::vector<MonotoneTransform> transform_catalog();

// Re-express the unobservable of `base` through `t`. Density picks up the
// Jacobian, the conditional and the samplers are re-indexed, analytic
// derivatives (when present) are composed, model oracles are dropped.
JointModel with_unobservable_transform(const JointModel& base, const MonotoneTransform& t);

// Work on eta = log(theta), coordinatewise; requires a positive theta
// support. theta is fixed, so no Jacobian enters h.
JointModel with_log_parameter(const JointModel& base);

}  // namespace hlik::model
