#pragma once

#include "hlik/model/joint_model.hpp"
#include "hlik/numeric/quadrature.hpp"

namespace hlik::model {

// h(theta, v; y) = log f_theta(y|v) + log f_theta(v). Throws OutOfSupport.
double h_loglik(const JointModel& m, const ObservedData& y, const Vec& theta, const Vec& v);

// Joint score/Hessian of h in phi = (theta, v); analytic when the model
// declares them, central differences otherwise.
Vec h_score(const JointModel& m, const ObservedData& y, const Vec& theta, const Vec& v);
Mat h_hessian(const JointModel& m, const ObservedData& y, const Vec& theta, const Vec& v);

// log integral of e^h over the v-support, stabilized by shifting with the
// maximum of h over a pilot scan (plus the interior mode when one exists).
double marginal_loglik(const JointModel& m, const ObservedData& y, const Vec& theta,
                       const num::QuadratureSpec& spec = {});

// h(theta, vtilde) - 0.5 log det(-d2h/dv2) + (d/2) log 2pi at the interior
// maximizer vtilde of h(theta, .). Throws NoInteriorMode / HessianNotNegDef.
double laplace_marginal(const JointModel& m, const ObservedData& y, const Vec& theta);

// Interior maximizer of v -> h(theta, v); shared by the Laplace routine and
// the predictive grids. Throws NoInteriorMode when the iteration pins at the
// support boundary or escapes without a stationary point.
Vec find_v_mode(const JointModel& m, const ObservedData& y, const Vec& theta);

}  // namespace hlik::model
