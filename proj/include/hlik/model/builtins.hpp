#pragma once

#include <string>
#include <vector>

#include "hlik/model/joint_model.hpp"

namespace hlik::model {

enum class UScale { natural_u, log_u };
enum class ThetaScale { lambda, log_lambda };

// i.i.d. exponential sample with mean lambda; the unobservable is the next
// observation, either on its own scale or on the log scale.
JointModel exponential_future(UScale scale = UScale::log_u,
                              ThetaScale param_scale = ThetaScale::lambda);

// Two-level exponential: u ~ Exp(rate theta), y | u ~ i.i.d. Exp(rate u).
// Only the u-marginal matters for the Bartlett conditions.
JointModel bayarri_marginal(UScale scale = UScale::natural_u);

// y_i ~ N(theta, sigma^2) with the unobservable a future observation;
// sigma known. Declares no profile closed forms, so it exercises the
// generic solver paths.
JointModel normal_location_future(double sigma = 1.0);

std::vector<std::string> registered_models();
JointModel make_model(const std::string& name);

}  // namespace hlik::model
