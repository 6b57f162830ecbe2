#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <utility>

#include "hlik/model/likelihood.hpp"
#include "hlik/model/transforms.hpp"
#include "hlik/prediction/density_grid.hpp"

namespace hlik::pred {

using model::JointModel;
using model::ObservedData;
using model::ParamScale;

// Normalized density on the model's canonical comparison scale r; either a
// closed form or backed by a grid.
struct RDensity {
    num::Interval support{0.0, num::inf};
    std::function<double(double)> log_pdf;
    bool closed_form = false;
    std::shared_ptr<const DensityGrid> grid;
    // upper endpoint of the monotone highest-density region [lo, c(alpha)]
    std::optional<std::function<double(double)>> hdp_upper;
};

// h-distribution: exp(APHL) normalized over v, plus its pushforward to the
// canonical r scale. The r grid is sampled finer so that both grids keep
// their trapezoid normalization within tolerance.
struct HDistribution {
    DensityGrid v_grid;
    DensityGrid r_grid;
    ParamScale param_scale = ParamScale::natural;
};

struct HdpInterval {
    double level = 0.0;
    std::vector<std::pair<double, double>> intervals;  // union, usually one
    std::optional<double> c;  // closed-form upper endpoint when applicable
    double lo() const { return intervals.front().first; }
    double hi() const { return intervals.back().second; }
};

struct TripleDistances {
    double sup_h_pivotal = 0.0, sup_h_posterior = 0.0, sup_pivotal_posterior = 0.0;
    double tv_h_pivotal = 0.0, tv_h_posterior = 0.0, tv_pivotal_posterior = 0.0;
};

enum class FlatPrior { natural_scale, log_scale };

struct PredictiveTriple {
    HDistribution h_dist;
    RDensity pivotal;
    RDensity posterior;
    ParamScale param_scale = ParamScale::natural;
    TripleDistances distances;
};

// Re-express theta on the requested working scale, preserving declared
// closed forms when the model is already there.
JointModel in_param_scale(const JointModel& m, ParamScale scale);

// theta maximizing h(., v; y): declared closed form or an inner Newton
Vec profile_theta(const JointModel& m, const ObservedData& y, const Vec& v);

// D(h, theta) = det(-d2h/dtheta2) at the profile point; must be positive
double profile_curvature(const JointModel& m, const ObservedData& y, const Vec& v,
                         const Vec& theta_profile);

// adjusted profile h-loglikelihood h(theta(v), v) - 0.5 log D in the given
// parameter scale
double aphl(const JointModel& m, const ObservedData& y, const Vec& v, ParamScale scale);

HDistribution h_distribution(const JointModel& m, const ObservedData& y, ParamScale scale,
                             const GridSpec& spec = {}, int jobs = 0);

// Throws Unsupported for models without a known predictive pivot.
RDensity pivotal_predictive(const JointModel& m, const ObservedData& y);

// Closed form when declared (flat prior on the natural or log parameter
// scale); otherwise a quadrature grid over theta. Throws ImproperPosterior
// when the requested posterior does not normalize.
RDensity posterior_predictive_flat(const JointModel& m, const ObservedData& y, FlatPrior prior,
                                   const GridSpec& spec = {}, int jobs = 0);

// density-threshold (water-filling) highest-density region on a grid
HdpInterval hdp_interval(const DensityGrid& g, double alpha);
HdpInterval hdp_interval(const RDensity& d, double alpha, const GridSpec& spec = {});

PredictiveTriple compare_triple(const JointModel& m, const ObservedData& y, ParamScale scale,
                                const GridSpec& spec = {}, int jobs = 0);

}  // namespace hlik::pred
