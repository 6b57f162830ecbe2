#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hlik/numeric/interval.hpp"

namespace hlik::pred {

struct GridSpec {
    int nodes = 2001;
    double tail_mass = 1e-8;  // mass allowed outside the node range (total)
};

// Normalized 1-d density tabulated on a strictly increasing node grid.
// log_density is stored unnormalized; the normalization constant is the
// trapezoid integral, so exp(log_density)/Z integrates to 1 over the nodes
// by construction and the nodes carry all but ~tail_mass of the mass.
class DensityGrid {
  public:
    DensityGrid(num::Interval support, std::vector<double> nodes,
                std::vector<double> log_density);

    const num::Interval& support() const { return support_; }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& log_density() const { return log_density_; }
    double normalization() const { return z_; }
    int size() const { return static_cast<int>(nodes_.size()); }

    double pdf(int i) const;
    double pdf_at(double x) const;   // linear interpolation of log density
    double cdf_at(double x) const;
    double quantile(double p) const;
    double trapezoid_mass() const;   // of pdf over the nodes; 1 by construction

  private:
    num::Interval support_;
    std::vector<double> nodes_;
    std::vector<double> log_density_;
    double shift_ = 0.0;  // max log density, for stable exponentiation
    double acc_ = 0.0;    // trapezoid mass of exp(log_density - shift)
    double z_ = 0.0;      // acc * exp(shift)
    std::vector<double> cum_;
};

// Builds a grid around the maximizer of log_f: pilot scan, golden-section
// refinement, curvature-based initial bracket, then endpoint expansion until
// the local exponential tail bound drops below the coverage target. Throws
// NonConvergent when the density does not decay on an infinite support.
DensityGrid build_density_grid(const std::function<double(double)>& log_f,
                               const num::Interval& support, const GridSpec& spec = {});

}  // namespace hlik::pred
