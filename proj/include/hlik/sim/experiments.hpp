#pragma once

#include <string>
#include <vector>

#include "hlik/model/builtins.hpp"
#include "hlik/numeric/rng.hpp"
#include "hlik/prediction/predictive.hpp"

namespace hlik::sim {

struct ExperimentConfig {
    std::string model = "exp-future-log";
    double theta_true = 1.0;  // natural scale
    int n = 10;
    std::size_t replications = 10000;
    std::vector<double> alphas = {0.05};
    std::vector<std::string> methods = {"pivotal"};
    std::vector<int> n_grid;          // sample sizes for the study commands
    std::size_t mc_draws = 1000000;   // moment studies
    std::uint64_t seed = 0;
    int jobs = 0;

    void validate() const;
};

// ---------------------------------------------------------------------
// interval coverage
// ---------------------------------------------------------------------
struct MethodCoverage {
    std::string method;
    double alpha = 0.0;
    double coverage = 0.0;   // fraction of replicates covering y_{n+1}
    double se = 0.0;         // sqrt(p(1-p)/N)
    double mean_width = 0.0; // on the observation scale
};

struct CoverageResult {
    int n = 0;
    std::size_t replications = 0;
    std::vector<MethodCoverage> rows;
};

// Draws N datasets plus the future value from f(y, v | theta), builds each
// method's 1-alpha interval and tallies coverage. Bitwise deterministic for
// fixed (config, seed), independent of jobs.
CoverageResult run_coverage(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------
// estimation-error remainder study
// ---------------------------------------------------------------------
struct RTermRow {
    int n = 0;
    std::size_t draws = 0;
    double mean_r = 0.0, se_mean_r = 0.0, var_r = 0.0;
    double mean_z = 0.0, var_z = 0.0;
    double var_log_future = 0.0, se_var_log_future = 0.0;
    double mean_r_limit = 0.0, se_mean_r_limit = 0.0;  // xi - 1 - log xi draws
};

struct RTermStudy {
    std::vector<RTermRow> rows;
    // the limiting standardized error has density e^{z-1} on (-inf, 1]
    double z_density_at_one = 0.0;
    double normal_density_at_one = 0.0;
    double density_ratio = 0.0;
};

RTermStudy r_term_study(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------
// variance-decomposition duality
// ---------------------------------------------------------------------
struct DualityRow {
    int n = 0;
    std::size_t draws = 0;
    // posterior side, flat prior on lambda, closed forms
    double post_mean_term = 0.0;  // E[tau | y]
    double post_var_term = 0.0;   // V[e | y]
    double post_total = 0.0;
    // sampling side, Monte Carlo
    double samp_mean_term = 0.0, samp_mean_se = 0.0;  // E[tau | theta]
    double samp_var_term = 0.0, samp_var_se = 0.0;    // V[e | theta]
    double samp_total = 0.0, samp_total_se = 0.0;     // V(v_hat - v | theta)
    double consistency_gap = 0.0;  // samp_total - (samp_mean + samp_var)
    double gap_mean = 0.0, gap_var = 0.0;  // sampling minus posterior, per term
};

struct DualityResult {
    std::vector<DualityRow> rows;
};

DualityResult duality_check(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------
// parameter-scale sensitivity of the predictive triple
// ---------------------------------------------------------------------
struct ScaleRow {
    std::string param_scale;
    int n = 0;
    pred::TripleDistances distances;
    std::string status;  // "ok" or the failure tag (e.g. ImproperPosterior)
};

struct ScaleStudy {
    std::vector<ScaleRow> rows;
};

ScaleStudy scale_sensitivity_study(const ExperimentConfig& cfg);

}  // namespace hlik::sim
