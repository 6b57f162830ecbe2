#pragma once

#include <optional>
#include <string>

#include "hlik/model/likelihood.hpp"
#include "hlik/numeric/rng.hpp"

namespace hlik::est {

using model::JointModel;
using model::ObservedData;

enum class SolveStatus { converged, diverged, no_interior_mode, max_iterations };

const char* to_string(SolveStatus s);

struct MhleSolution {
    model::ParameterVector theta_hat;
    model::UnobservableVector v_hat;
    Vec score;              // h-score at the final iterate
    Mat observed_hessian;   // -d2h/dphi2 at the final iterate
    std::optional<Mat> expected_hessian;   // I_h(theta_hat), closed form only
    std::optional<Mat> inverse_expected;   // present when I_h is PD
    bool expected_pd = false;
    SolveStatus status = SolveStatus::max_iterations;
    int iterations = 0;
    std::string message;
};

// Safeguarded Newton ascent on h over phi = (theta, v). Diverging theta is
// a typed outcome (the "meaningless estimator" case), a stall against the
// v-support boundary with nonzero score is NoInteriorMode.
MhleSolution solve_mhle(const JointModel& m, const ObservedData& y,
                        std::optional<std::pair<Vec, Vec>> init = std::nullopt);

// E_theta[-d2h/dphi2] over joint (y, v) draws with per-entry standard
// errors; n_data is the sample size of each simulated y.
Mat expected_hessian_mc(const JointModel& m, const Vec& theta, int n_data, std::size_t n_mc,
                        num::RngStream stream, Mat* se = nullptr, int jobs = 0);

// closed form when the model declares one
Mat expected_hessian_closed(const JointModel& m, const Vec& theta, const ObservedData& y);

struct InverseInfo {
    std::optional<Mat> inverse;
    bool pd = false;
};

// Inverse through a Cholesky factorization; a failed factorization means
// the information matrix is not positive definite and no inverse is
// reported.
InverseInfo inverse_information(const Mat& info);

// max-abs entry gap between the observed Hessian at the solution and the
// expected Hessian evaluated at theta_hat
double observed_vs_expected(const JointModel& m, const ObservedData& y,
                            const MhleSolution& sol);

struct RTermDecomposition {
    Vec leading;    // I_h^{-1}(theta) S(phi; y) at the true phi
    Vec remainder;  // (phi_hat - phi) - leading
};

// Splits the estimation error at the true (theta, v) into the estimating
// equation term and the remainder. Only meaningful inside simulation
// harnesses where the truth is known; I_h is taken at the true theta.
RTermDecomposition r_term_decomposition(const JointModel& m, const ObservedData& y,
                                        const Vec& theta_true, const Vec& v_true,
                                        const MhleSolution& sol,
                                        std::optional<Mat> info_override = std::nullopt);

}  // namespace hlik::est
