#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hlik/model/transforms.hpp"
#include "hlik/numeric/mc.hpp"
#include "hlik/numeric/quadrature.hpp"

namespace hlik::audit {

using model::JointModel;

enum class BoundaryVerdict { vanishes, non_vanishing, equal_endpoints };
enum class IdentityVerdict { bartlized, first_only, fails, not_applicable };

const char* to_string(BoundaryVerdict v);
const char* to_string(IdentityVerdict v);

// Extrapolated limit of f_theta(v) (order 1) or of its axis derivative
// (order 2) toward one face of the support rectangle.
struct FaceReport {
    int axis = 0;
    bool upper = false;
    int order = 1;
    double limit = 0.0;
    BoundaryVerdict verdict = BoundaryVerdict::vanishes;
};

// Monte Carlo residuals of the two h-likelihood identities over joint
// (y, v) draws, with the block structure of the second one: A must vanish
// for every model, B and C exactly when the marginal conditions hold.
struct FullIdentityReport {
    Vec score_mean, score_se;
    Mat second_identity, second_identity_se;
    Mat a_block, a_se;
    Mat b_block, b_se;
    Mat c_block, c_se;
    std::size_t n_mc = 0;
};

struct ThetaPointReport {
    Vec theta;
    Vec cond1;          // integral of df/dv per coordinate
    double cond1_err = 0.0;
    Mat cond2;          // integral of d2f/dv2
    double cond2_err = 0.0;
    std::vector<FaceReport> faces;
    std::optional<FullIdentityReport> full;
    double tolerance = 0.0;
    IdentityVerdict verdict = IdentityVerdict::fails;
};

struct BartlettReport {
    std::string model;
    std::vector<ThetaPointReport> points;
};

// E_theta[S_theta(v)] = integral of df_theta/dv; zero iff the first
// h-likelihood Bartlett identity holds (given a theta-free support).
Vec check_condition1(const JointModel& m, const Vec& theta,
                     const num::QuadratureSpec& spec = {}, double* err = nullptr);

// E_theta[dS/dv + S S^T] = integral of d2 f_theta/dv2; zero (given
// condition 1) iff the second identity holds.
Mat check_condition2(const JointModel& m, const Vec& theta,
                     const num::QuadratureSpec& spec = {}, double* err = nullptr);

// Face-by-face limits of f (order 1) or df/dv (order 2). The vanishing
// test is sufficient, not necessary: equal nonzero limits at a finite face
// pair still clear the corresponding condition, reported as
// equal_endpoints. Verdict logic elsewhere therefore only ever consumes
// the condition values; these are explanation.
std::vector<FaceReport> check_boundary(const JointModel& m, const Vec& theta, int order);

FullIdentityReport check_full_identities(const JointModel& m, const Vec& theta, int n_data,
                                         std::size_t n_mc, num::RngStream stream,
                                         int jobs = 0);

// identity-holds band from the design tolerance, quadrature error and MC noise
double identity_tolerance(double quad_err, double mc_se);

// 5 log-spaced (or linear, for signed ranges) points across the model's
// declared audit range.
std::vector<Vec> default_theta_grid(const JointModel& m, int k = 5);

// Full per-theta audit; verdicts come from the condition values alone.
BartlettReport audit_model(const JointModel& m, const std::vector<Vec>& grid,
                           int n_data, std::size_t n_mc, num::RngStream stream,
                           const num::QuadratureSpec& spec = {}, int jobs = 0);

struct BartlizeCandidate {
    std::string transform;
    bool passes = false;
    double worst_residual = 0.0;
    BartlettReport report;
};

// Try each catalog transform of the unobservable and rank the ones that
// clear both conditions on the whole grid. Throws EmptyCatalogResult when
// nothing passes.
std::vector<BartlizeCandidate> bartlize_search(const JointModel& m,
                                               const std::vector<Vec>& grid,
                                               const std::vector<model::MonotoneTransform>& catalog,
                                               const num::QuadratureSpec& spec = {});

}  // namespace hlik::audit
