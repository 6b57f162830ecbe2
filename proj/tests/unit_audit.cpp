#include <doctest.h>

#include <cmath>

#include "hlik/audit/bartlett.hpp"
#include "hlik/model/builtins.hpp"
#include "hlik/numeric/special.hpp"

using namespace hlik;
using namespace hlik::audit;
using namespace hlik::model;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

// theta-free smooth density on (0,1) with equal nonzero endpoint values and
// equal endpoint derivatives
JointModel sinusoid_density_model() {
    JointModel m;
    m.name = "sinusoid-test";
    m.theta_dim = 1;
    m.v_dim = 1;
    m.theta_scales = {ParamScale::natural};
    m.support_theta = num::BoxDomain(num::Interval::positive_half_line());
    m.support_v = [](const Vec&) { return num::BoxDomain(num::Interval(0.0, 1.0)); };
    m.theta_audit_range = num::Interval(0.5, 2.0);
    m.log_cond = [](const Vec&, const Vec&, const ObservedData&) { return 0.0; };
    m.log_marg_v = [](const Vec&, const Vec& v) {
        return std::log(1.0 + 0.5 * std::sin(num::two_pi * v[0]));
    };
    return m;
}

JointModel theta_dependent_support_model() {
    JointModel m;
    m.name = "uniform-theta-test";
    m.theta_dim = 1;
    m.v_dim = 1;
    m.theta_scales = {ParamScale::natural};
    m.support_theta = num::BoxDomain(num::Interval::positive_half_line());
    m.support_v = [](const Vec& th) { return num::BoxDomain(num::Interval(0.0, th[0])); };
    m.support_v_depends_on_theta = true;
    m.log_cond = [](const Vec&, const Vec&, const ObservedData&) { return 0.0; };
    m.log_marg_v = [](const Vec& th, const Vec&) { return -std::log(th[0]); };
    return m;
}

}  // namespace

TEST_CASE("condition 1: Bayarri score expectation is -theta on the natural scale") {
    const JointModel nat = make_model("bayarri");
    for (double th : {0.5, 1.0, 2.0, 4.0}) {
        double err = 0.0;
        const Vec c1 = check_condition1(nat, v1(th), {}, &err);
        CHECK(std::abs(c1[0] - (-th)) < 1e-4 * th);
        CHECK(err < 1e-5);
    }
}

TEST_CASE("conditions on the log scale hold; second condition fails on natural") {
    const JointModel lg = make_model("bayarri-log");
    const JointModel nat = make_model("bayarri");
    for (double th : {0.5, 2.0}) {
        CHECK(std::abs(check_condition1(lg, v1(th))[0]) < 1e-6);
        CHECK(std::abs(check_condition2(lg, v1(th))(0, 0)) < 1e-6);
        // integral of f'' on the natural scale telescopes to -f'(0) = theta^2
        const Mat c2 = check_condition2(nat, v1(th));
        CHECK(c2(0, 0) == doctest::Approx(th * th).epsilon(1e-4));
    }
}

TEST_CASE("conditions vanish for a Gaussian unobservable") {
    const JointModel nm = make_model("normal-future");
    for (double th : {-1.0, 0.0, 1.5}) {
        CHECK(std::abs(check_condition1(nm, v1(th))[0]) < 1e-6);
        CHECK(std::abs(check_condition2(nm, v1(th))(0, 0)) < 1e-6);
    }
}

TEST_CASE("boundary verdicts") {
    const JointModel nat = make_model("bayarri");
    const auto faces1 = check_boundary(nat, v1(2.0), 1);
    REQUIRE(faces1.size() == 2);
    // f_theta(0) = theta = 2: the vanishing condition is violated at u = 0
    CHECK(faces1[0].upper == false);
    CHECK(faces1[0].verdict == BoundaryVerdict::non_vanishing);
    CHECK(faces1[0].limit == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(faces1[1].verdict == BoundaryVerdict::vanishes);

    const JointModel lg = make_model("bayarri-log");
    for (int order : {1, 2})
        for (const auto& f : check_boundary(lg, v1(2.0), order))
            CHECK(f.verdict == BoundaryVerdict::vanishes);

    const JointModel nm = make_model("normal-future");
    for (int order : {1, 2})
        for (const auto& f : check_boundary(nm, v1(0.3), order))
            CHECK(f.verdict == BoundaryVerdict::vanishes);
}

TEST_CASE("equal endpoints clear condition 1 without vanishing") {
    const JointModel m = sinusoid_density_model();
    const Vec th = v1(1.0);

    const auto faces = check_boundary(m, th, 1);
    CHECK(faces[0].verdict == BoundaryVerdict::equal_endpoints);
    CHECK(faces[1].verdict == BoundaryVerdict::equal_endpoints);
    CHECK(faces[0].limit == doctest::Approx(1.0).epsilon(1e-4));

    // the verdict must come from the condition values, not the boundary test
    double e1 = 0.0, e2 = 0.0;
    const Vec c1 = check_condition1(m, th, {}, &e1);
    const Mat c2 = check_condition2(m, th, {}, &e2);
    CHECK(std::abs(c1[0]) < identity_tolerance(e1, 0.0));
    CHECK(std::abs(c2(0, 0)) < identity_tolerance(e2, 0.0));
    const auto report = audit_model(m, {th}, 1, 0, num::RngStream{1, 0});
    CHECK(report.points[0].verdict == IdentityVerdict::bartlized);
}

TEST_CASE("theorem-2 consistency on the built-ins") {
    for (const auto& name : registered_models()) {
        const JointModel m = make_model(name);
        for (const Vec& th : default_theta_grid(m)) {
            const auto f1 = check_boundary(m, th, 1);
            const auto f2 = check_boundary(m, th, 2);
            const bool van1 = std::all_of(f1.begin(), f1.end(), [](const FaceReport& f) {
                return f.verdict == BoundaryVerdict::vanishes;
            });
            const bool van2 = std::all_of(f2.begin(), f2.end(), [](const FaceReport& f) {
                return f.verdict == BoundaryVerdict::vanishes;
            });
            double err = 0.0;
            if (van1) {
                const Vec c1 = check_condition1(m, th, {}, &err);
                CHECK(c1.lpNorm<Eigen::Infinity>() < identity_tolerance(err, 0.0));
            }
            if (van1 && van2) {
                const Mat c2 = check_condition2(m, th, {}, &err);
                CHECK(c2.lpNorm<Eigen::Infinity>() < identity_tolerance(err, 0.0));
            }
        }
    }
}

TEST_CASE("full-identity Monte Carlo residuals") {
    const num::RngStream stream{909, 0};
    const std::size_t N = 40000;

    const JointModel lg = make_model("exp-future-log");
    const auto rl = check_full_identities(lg, v1(1.0), 3, N, stream);
    for (int i = 0; i < 2; ++i)
        CHECK(std::abs(rl.score_mean[i]) < 3.0 * rl.score_se[i]);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(std::abs(rl.second_identity(i, j)) <
                  3.0 * rl.second_identity_se(i, j) + 1e-4);

    // natural u scale: the v-component of the h-score is the constant
    // -1/lambda, so its Monte Carlo mean is exactly -1 at lambda = 1
    const JointModel nat = make_model("exp-future-natural");
    const auto rn = check_full_identities(nat, v1(1.0), 3, N, stream.substream(1));
    CHECK(rn.score_mean[1] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(rn.score_se[1] == 0.0);

    // the A block vanishes for every model, Bartlized or not
    for (const auto& name : registered_models()) {
        const JointModel m = make_model(name);
        const auto r = check_full_identities(m, v1(m.support_theta.axes[0].lower >= 0.0 ? 1.3 : 0.4),
                                             4, N, stream.substream(2));
        CHECK(std::abs(r.a_block(0, 0)) < 3.0 * r.a_se(0, 0) + 1e-4);
    }

    // determinism across jobs
    const auto j1 = check_full_identities(lg, v1(1.0), 3, 5000, stream.substream(9), 1);
    const auto j4 = check_full_identities(lg, v1(1.0), 3, 5000, stream.substream(9), 4);
    CHECK(j1.score_mean == j4.score_mean);
    CHECK(j1.second_identity == j4.second_identity);
}

TEST_CASE("bartlize search") {
    const num::QuadratureSpec spec;

    const JointModel bay = make_model("bayarri");
    const auto grid = default_theta_grid(bay);
    const auto ranked =
        bartlize_search(bay, grid, {identity_transform(), log_transform()}, spec);
    REQUIRE(!ranked.empty());
    CHECK(ranked.front().transform == "log");
    CHECK(ranked.front().passes);
    const auto failing = std::find_if(ranked.begin(), ranked.end(),
                                      [](const auto& c) { return c.transform == "identity"; });
    REQUIRE(failing != ranked.end());
    CHECK(!failing->passes);

    const JointModel nm = make_model("normal-future");
    const auto rn = bartlize_search(nm, default_theta_grid(nm),
                                    {identity_transform(), log_transform()}, spec);
    CHECK(rn.front().transform == "identity");
    CHECK(rn.front().passes);

    const JointModel nat = make_model("exp-future-natural");
    CHECK_THROWS_AS(bartlize_search(nat, default_theta_grid(nat), {identity_transform()}, spec),
                    EmptyCatalogResult);
}

TEST_CASE("theta-dependent supports are tagged NotApplicable") {
    const JointModel m = theta_dependent_support_model();
    CHECK_THROWS_AS(check_condition1(m, v1(1.0)), NotApplicable);
    CHECK_THROWS_AS(check_boundary(m, v1(1.0), 1), NotApplicable);
    const auto report = audit_model(m, {v1(0.5), v1(2.0)}, 1, 0, num::RngStream{3, 0});
    for (const auto& pt : report.points)
        CHECK(pt.verdict == IdentityVerdict::not_applicable);
}

TEST_CASE("default theta grid is log-spaced over the declared range") {
    const JointModel bay = make_model("bayarri");
    const auto grid = default_theta_grid(bay);
    REQUIRE(grid.size() == 5);
    CHECK(grid.front()[0] == doctest::Approx(0.25));
    CHECK(grid.back()[0] == doctest::Approx(4.0));
    CHECK(grid[2][0] == doctest::Approx(1.0));  // geometric midpoint

    const JointModel nm = make_model("normal-future");
    const auto lin = default_theta_grid(nm);
    CHECK(lin[2][0] == doctest::Approx(0.0));
}
