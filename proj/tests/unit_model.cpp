#include <doctest.h>

#include <cmath>

#include "hlik/model/builtins.hpp"
#include "hlik/model/likelihood.hpp"
#include "hlik/model/transforms.hpp"
#include "hlik/numeric/fdiff.hpp"
#include "hlik/numeric/quadrature.hpp"
#include "hlik/numeric/special.hpp"

using namespace hlik;
using namespace hlik::model;

namespace {

ObservedData unit_data(int n) { return ObservedData(std::vector<double>(n, 1.0)); }

Vec v1(double x) { return Vec::Constant(1, x); }

// random interior (theta, v) pairs for a model
std::vector<std::pair<Vec, Vec>> random_points(const JointModel& m, int count,
                                               std::uint64_t seed) {
    std::vector<std::pair<Vec, Vec>> out;
    num::VariateEngine eng = num::engine_for(num::RngStream{seed, 0});
    for (int i = 0; i < count; ++i) {
        Vec th(m.theta_dim);
        for (int j = 0; j < m.theta_dim; ++j) {
            const auto& ax = m.support_theta.axes[j];
            th[j] = ax.lower_finite() && ax.lower >= 0.0 ? 0.3 + 2.0 * eng.uniform01()
                                                         : -1.5 + 3.0 * eng.uniform01();
        }
        Vec v = m.sample_v(th, eng);
        out.emplace_back(th, v);
    }
    return out;
}

}  // namespace

TEST_CASE("h_loglik: closed-form values and the defining decomposition") {
    const ObservedData y = unit_data(2);

    const JointModel nat = make_model("exp-future-natural");
    CHECK(h_loglik(nat, y, v1(1.0), v1(1.0)) == doctest::Approx(-3.0).epsilon(1e-14));

    const JointModel lg = make_model("exp-future-log");
    CHECK(h_loglik(lg, y, v1(1.0), v1(0.0)) == doctest::Approx(-3.0).epsilon(1e-14));

    // h = log_cond + log_marg_v holds exactly, for every model
    for (const auto& name : registered_models()) {
        const JointModel m = make_model(name);
        for (const auto& [th, v] : random_points(m, 5, 11)) {
            CHECK(h_loglik(m, y, th, v) == m.log_cond(th, v, y) + m.log_marg_v(th, v));
        }
    }

    CHECK_THROWS_AS(h_loglik(nat, y, v1(-1.0), v1(1.0)), OutOfSupport);
    CHECK_THROWS_AS(h_loglik(nat, y, v1(1.0), v1(-1.0)), OutOfSupport);
}

TEST_CASE("exp-future-log h matches the hand-expanded form") {
    num::VariateEngine eng = num::engine_for(num::RngStream{5, 0});
    const JointModel m = make_model("exp-future-log");
    for (int i = 0; i < 20; ++i) {
        const int n = 1 + static_cast<int>(eng.uniform01() * 8);
        std::vector<double> obs(n);
        for (double& o : obs) o = eng.exponential(2.0);
        const ObservedData y(obs);
        const double lam = 0.5 + 3.0 * eng.uniform01();
        const double v = -2.0 + 4.0 * eng.uniform01();
        const double expect =
            -(n + 1) * std::log(lam) - (y.total() + std::exp(v)) / lam + v;
        CHECK(h_loglik(m, y, v1(lam), v1(v)) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("built-in v-marginals integrate to one") {
    num::QuadratureSpec spec;
    num::VariateEngine eng = num::engine_for(num::RngStream{77, 0});
    for (const auto& name : registered_models()) {
        const JointModel m = make_model(name);
        for (int rep = 0; rep < 3; ++rep) {
            Vec th(1);
            th[0] = m.support_theta.axes[0].lower >= 0.0 ? 0.3 + 2.5 * eng.uniform01()
                                                         : -1.0 + 2.0 * eng.uniform01();
            const auto f = [&](double v) { return std::exp(m.log_marg_v(th, v1(v))); };
            const auto r = num::integrate(f, m.support_v(th).axes[0], spec);
            CHECK(std::abs(r.value - 1.0) < 10.0 * spec.rel_tol);
        }
    }
}

TEST_CASE("analytic score/Hessian agree with finite differences") {
    const ObservedData y = unit_data(4);
    for (const auto& name : registered_models()) {
        const JointModel m = make_model(name);
        REQUIRE(m.h_score);
        REQUIRE(m.h_hessian);
        for (const auto& [th, v] : random_points(m, 8, 29)) {
            const int p = m.theta_dim, d = m.v_dim;
            const auto f = [&](const Vec& phi) {
                return m.log_cond(phi.head(p), phi.tail(d), y) +
                       m.log_marg_v(phi.head(p), phi.tail(d));
            };
            Vec phi(p + d);
            phi << th, v;
            const Vec gs = m.h_score(th, v, y);
            const Vec gf = num::gradient(f, phi);
            const Mat Hs = m.h_hessian(th, v, y);
            const Mat Hf = num::hessian(f, phi);
            for (int i = 0; i < p + d; ++i) {
                CHECK(std::abs(gs[i] - gf[i]) <= 1e-5 * std::max(1.0, std::abs(gs[i])));
                for (int j = 0; j < p + d; ++j)
                    CHECK(std::abs(Hs(i, j) - Hf(i, j)) <=
                          1e-5 * std::max(1.0, std::abs(Hs(i, j))));
            }
        }
    }
}

TEST_CASE("marginal likelihood: quadrature equals the analytic forms") {
    num::VariateEngine eng = num::engine_for(num::RngStream{101, 0});

    // exponential: integrating the future observation out returns the
    // n-sample exponential loglikelihood
    const JointModel lg = make_model("exp-future-log");
    for (int rep = 0; rep < 4; ++rep) {
        const int n = 2 + static_cast<int>(6 * eng.uniform01());
        std::vector<double> obs(n);
        for (double& o : obs) o = eng.exponential(1.5);
        const ObservedData y(obs);
        const double lam = 0.4 + 2.0 * eng.uniform01();
        const double expect = -n * std::log(lam) - y.total() / lam;
        CHECK(marginal_loglik(lg, y, v1(lam)) == doctest::Approx(expect).epsilon(1e-7));
        CHECK(lg.oracle.marginal_loglik(v1(lam), y) ==
              doctest::Approx(expect).epsilon(1e-14));
    }

    // normal: same statement with the convolution closed form
    const JointModel nm = make_model("normal-future");
    std::vector<double> obs{0.3, -0.8, 1.2, 0.05};
    const ObservedData y(obs);
    for (double th : {-0.5, 0.2, 1.0}) {
        CHECK(marginal_loglik(nm, y, v1(th)) ==
              doctest::Approx(nm.oracle.marginal_loglik(v1(th), y)).epsilon(1e-9));
    }

    // the MLE maximizes the marginal loglikelihood
    const double at_mle = marginal_loglik(lg, y, v1(y.mean()));
    CHECK(at_mle >= marginal_loglik(lg, y, v1(y.mean() * 1.2)));
    CHECK(at_mle >= marginal_loglik(lg, y, v1(y.mean() * 0.8)));
}

TEST_CASE("Laplace approximation of the marginal") {
    const JointModel lg = make_model("exp-future-log");
    const JointModel nat = make_model("exp-future-natural");
    const JointModel nm = make_model("normal-future");

    std::vector<double> obs{0.9, 2.1, 0.4, 1.4, 1.0};
    const ObservedData y5(obs);

    // no interior mode on the natural u scale: h is linear in u
    CHECK_THROWS_AS(laplace_marginal(nat, y5, v1(1.0)), NoInteriorMode);

    // Gaussian in v: Laplace is exact
    CHECK(laplace_marginal(nm, y5, v1(0.7)) ==
          doctest::Approx(marginal_loglik(nm, y5, v1(0.7))).epsilon(1e-9));

    // log-scale exponential: the v-integrand does not depend on n, so the
    // Laplace gap is the fixed constant 0.5*log(2*pi) - 1 at every n; the
    // relative gap still shrinks as the loglikelihood grows with n.
    const double expected_gap = 0.5 * std::log(num::two_pi) - 1.0;
    num::VariateEngine eng = num::engine_for(num::RngStream{311, 0});
    double prev_rel = num::inf;
    for (int n : {5, 20, 80}) {
        std::vector<double> o(n);
        for (double& x : o) x = eng.exponential(1.0);
        const ObservedData y(o);
        const double gap = laplace_marginal(lg, y, v1(1.3)) - marginal_loglik(lg, y, v1(1.3));
        CHECK(gap == doctest::Approx(expected_gap).epsilon(1e-6));
        const double rel = std::abs(gap) / std::abs(marginal_loglik(lg, y, v1(1.3)));
        CHECK(rel < prev_rel);
        prev_rel = rel;
    }
}

TEST_CASE("transform wrappers: log unobservable reproduces the Bayarri forms") {
    const JointModel blog = make_model("bayarri-log");
    // f_theta(v) = theta * exp(v - theta e^v)
    for (double th : {0.5, 1.0, 2.0}) {
        for (double v : {-1.0, 0.0, 0.7}) {
            const double expect = std::log(th) + v - th * std::exp(v);
            CHECK(blog.log_marg_v(v1(th), v1(v)) == doctest::Approx(expect).epsilon(1e-12));
            // S_theta(v) = 1 - theta e^v
            CHECK(blog.marg_v_score(v1(th), v1(v))[0] ==
                  doctest::Approx(1.0 - th * std::exp(v)).epsilon(1e-12));
        }
    }
}

TEST_CASE("transform wrappers: log parameter scale relabels without a Jacobian") {
    const JointModel lg = make_model("exp-future-log");
    const JointModel lg_eta = with_log_parameter(lg);
    const ObservedData y = unit_data(3);
    for (double lam : {0.5, 1.0, 2.5}) {
        for (double v : {-0.5, 0.3}) {
            CHECK(h_loglik(lg_eta, y, v1(std::log(lam)), v1(v)) ==
                  doctest::Approx(h_loglik(lg, y, v1(lam), v1(v))).epsilon(1e-12));
            // d h/d eta = lambda * dh/d lambda
            const Vec s_eta = lg_eta.h_score(v1(std::log(lam)), v1(v), y);
            const Vec s_lam = lg.h_score(v1(lam), v1(v), y);
            CHECK(s_eta[0] == doctest::Approx(lam * s_lam[0]).epsilon(1e-12));
            CHECK(s_eta[1] == doctest::Approx(s_lam[1]).epsilon(1e-12));
        }
    }
    // composed analytic Hessian still matches finite differences
    const auto f = [&](const Vec& phi) {
        return lg_eta.log_cond(phi.head(1), phi.tail(1), y) +
               lg_eta.log_marg_v(phi.head(1), phi.tail(1));
    };
    Vec phi(2);
    phi << 0.4, -0.2;
    const Mat Ha = lg_eta.h_hessian(phi.head(1), phi.tail(1), y);
    const Mat Hf = num::hessian(f, phi);
    CHECK((Ha - Hf).lpNorm<Eigen::Infinity>() < 1e-5);
}

TEST_CASE("logit transform keeps a bounded density proper") {
    // test-only model: smooth density on (0,1), theta-free
    JointModel m;
    m.name = "bounded-test";
    m.theta_dim = 1;
    m.v_dim = 1;
    m.theta_scales = {ParamScale::natural};
    m.support_theta = num::BoxDomain(num::Interval::positive_half_line());
    m.support_v = [](const Vec&) { return num::BoxDomain(num::Interval(0.0, 1.0)); };
    m.log_cond = [](const Vec&, const Vec&, const ObservedData&) { return 0.0; };
    m.log_marg_v = [](const Vec&, const Vec& v) {
        return std::log(1.0 + 0.5 * std::sin(num::two_pi * v[0]));
    };
    const JointModel t = with_unobservable_transform(m, logit_transform());
    num::QuadratureSpec spec;
    const auto f = [&](double v) { return std::exp(t.log_marg_v(v1(1.0), v1(v))); };
    const auto r = num::integrate(f, t.support_v(v1(1.0)).axes[0], spec);
    CHECK(std::abs(r.value - 1.0) < 1e-7);
}
