#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hlik/model/builtins.hpp"
#include "hlik/prediction/predictive.hpp"
#include "hlik/numeric/special.hpp"

using namespace hlik;
using namespace hlik::model;
using namespace hlik::pred;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

ObservedData expo_dataset(int n, double lambda, std::uint64_t seed) {
    num::VariateEngine eng = num::engine_for(num::RngStream{seed, 0});
    std::vector<double> obs(n);
    for (double& o : obs) o = eng.exponential(lambda);
    return ObservedData(obs);
}

double pareto_logpdf(double r, double n, double order) {
    // normalized density proportional to (1+r/n)^(-order), r >= 0
    const double norm = (order - 1.0) / n;
    return std::log(norm) - order * std::log1p(r / n);
}

}  // namespace

TEST_CASE("profile theta: closed form and stationarity") {
    const JointModel lg = make_model("exp-future-log");
    const ObservedData y2(std::vector<double>{1.0, 1.0});
    CHECK(profile_theta(lg, y2, v1(0.0))[0] == doctest::Approx(1.0).epsilon(1e-12));

    const ObservedData y4(std::vector<double>{2.0, 2.0, 2.0, 2.0});
    CHECK(profile_theta(lg, y4, v1(std::log(2.0)))[0] ==
          doctest::Approx(2.0).epsilon(1e-12));

    // generic Newton path on the normal model: score vanishes at the profile
    const JointModel nm = make_model("normal-future");
    const ObservedData yn(std::vector<double>{0.2, -0.5, 1.4});
    for (double v : {-1.0, 0.3, 2.0}) {
        const Vec th = profile_theta(nm, yn, v1(v));
        CHECK(std::abs(model::h_score(nm, yn, th, v1(v))[0]) < 1e-8);
        // hand-solved: theta(v) = (n ybar + v) / (n + 1)
        CHECK(th[0] == doctest::Approx((yn.total() + v) / (yn.n() + 1)).epsilon(1e-9));
    }

    // stripping the closed form exercises the generic path on the same model
    JointModel lg_generic = lg;
    lg_generic.oracle.profile_theta = nullptr;
    for (double v : {-0.7, 0.0, 1.1}) {
        CHECK(profile_theta(lg_generic, y4, v1(v))[0] ==
              doctest::Approx(lg.oracle.profile_theta(y4, v1(v))[0]).epsilon(1e-9));
    }
}

TEST_CASE("profiled curvature D in both parameter scales") {
    const ObservedData y = expo_dataset(6, 1.0, 81);
    const JointModel lam = exponential_future(UScale::log_u, ThetaScale::lambda);
    const JointModel eta = exponential_future(UScale::log_u, ThetaScale::log_lambda);

    for (double v : {-0.5, 0.2, 1.0}) {
        const Vec thp = profile_theta(lam, y, v1(v));
        const double lambda_v = thp[0];
        CHECK(profile_curvature(lam, y, v1(v), thp) ==
              doctest::Approx((y.n() + 1) / (lambda_v * lambda_v)).epsilon(1e-12));
        const Vec etap = profile_theta(eta, y, v1(v));
        CHECK(profile_curvature(eta, y, v1(v), etap) ==
              doctest::Approx(y.n() + 1.0).epsilon(1e-12));

        // finite-difference D agrees with the closed form
        JointModel lam_fd = lam;
        lam_fd.oracle.profile_curvature = nullptr;
        CHECK(profile_curvature(lam_fd, y, v1(v), thp) ==
              doctest::Approx((y.n() + 1) / (lambda_v * lambda_v)).epsilon(1e-5));
    }
}

TEST_CASE("aphl differences match the profiled closed forms") {
    const ObservedData y = expo_dataset(5, 2.0, 17);
    const JointModel lam = exponential_future(UScale::log_u, ThetaScale::lambda);
    const JointModel eta = exponential_future(UScale::log_u, ThetaScale::log_lambda);
    const double n = y.n();
    const auto lam_v = [&](double v) { return (y.total() + std::exp(v)) / (n + 1.0); };

    const double va = -0.4, vb = 0.9;
    // lambda scale: aphl(v) = -n log lambda(v) + v + const
    const double got_lam = aphl(lam, y, v1(vb), ParamScale::natural) -
                           aphl(lam, y, v1(va), ParamScale::natural);
    const double want_lam = (-n * std::log(lam_v(vb)) + vb) - (-n * std::log(lam_v(va)) + va);
    CHECK(got_lam == doctest::Approx(want_lam).epsilon(1e-10));

    // log scale: the adjustment is immaterial, order raises to n+1
    const double got_eta =
        aphl(eta, y, v1(vb), ParamScale::log) - aphl(eta, y, v1(va), ParamScale::log);
    const double want_eta =
        (-(n + 1) * std::log(lam_v(vb)) + vb) - (-(n + 1) * std::log(lam_v(va)) + va);
    CHECK(got_eta == doctest::Approx(want_eta).epsilon(1e-10));

    // requesting the log scale on the natural-scale model wraps generically
    CHECK(aphl(lam, y, v1(vb), ParamScale::log) -
              aphl(lam, y, v1(va), ParamScale::log) ==
          doctest::Approx(want_eta).epsilon(1e-8));
}

TEST_CASE("h-distribution matches the closed-form Pareto forms") {
    for (int n : {2, 5, 10}) {
        const ObservedData y = expo_dataset(n, 1.0, 100 + n);

        const JointModel lam = exponential_future(UScale::log_u, ThetaScale::lambda);
        const HDistribution hd = h_distribution(lam, y, ParamScale::natural);
        double sup = 0.0;
        for (int i = 0; i < hd.r_grid.size(); ++i) {
            const double r = hd.r_grid.nodes()[i];
            sup = std::max(sup, std::abs(hd.r_grid.pdf(i) -
                                         std::exp(pareto_logpdf(r, n, n))));
        }
        CHECK(sup < 1e-6);

        const JointModel eta = exponential_future(UScale::log_u, ThetaScale::log_lambda);
        const HDistribution hl = h_distribution(eta, y, ParamScale::log);
        sup = 0.0;
        for (int i = 0; i < hl.r_grid.size(); ++i) {
            const double r = hl.r_grid.nodes()[i];
            sup = std::max(sup, std::abs(hl.r_grid.pdf(i) -
                                         std::exp(pareto_logpdf(r, n, n + 1.0))));
        }
        CHECK(sup < 1e-6);

        // pushforward consistency at shared nodes: r = n e^v / U_n
        const auto& pv = lam.predictive;
        for (int i = 0; i < hd.v_grid.size(); i += 100) {
            const double v = hd.v_grid.nodes()[i];
            const double r = pv.to_r(v, y);
            if (r <= hd.r_grid.nodes().front() || r >= hd.r_grid.nodes().back()) continue;
            const double via_v = hd.v_grid.pdf(i) * std::abs(pv.dv_dr(r, y));
            CHECK(std::abs(hd.r_grid.pdf_at(r) - via_v) < 1e-5);
        }
    }
}

TEST_CASE("pivotal predictive density") {
    const JointModel lg = make_model("exp-future-log");

    const ObservedData y1(std::vector<double>{1.7});
    const RDensity p1 = pivotal_predictive(lg, y1);
    CHECK(std::exp(p1.log_pdf(1.0)) == doctest::Approx(0.25).epsilon(1e-12));

    // pointwise limit e^{-r} for large n
    const ObservedData ybig(std::vector<double>(1000000, 1.0));
    const RDensity pb = pivotal_predictive(lg, ybig);
    for (double r : {0.3, 1.0, 3.0})
        CHECK(std::exp(pb.log_pdf(r)) == doctest::Approx(std::exp(-r)).epsilon(1e-5));

    // no known pivot for the Bayarri model
    CHECK_THROWS_AS(pivotal_predictive(make_model("bayarri"), y1), Unsupported);

    // Kolmogorov-Smirnov against the joint sampler
    const int n = 10;
    const std::size_t N = 20000;
    std::vector<double> rs(N);
    for (std::size_t i = 0; i < N; ++i) {
        num::VariateEngine eng = num::engine_for(num::RngStream{424242, 0}, i);
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += eng.exponential(1.0);
        rs[i] = eng.exponential(1.0) / (s / n);
    }
    std::sort(rs.begin(), rs.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double cdf = 1.0 - std::pow(1.0 + rs[i] / n, -static_cast<double>(n));
        ks = std::max(ks, std::abs(cdf - (i + 1.0) / N));
        ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / N));
    }
    CHECK(ks < 1.95 / std::sqrt(static_cast<double>(N)));
}

TEST_CASE("flat-prior posterior predictive") {
    const JointModel lg = make_model("exp-future-log");

    const ObservedData y2(std::vector<double>{0.5, 1.5});
    const RDensity post = posterior_predictive_flat(lg, y2, FlatPrior::natural_scale);
    CHECK(std::exp(post.log_pdf(0.0)) == doctest::Approx(0.5).epsilon(1e-12));

    const ObservedData y1(std::vector<double>{1.0});
    CHECK_THROWS_AS(posterior_predictive_flat(lg, y1, FlatPrior::natural_scale),
                    ImproperPosterior);

    // flat prior on log lambda reproduces the pivotal density exactly
    const RDensity post_log = posterior_predictive_flat(lg, y2, FlatPrior::log_scale);
    const RDensity piv = pivotal_predictive(lg, y2);
    for (double r : {0.0, 0.4, 1.3, 7.0})
        CHECK(post_log.log_pdf(r) == piv.log_pdf(r));

    // the generic quadrature route agrees with the closed form
    const ObservedData y6 = expo_dataset(6, 1.0, 55);
    JointModel lg_generic = lg;
    lg_generic.predictive.posterior_log_density = nullptr;
    lg_generic.predictive.posterior_hdp_c = nullptr;
    const RDensity gen = posterior_predictive_flat(lg_generic, y6, FlatPrior::natural_scale);
    const RDensity cf = posterior_predictive_flat(lg, y6, FlatPrior::natural_scale);
    for (double r : {0.2, 0.8, 1.5, 3.0, 6.0})
        CHECK(std::exp(gen.log_pdf(r)) ==
              doctest::Approx(std::exp(cf.log_pdf(r))).epsilon(1e-4));
}

TEST_CASE("highest-density predictive intervals") {
    const JointModel lg = make_model("exp-future-log");
    const ObservedData y10 = expo_dataset(10, 1.0, 33);

    const RDensity piv = pivotal_predictive(lg, y10);
    const HdpInterval h5 = hdp_interval(piv, 0.05);
    REQUIRE(h5.c.has_value());
    const double direct = 10.0 * (std::pow(0.05, -0.1) - 1.0);
    CHECK(*h5.c == doctest::Approx(direct).epsilon(1e-12));
    CHECK(std::abs(*h5.c - 3.4934) < 1e-3);
    CHECK(h5.lo() == 0.0);
    CHECK(h5.level == doctest::Approx(0.95));

    // degenerate interval at alpha = 1: c(1, n) = 0
    const HdpInterval h1 = hdp_interval(piv, 1.0);
    CHECK((*piv.hdp_upper)(1.0) == doctest::Approx(0.0));

    // limit toward -log(alpha)
    const ObservedData ybig(std::vector<double>(1000000, 1.0));
    const RDensity pbig = pivotal_predictive(lg, ybig);
    CHECK(std::abs((*pbig.hdp_upper)(0.05) - (-std::log(0.05))) < 1e-4);

    // water-filling on the h-distribution grid reproduces the closed form
    const HDistribution hd = h_distribution(lg, y10, ParamScale::log);
    const HdpInterval hg = hdp_interval(hd.r_grid, 0.05);
    REQUIRE(hg.intervals.size() == 1);
    CHECK(std::abs(hg.hi() - direct) < 5e-3);
    CHECK(hd.r_grid.cdf_at(hg.hi()) - hd.r_grid.cdf_at(hg.lo()) ==
          doctest::Approx(0.95).epsilon(1e-3));
    (void)h1;
}

TEST_CASE("water-filling on a bimodal grid returns a union of intervals") {
    const auto logf = [](double x) {
        const double a = std::exp(-0.5 * (x + 2.5) * (x + 2.5));
        const double b = std::exp(-0.5 * (x - 2.5) * (x - 2.5));
        return std::log(0.5 * (a + b) / std::sqrt(num::two_pi));
    };
    const DensityGrid g = build_density_grid(logf, num::Interval::real_line());
    const HdpInterval hdp = hdp_interval(g, 0.2);
    REQUIRE(hdp.intervals.size() == 2);
    double mass = 0.0;
    for (const auto& [lo, hi] : hdp.intervals) mass += g.cdf_at(hi) - g.cdf_at(lo);
    CHECK(mass == doctest::Approx(0.8).epsilon(1e-3));
    // symmetric bumps give symmetric intervals
    CHECK(hdp.intervals[0].first == doctest::Approx(-hdp.intervals[1].second).epsilon(1e-6));
}

TEST_CASE("density grid queries") {
    const auto logf = [](double x) { return -0.5 * x * x; };
    const DensityGrid g = build_density_grid(logf, num::Interval::real_line());
    CHECK(g.trapezoid_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.quantile(0.5) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(g.quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-5));
    CHECK(g.cdf_at(g.quantile(0.31)) == doctest::Approx(0.31).epsilon(1e-9));
    CHECK(g.pdf_at(0.0) == doctest::Approx(1.0 / std::sqrt(num::two_pi)).epsilon(1e-7));
}

TEST_CASE("the predictive triple and its distances") {
    const JointModel lam = exponential_future(UScale::log_u, ThetaScale::lambda);
    const JointModel eta = exponential_future(UScale::log_u, ThetaScale::log_lambda);

    const ObservedData y = expo_dataset(10, 1.0, 71);
    const PredictiveTriple tl = compare_triple(lam, y, ParamScale::natural);
    CHECK(tl.distances.sup_h_posterior < 1e-6);
    CHECK(tl.distances.sup_h_pivotal > 1e-3);
    CHECK(tl.distances.tv_h_pivotal > 1e-4);

    const PredictiveTriple te = compare_triple(eta, y, ParamScale::log);
    CHECK(te.distances.sup_h_pivotal < 1e-6);
    CHECK(te.distances.sup_h_posterior < 1e-6);
    CHECK(te.distances.sup_pivotal_posterior < 1e-6);

    // the order-n vs order-(n+1) gap closes as n grows
    const ObservedData y50 = expo_dataset(50, 1.0, 72);
    const PredictiveTriple tl50 = compare_triple(lam, y50, ParamScale::natural);
    CHECK(tl50.distances.tv_h_pivotal < tl.distances.tv_h_pivotal);

    // Gaussian three-in-one at the natural scale
    const JointModel nm = make_model("normal-future");
    const ObservedData yn(std::vector<double>{0.4, -0.2, 0.9, 0.1});
    const PredictiveTriple tn = compare_triple(nm, yn, ParamScale::natural);
    CHECK(tn.distances.sup_h_pivotal < 1e-6);
    CHECK(tn.distances.sup_pivotal_posterior < 1e-12);
}
