#include "hlik/estimation/mhle.hpp"

#include <cmath>

#include "hlik/numeric/parallel.hpp"

namespace hlik::est {

namespace {

constexpr double kScoreTol = 1e-8;
constexpr double kStepTol = 1e-10;
constexpr double kThetaBlowup = 1e12;

double natural_magnitude(const JointModel& m, const Vec& theta, int j) {
    return m.theta_scales[j] == model::ParamScale::log ? std::exp(theta[j])
                                                       : std::abs(theta[j]);
}

bool in_supports(const JointModel& m, const Vec& theta, const Vec& v) {
    return m.in_theta_support(theta) && m.in_v_support(theta, v);
}

}  // namespace

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "Converged";
        case SolveStatus::diverged: return "Diverged";
        case SolveStatus::no_interior_mode: return "NoInteriorMode";
        case SolveStatus::max_iterations: return "MaxIterations";
    }
    return "?";
}

MhleSolution solve_mhle(const JointModel& m, const ObservedData& y,
                        std::optional<std::pair<Vec, Vec>> init) {
    const int p = m.theta_dim, d = m.v_dim, q = p + d;

    Vec theta = init ? init->first : m.init_theta(y);
    Vec v = init ? init->second : m.init_v(theta);
    if (!in_supports(m, theta, v))
        throw OutOfSupport("solve_mhle: initial point outside the supports");

    MhleSolution sol;
    const auto finalize = [&](SolveStatus status, int iter, const std::string& msg) {
        sol.theta_hat = model::ParameterVector(theta);
        sol.theta_hat.scale_labels = m.theta_scales;
        sol.v_hat = model::UnobservableVector(v, m.v_scale);
        sol.score = model::h_score(m, y, theta, v);
        sol.observed_hessian = -model::h_hessian(m, y, theta, v);
        sol.status = status;
        sol.iterations = iter;
        sol.message = msg;
        if (m.oracle.expected_hessian) {
            sol.expected_hessian = m.oracle.expected_hessian(theta, y);
            const InverseInfo inv = inverse_information(*sol.expected_hessian);
            sol.expected_pd = inv.pd;
            sol.inverse_expected = inv.inverse;
        }
        return sol;
    };

    double h = model::h_loglik(m, y, theta, v);

    for (int iter = 1; iter <= 200; ++iter) {
        for (int j = 0; j < p; ++j)
            if (natural_magnitude(m, theta, j) > kThetaBlowup)
                return finalize(SolveStatus::diverged, iter,
                                "theta escaped toward infinity");
        if (v.lpNorm<Eigen::Infinity>() > 1e10)
            return finalize(SolveStatus::no_interior_mode, iter,
                            "v escaped; h has no interior maximum");

        const Vec g = model::h_score(m, y, theta, v);
        if (g.lpNorm<Eigen::Infinity>() < kScoreTol) {
            // quadratic polish, then classify the stationary point
            const Mat H = model::h_hessian(m, y, theta, v);
            Eigen::LDLT<Mat> ldlt(-H);
            if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
                Vec phi(q);
                phi << theta, v;
                const Vec polish = ldlt.solve(g);
                Vec cand_theta = theta + polish.head(p);
                Vec cand_v = v + polish.tail(d);
                if (in_supports(m, cand_theta, cand_v)) {
                    theta = cand_theta;
                    v = cand_v;
                }
                return finalize(SolveStatus::converged, iter, "");
            }
            return finalize(SolveStatus::no_interior_mode, iter,
                            "stationary point is not a local maximum");
        }

        const Mat H = model::h_hessian(m, y, theta, v);
        Vec dir;
        bool newton_ok = false;
        Eigen::LDLT<Mat> ldlt(-H);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
            dir = ldlt.solve(g);
            newton_ok = dir.dot(g) > 0.0;
        }
        if (!newton_ok) dir = g / std::max(1.0, g.lpNorm<Eigen::Infinity>());

        double t = 1.0;
        bool moved = false;
        for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
            const Vec cand_theta = theta + t * dir.head(p);
            const Vec cand_v = v + t * dir.tail(d);
            if (!in_supports(m, cand_theta, cand_v)) continue;
            const double hc = model::h_loglik(m, y, cand_theta, cand_v);
            if (std::isfinite(hc) && hc > h) {
                theta = cand_theta;
                v = cand_v;
                h = hc;
                moved = true;
                break;
            }
        }
        if (!moved || t * dir.lpNorm<Eigen::Infinity>() < kStepTol) {
            // h flat to machine precision: pure Newton polish still contracts
            // the score of a genuinely interior maximum
            Vec gs = model::h_score(m, y, theta, v);
            for (int k = 0; k < 4 && newton_ok; ++k) {
                const Vec cand_theta = theta + dir.head(p);
                const Vec cand_v = v + dir.tail(d);
                if (!in_supports(m, cand_theta, cand_v)) break;
                const Vec g2 = model::h_score(m, y, cand_theta, cand_v);
                if (!(g2.lpNorm<Eigen::Infinity>() < gs.lpNorm<Eigen::Infinity>())) break;
                theta = cand_theta;
                v = cand_v;
                gs = g2;
                if (gs.lpNorm<Eigen::Infinity>() < kScoreTol) break;
                Eigen::LDLT<Mat> ldlt2(-model::h_hessian(m, y, theta, v));
                newton_ok = ldlt2.info() == Eigen::Success && ldlt2.isPositive();
                if (newton_ok) dir = ldlt2.solve(gs);
            }
            if (gs.lpNorm<Eigen::Infinity>() < kScoreTol)
                continue;  // next pass classifies the stationary point
            return finalize(SolveStatus::no_interior_mode, iter,
                            "step collapsed against the support with nonzero score");
        }
    }
    return finalize(SolveStatus::max_iterations, 200, "iteration budget exhausted");
}

Mat expected_hessian_mc(const JointModel& m, const Vec& theta, int n_data, std::size_t n_mc,
                        num::RngStream stream, Mat* se, int jobs) {
    if (!m.sample_v || !m.sample_y_given_v)
        throw InvalidConfig("expected_hessian_mc: model lacks samplers");
    if (n_mc < 2) throw InvalidConfig("expected_hessian_mc: n_mc must be >= 2");
    const int q = m.theta_dim + m.v_dim;

    const auto rows = num::fill_indexed<Vec>(
        n_mc,
        [&](std::size_t i) {
            num::VariateEngine eng = num::engine_for(stream, i);
            const Vec v = m.sample_v(theta, eng);
            const ObservedData y(m.sample_y_given_v(theta, v, n_data, eng));
            const Mat Hn = -model::h_hessian(m, y, theta, v);
            return Vec(Eigen::Map<const Vec>(Hn.data(), q * q));
        },
        jobs);

    Vec mean = Vec::Zero(q * q);
    for (const Vec& r : rows) mean += r;
    mean /= static_cast<double>(n_mc);
    if (se) {
        Vec var = Vec::Zero(q * q);
        for (const Vec& r : rows) var += (r - mean).cwiseAbs2();
        var /= static_cast<double>(n_mc - 1);
        const Vec sev = (var / static_cast<double>(n_mc)).cwiseSqrt();
        *se = Eigen::Map<const Mat>(sev.data(), q, q);
    }
    return Eigen::Map<const Mat>(mean.data(), q, q);
}

Mat expected_hessian_closed(const JointModel& m, const Vec& theta, const ObservedData& y) {
    if (!m.oracle.expected_hessian)
        throw Unsupported("expected_hessian_closed: model declares no closed form");
    return m.oracle.expected_hessian(theta, y);
}

InverseInfo inverse_information(const Mat& info) {
    InverseInfo out;
    Eigen::LLT<Mat> llt(info);
    if (llt.info() != Eigen::Success) return out;
    out.pd = true;
    out.inverse = llt.solve(Mat::Identity(info.rows(), info.cols()));
    return out;
}

double observed_vs_expected(const JointModel& m, const ObservedData& y,
                            const MhleSolution& sol) {
    if (!sol.expected_hessian)
        throw Unsupported("observed_vs_expected: no expected Hessian on this solution");
    const Mat obs = -model::h_hessian(m, y, sol.theta_hat.values, sol.v_hat.values);
    return (obs - *sol.expected_hessian).lpNorm<Eigen::Infinity>();
}

RTermDecomposition r_term_decomposition(const JointModel& m, const ObservedData& y,
                                        const Vec& theta_true, const Vec& v_true,
                                        const MhleSolution& sol,
                                        std::optional<Mat> info_override) {
    Mat info;
    if (info_override) {
        info = *info_override;
    } else if (m.oracle.expected_hessian) {
        info = m.oracle.expected_hessian(theta_true, y);
    } else {
        throw Unsupported("r_term_decomposition: provide I_h or use a model with a closed form");
    }
    const InverseInfo inv = inverse_information(info);
    if (!inv.pd)
        throw HessianNotNegDef("r_term_decomposition: I_h(theta) is not positive definite");

    const int p = m.theta_dim, d = m.v_dim;
    Vec phi_true(p + d), phi_hat(p + d);
    phi_true << theta_true, v_true;
    phi_hat << sol.theta_hat.values, sol.v_hat.values;

    RTermDecomposition out;
    out.leading = *inv.inverse * model::h_score(m, y, theta_true, v_true);
    out.remainder = (phi_hat - phi_true) - out.leading;
    return out;
}

}  // namespace hlik::est
