#include "hlik/sim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "hlik/estimation/mhle.hpp"
#include "hlik/numeric/parallel.hpp"
#include "hlik/numeric/special.hpp"

namespace hlik::sim {

using model::JointModel;
using model::ObservedData;

void ExperimentConfig::validate() const {
    if (replications < 100) throw InvalidConfig("ExperimentConfig: replications must be >= 100");
    if (n < 1) throw InvalidConfig("ExperimentConfig: n must be >= 1");
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0))
            throw InvalidConfig("ExperimentConfig: alpha levels must lie in (0, 1)");
    if (methods.empty()) throw InvalidConfig("ExperimentConfig: no methods selected");
    if (mc_draws < 2) throw InvalidConfig("ExperimentConfig: mc_draws must be >= 2");
}

namespace {

struct Replicate {
    std::vector<double> y;
    double v_future = 0.0;  // on the model's v scale
};

Replicate draw_replicate(const JointModel& m, const Vec& theta, int n,
                         num::RngStream stream, std::size_t idx) {
    num::VariateEngine eng = num::engine_for(stream, idx);
    Replicate rep;
    const Vec v = m.sample_v(theta, eng);
    rep.v_future = v[0];
    rep.y = m.sample_y_given_v(theta, v, n, eng);
    return rep;
}

double variance_se(const std::vector<double>& centered_sq, double var) {
    // SE of the sample variance via its fourth-moment expression
    double acc = 0.0;
    for (double s : centered_sq) acc += (s - var) * (s - var);
    const double nn = static_cast<double>(centered_sq.size());
    return std::sqrt(acc / (nn - 1.0) / nn);
}

}  // namespace

CoverageResult run_coverage(const ExperimentConfig& cfg) {
    cfg.validate();
    const JointModel m = model::make_model(cfg.model);
    const Vec theta = Vec::Constant(1, cfg.theta_true);
    if (!m.sample_v || !m.sample_y_given_v)
        throw InvalidConfig("run_coverage: model lacks samplers");

    // validate method availability up front, outside the replicate loop
    for (const std::string& method : cfg.methods) {
        if (method == "pivotal") {
            if (!m.predictive.pivotal_hdp_c)
                throw InvalidConfig("run_coverage: no pivotal interval for model '" +
                                    cfg.model + "'");
        } else if (method == "posterior-flat") {
            if (!m.predictive.posterior_hdp_c)
                throw InvalidConfig("run_coverage: no posterior interval for model '" +
                                    cfg.model + "'");
            const ObservedData probe(std::vector<double>(cfg.n, 1.0));
            m.predictive.posterior_hdp_c(0.5, probe, false);  // ImproperPosterior at n=1
        } else if (method == "hessian-normal") {
            if (!m.oracle.exact_mhle || !m.oracle.expected_hessian)
                throw InvalidConfig("run_coverage: hessian-normal needs model closed forms");
        } else if (method != "aphl") {
            throw InvalidConfig("run_coverage: unknown method '" + method + "'");
        }
    }

    const bool want_aphl =
        std::find(cfg.methods.begin(), cfg.methods.end(), "aphl") != cfg.methods.end();

    struct RepOutcome {
        // per (method, alpha): cover flag and width (observation scale)
        std::vector<unsigned char> cover;
        std::vector<double> width;
    };
    const std::size_t n_methods = cfg.methods.size();
    const std::size_t n_cells = n_methods * cfg.alphas.size();
    const num::RngStream stream{cfg.seed, 0};

    // the hessian-normal variance entry tau_v^2 from the inverse expected
    // Hessian is data-free for the built-ins; fetch it once per replicate
    // from the model oracle at the replicate's MHLE
    const auto outcomes = num::fill_indexed<RepOutcome>(
        cfg.replications,
        [&](std::size_t i) {
            const Replicate rep = draw_replicate(m, theta, cfg.n, stream, i);
            const ObservedData y(rep.y);
            RepOutcome out;
            out.cover.assign(n_cells, 0);
            out.width.assign(n_cells, 0.0);

            // future value on the observation scale (u = inverse of the v
            // transform for the exponential log model; v itself for normal)
            const bool log_v = m.v_scale == model::VScale::log;
            const double u_future = log_v ? std::exp(rep.v_future) : rep.v_future;

            std::optional<pred::HDistribution> hd;
            if (want_aphl) {
                pred::GridSpec gs;
                gs.nodes = 513;
                hd = pred::h_distribution(m, y, m.theta_scales[0], gs, 1);
            }

            for (std::size_t mi = 0; mi < n_methods; ++mi) {
                const std::string& method = cfg.methods[mi];
                for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
                    const double alpha = cfg.alphas[ai];
                    const std::size_t cell = mi * cfg.alphas.size() + ai;
                    double lo_u = 0.0, hi_u = 0.0;
                    if (method == "pivotal") {
                        lo_u = 0.0;
                        hi_u = m.predictive.pivotal_hdp_c(alpha, y) * y.mean();
                    } else if (method == "posterior-flat") {
                        lo_u = 0.0;
                        hi_u = m.predictive.posterior_hdp_c(alpha, y, false) * y.mean();
                    } else if (method == "aphl") {
                        const pred::HdpInterval h = pred::hdp_interval(hd->r_grid, alpha);
                        lo_u = h.lo() * y.mean();
                        hi_u = h.hi() * y.mean();
                    } else {  // hessian-normal
                        const auto [th_hat, v_hat] = m.oracle.exact_mhle(y);
                        const auto inv = est::inverse_information(
                            m.oracle.expected_hessian(th_hat, y));
                        if (!inv.pd)
                            throw HessianNotNegDef(
                                "run_coverage: expected Hessian not PD for hessian-normal");
                        const double tau = std::sqrt((*inv.inverse)(1, 1));
                        const double z = num::normal_quantile(1.0 - alpha / 2.0);
                        const double vlo = v_hat[0] - z * tau, vhi = v_hat[0] + z * tau;
                        const bool cover = rep.v_future >= vlo && rep.v_future <= vhi;
                        out.cover[cell] = cover ? 1 : 0;
                        out.width[cell] =
                            log_v ? std::exp(vhi) - std::exp(vlo) : vhi - vlo;
                        continue;
                    }
                    out.cover[cell] = (u_future >= lo_u && u_future <= hi_u) ? 1 : 0;
                    out.width[cell] = hi_u - lo_u;
                }
            }
            return out;
        },
        cfg.jobs);

    CoverageResult res;
    res.n = cfg.n;
    res.replications = cfg.replications;
    for (std::size_t mi = 0; mi < n_methods; ++mi) {
        for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
            const std::size_t cell = mi * cfg.alphas.size() + ai;
            double covered = 0.0, wsum = 0.0;
            for (const auto& o : outcomes) {
                covered += o.cover[cell];
                wsum += o.width[cell];
            }
            const double N = static_cast<double>(cfg.replications);
            MethodCoverage row;
            row.method = cfg.methods[mi];
            row.alpha = cfg.alphas[ai];
            row.coverage = covered / N;
            row.se = std::sqrt(row.coverage * (1.0 - row.coverage) / N);
            row.mean_width = wsum / N;
            res.rows.push_back(std::move(row));
        }
    }
    return res;
}

RTermStudy r_term_study(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.model != "exp-future-log")
        throw InvalidConfig("r_term_study: defined for the exp-future-log model");
    const double lambda = cfg.theta_true;

    RTermStudy study;
    study.z_density_at_one = 1.0;  // e^{z-1} at z = 1
    study.normal_density_at_one = num::normal_pdf(1.0);
    study.density_ratio = study.z_density_at_one / study.normal_density_at_one;

    std::vector<int> ns = cfg.n_grid.empty() ? std::vector<int>{cfg.n} : cfg.n_grid;
    std::uint64_t sub = 0;
    for (int n : ns) {
        const num::RngStream stream{cfg.seed, 1000 + sub++};
        const std::size_t N = cfg.mc_draws;
        struct Draw {
            double r, z, logu, rlimit;
        };
        const auto draws = num::fill_indexed<Draw>(
            N,
            [&](std::size_t i) {
                num::VariateEngine eng = num::engine_for(stream, i);
                double s = 0.0;
                for (int k = 0; k < n; ++k) s += eng.exponential(lambda);
                const double ybar = s / n;
                const double u = eng.exponential(lambda);
                const double xi = u / lambda;
                Draw d;
                d.r = (std::log(ybar / lambda) - (ybar - lambda) / lambda) -
                      (std::log(u / lambda) - (u - lambda) / lambda);
                d.z = (ybar - u) / lambda;
                d.logu = std::log(u);
                d.rlimit = xi - 1.0 - std::log(xi);
                return d;
            },
            cfg.jobs);

        RTermRow row;
        row.n = n;
        row.draws = N;
        double mr = 0.0, mz = 0.0, ml = 0.0, mrl = 0.0;
        for (const auto& d : draws) {
            mr += d.r;
            mz += d.z;
            ml += d.logu;
            mrl += d.rlimit;
        }
        const double Nd = static_cast<double>(N);
        mr /= Nd;
        mz /= Nd;
        ml /= Nd;
        mrl /= Nd;
        double vr = 0.0, vz = 0.0, vl = 0.0, vrl = 0.0;
        std::vector<double> centered_sq_logu(N);
        for (std::size_t i = 0; i < N; ++i) {
            const auto& d = draws[i];
            vr += (d.r - mr) * (d.r - mr);
            vz += (d.z - mz) * (d.z - mz);
            centered_sq_logu[i] = (d.logu - ml) * (d.logu - ml);
            vl += centered_sq_logu[i];
            vrl += (d.rlimit - mrl) * (d.rlimit - mrl);
        }
        vr /= (Nd - 1.0);
        vz /= (Nd - 1.0);
        vl /= (Nd - 1.0);
        vrl /= (Nd - 1.0);
        row.mean_r = mr;
        row.se_mean_r = std::sqrt(vr / Nd);
        row.var_r = vr;
        row.mean_z = mz;
        row.var_z = vz;
        row.var_log_future = vl;
        row.se_var_log_future = variance_se(centered_sq_logu, vl);
        row.mean_r_limit = mrl;
        row.se_mean_r_limit = std::sqrt(vrl / Nd);
        study.rows.push_back(row);
    }
    return study;
}

DualityResult duality_check(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.model != "exp-future-log")
        throw InvalidConfig("duality_check: defined for the exp-future-log model");
    const double lambda = cfg.theta_true;

    DualityResult res;
    std::vector<int> ns = cfg.n_grid.empty() ? std::vector<int>{cfg.n} : cfg.n_grid;
    std::uint64_t sub = 0;
    for (int n : ns) {
        if (n < 2)
            throw ImproperPosterior("duality_check: flat-lambda posterior needs n >= 2");
        const num::RngStream stream{cfg.seed, 2000 + sub++};
        const std::size_t N = cfg.mc_draws;
        struct Draw {
            double log_ybar, log_u;
        };
        const auto draws = num::fill_indexed<Draw>(
            N,
            [&](std::size_t i) {
                num::VariateEngine eng = num::engine_for(stream, i);
                double s = 0.0;
                for (int k = 0; k < n; ++k) s += eng.exponential(lambda);
                return Draw{std::log(s / n), std::log(eng.exponential(lambda))};
            },
            cfg.jobs);

        const double Nd = static_cast<double>(N);
        double m_e = 0.0, m_tau = 0.0, m_tot = 0.0;
        for (const auto& d : draws) {
            m_e += d.log_ybar;
            m_tau += d.log_u;
            m_tot += d.log_ybar - d.log_u;
        }
        m_e /= Nd;
        m_tau /= Nd;
        m_tot /= Nd;
        double v_e = 0.0, v_tau = 0.0, v_tot = 0.0;
        std::vector<double> cs_e(N), cs_tau(N), cs_tot(N);
        for (std::size_t i = 0; i < N; ++i) {
            const auto& d = draws[i];
            cs_e[i] = (d.log_ybar - m_e) * (d.log_ybar - m_e);
            cs_tau[i] = (d.log_u - m_tau) * (d.log_u - m_tau);
            const double t = d.log_ybar - d.log_u - m_tot;
            cs_tot[i] = t * t;
            v_e += cs_e[i];
            v_tau += cs_tau[i];
            v_tot += cs_tot[i];
        }
        v_e /= (Nd - 1.0);
        v_tau /= (Nd - 1.0);
        v_tot /= (Nd - 1.0);

        DualityRow row;
        row.n = n;
        row.draws = N;
        // posterior side under the flat lambda prior: E[tau|y] = pi^2/6 and
        // V[e|y] = V(log lambda | y) = trigamma(n - 1)
        row.post_mean_term = num::pi_sq_over_6;
        row.post_var_term = num::trigamma(n - 1.0);
        row.post_total = row.post_mean_term + row.post_var_term;
        // sampling side: tau(theta; y) = V(log y_{n+1}) estimated by MC,
        // e(theta; y) = log ybar - log lambda + gamma
        row.samp_mean_term = v_tau;
        row.samp_mean_se = variance_se(cs_tau, v_tau);
        row.samp_var_term = v_e;
        row.samp_var_se = variance_se(cs_e, v_e);
        row.samp_total = v_tot;
        row.samp_total_se = variance_se(cs_tot, v_tot);
        row.consistency_gap = row.samp_total - row.samp_mean_term - row.samp_var_term;
        row.gap_mean = row.samp_mean_term - row.post_mean_term;
        row.gap_var = row.samp_var_term - row.post_var_term;
        res.rows.push_back(row);
    }
    return res;
}

ScaleStudy scale_sensitivity_study(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.model != "exp-future-log")
        throw InvalidConfig("scale_sensitivity_study: defined for the exp-future-log model");

    ScaleStudy study;
    std::vector<int> ns = cfg.n_grid.empty() ? std::vector<int>{cfg.n} : cfg.n_grid;
    std::uint64_t sub = 0;
    for (int n : ns) {
        // one seeded dataset per n, shared across the two parameter scales
        num::VariateEngine eng = num::engine_for(num::RngStream{cfg.seed, 3000 + sub++});
        std::vector<double> obs(n);
        for (double& o : obs) o = eng.exponential(cfg.theta_true);
        const ObservedData y(obs);

        for (const bool log_scale : {false, true}) {
            ScaleRow row;
            row.param_scale = log_scale ? "log-lambda" : "lambda";
            row.n = n;
            try {
                const JointModel m = model::exponential_future(
                    model::UScale::log_u,
                    log_scale ? model::ThetaScale::log_lambda : model::ThetaScale::lambda);
                const pred::PredictiveTriple triple = pred::compare_triple(
                    m, y, log_scale ? model::ParamScale::log : model::ParamScale::natural,
                    pred::GridSpec{}, cfg.jobs);
                row.distances = triple.distances;
                row.status = "ok";
            } catch (const ImproperPosterior&) {
                row.status = "ImproperPosterior";
            } catch (const NonConvergent&) {
                row.status = "NotNormalizable";
            }
            study.rows.push_back(std::move(row));
        }
    }
    return study;
}

}  // namespace hlik::sim
