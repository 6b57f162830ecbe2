#include "hlik/prediction/predictive.hpp"

#include <algorithm>
#include <cmath>

#include "hlik/numeric/parallel.hpp"
#include "hlik/numeric/quadrature.hpp"

namespace hlik::pred {

namespace {

// dense node pass with deterministic parallel fill
DensityGrid grid_over(const std::function<double(double)>& log_f, const num::Interval& support,
                      const GridSpec& spec, int jobs) {
    // bracket via the generic builder on a coarse spec, then refill densely
    GridSpec pilot = spec;
    pilot.nodes = 257;
    const DensityGrid coarse = build_density_grid(log_f, support, pilot);
    const double lo = coarse.nodes().front(), hi = coarse.nodes().back();
    std::vector<double> nodes(spec.nodes);
    for (int i = 0; i < spec.nodes; ++i)
        nodes[i] = lo + (hi - lo) * i / (spec.nodes - 1);
    const auto logd = num::fill_indexed<double>(
        spec.nodes, [&](std::size_t i) { return log_f(nodes[i]); }, jobs);
    std::vector<double> clean(logd.begin(), logd.end());
    const double fmode = *std::max_element(clean.begin(), clean.end());
    for (double& v : clean)
        if (!std::isfinite(v)) v = fmode - 745.0;
    return DensityGrid(support, std::move(nodes), std::move(clean));
}

}  // namespace

JointModel in_param_scale(const JointModel& m, ParamScale scale) {
    const bool is_log = m.theta_scales.front() == ParamScale::log;
    if ((scale == ParamScale::log) == is_log) return m;
    if (scale == ParamScale::log) return model::with_log_parameter(m);
    throw InvalidConfig("in_param_scale: cannot return a log-scale model to natural scale");
}

Vec profile_theta(const JointModel& m, const ObservedData& y, const Vec& v) {
    if (m.oracle.profile_theta) return m.oracle.profile_theta(y, v);

    const int p = m.theta_dim;
    Vec theta = m.init_theta ? m.init_theta(y) : Vec::Constant(p, 1.0);
    double h = model::h_loglik(m, y, theta, v);
    for (int iter = 0; iter < 400; ++iter) {
        Vec g = model::h_score(m, y, theta, v).head(p);
        if (g.lpNorm<Eigen::Infinity>() < 1e-10) return theta;
        const Mat H = model::h_hessian(m, y, theta, v).topLeftCorner(p, p);
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
        for (int bt = 0; bt < 50; ++bt, t *= 0.5) {
            const Vec cand = theta + t * dir;
            if (!m.in_theta_support(cand) || !m.in_v_support(cand, v)) continue;
            const double hc = model::h_loglik(m, y, cand, v);
            if (std::isfinite(hc) && hc > h) {
                theta = cand;
                h = hc;
                moved = true;
                break;
            }
        }
        if (!moved) {
            // h is flat to machine precision here; pure Newton polish steps
            // still contract the score quadratically
            for (int k = 0; k < 4 && newton_ok; ++k) {
                const Vec cand = theta + dir;
                if (!m.in_theta_support(cand) || !m.in_v_support(cand, v)) break;
                const Vec g2 = model::h_score(m, y, cand, v).head(p);
                if (!(g2.lpNorm<Eigen::Infinity>() < g.lpNorm<Eigen::Infinity>())) break;
                theta = cand;
                g = g2;
                if (g.lpNorm<Eigen::Infinity>() < 1e-10) break;
                const Mat H2 = model::h_hessian(m, y, theta, v).topLeftCorner(p, p);
                Eigen::LDLT<Mat> ldlt2(-H2);
                newton_ok = ldlt2.info() == Eigen::Success && ldlt2.isPositive();
                if (newton_ok) dir = ldlt2.solve(g);
            }
            if (g.lpNorm<Eigen::Infinity>() < 1e-8) return theta;
            throw NonConvergent("profile_theta: inner maximization stalled");
        }
    }
    throw NonConvergent("profile_theta: iteration budget exhausted");
}

double profile_curvature(const JointModel& m, const ObservedData& y, const Vec& v,
                         const Vec& theta_profile) {
    if (m.oracle.profile_curvature) return m.oracle.profile_curvature(y, v);
    const int p = m.theta_dim;
    const Mat Hneg = -model::h_hessian(m, y, theta_profile, v).topLeftCorner(p, p);
    Eigen::LLT<Mat> llt(Hneg);
    if (llt.info() != Eigen::Success)
        throw HessianNotNegDef("aphl: profiled curvature D is not positive");
    double log_det = 0.0;
    for (int j = 0; j < p; ++j) log_det += 2.0 * std::log(llt.matrixL()(j, j));
    return std::exp(log_det);
}

namespace {

double aphl_in(const JointModel& wm, const ObservedData& y, const Vec& v) {
    const Vec th = profile_theta(wm, y, v);
    const double d = profile_curvature(wm, y, v, th);
    return model::h_loglik(wm, y, th, v) - 0.5 * std::log(d);
}

}  // namespace

double aphl(const JointModel& m, const ObservedData& y, const Vec& v, ParamScale scale) {
    return aphl_in(in_param_scale(m, scale), y, v);
}

HDistribution h_distribution(const JointModel& m, const ObservedData& y, ParamScale scale,
                             const GridSpec& spec, int jobs) {
    if (m.v_dim != 1)
        throw Unsupported("h_distribution: grids are built for scalar v only");
    const JointModel wm = in_param_scale(m, scale);
    const num::Interval v_support = wm.support_v(wm.init_theta(y)).axes[0];

    const auto log_f = [&](double v) { return aphl_in(wm, y, Vec::Constant(1, v)); };
    DensityGrid v_grid = grid_over(log_f, v_support, spec, jobs);

    // pushforward to the canonical scale, sampled finer so the r-grid's own
    // trapezoid normalization stays within tolerance on heavy tails
    HDistribution out{v_grid, v_grid, scale};
    if (wm.predictive.to_r && wm.predictive.dv_dr) {
        const auto& pv = wm.predictive;
        const double vlo = v_grid.nodes().front(), vhi = v_grid.nodes().back();
        const int nr = (spec.nodes - 1) * 10 + 1;
        std::vector<double> r_nodes(nr);
        for (int i = 0; i < nr; ++i) {
            const double v = vlo + (vhi - vlo) * i / (nr - 1);
            r_nodes[i] = pv.to_r(v, y);
        }
        const bool increasing = r_nodes.back() > r_nodes.front();
        if (!increasing) std::reverse(r_nodes.begin(), r_nodes.end());
        const auto r_logd = num::fill_indexed<double>(
            nr,
            [&](std::size_t i) {
                const double r = r_nodes[i];
                const double v = pv.from_r(r, y);
                return aphl_in(wm, y, Vec::Constant(1, v)) +
                       std::log(std::abs(pv.dv_dr(r, y)));
            },
            jobs);
        out.r_grid = DensityGrid(pv.r_support(y), std::move(r_nodes),
                                 std::vector<double>(r_logd.begin(), r_logd.end()));
    }
    return out;
}

RDensity pivotal_predictive(const JointModel& m, const ObservedData& y) {
    if (!m.predictive.pivotal_log_density)
        throw Unsupported("pivotal_predictive: no known predictive pivot for model '" +
                          m.name + "'");
    RDensity d;
    d.support = m.predictive.r_support ? m.predictive.r_support(y)
                                       : num::Interval::real_line();
    const auto f = m.predictive.pivotal_log_density;
    d.log_pdf = [f, y](double r) { return f(r, y); };
    d.closed_form = true;
    if (m.predictive.pivotal_hdp_c) {
        const auto c = m.predictive.pivotal_hdp_c;
        d.hdp_upper = [c, y](double alpha) { return c(alpha, y); };
    }
    return d;
}

RDensity posterior_predictive_flat(const JointModel& m, const ObservedData& y, FlatPrior prior,
                                   const GridSpec& spec, int jobs) {
    const bool log_prior = prior == FlatPrior::log_scale;
    if (m.predictive.posterior_log_density) {
        RDensity d;
        d.support = m.predictive.r_support ? m.predictive.r_support(y)
                                           : num::Interval::real_line();
        const auto f = m.predictive.posterior_log_density;
        const double probe = d.support.finite()
                                 ? 0.5 * (d.support.lower + d.support.upper)
                                 : (d.support.lower_finite() ? d.support.lower + 1.0 : 0.0);
        f(probe, y, log_prior);  // surfaces ImproperPosterior immediately
        d.log_pdf = [f, y, log_prior](double r) { return f(r, y, log_prior); };
        d.closed_form = true;
        if (m.predictive.posterior_hdp_c) {
            const auto c = m.predictive.posterior_hdp_c;
            d.hdp_upper = [c, y, log_prior](double alpha) { return c(alpha, y, log_prior); };
        }
        return d;
    }

    // generic route: integrate e^h over theta on the prior's working scale,
    // in profile-centered curvature-scaled coordinates so the bump always
    // has unit scale regardless of where it sits
    const JointModel wm =
        in_param_scale(m, log_prior ? ParamScale::log : ParamScale::natural);
    if (wm.theta_dim != 1 || wm.v_dim != 1)
        throw Unsupported("posterior_predictive_flat: generic route needs scalar theta and v");
    const num::Interval th_support = wm.support_theta.axes[0];
    num::QuadratureSpec qspec;

    const auto log_f = [&](double v) {
        const Vec vv = Vec::Constant(1, v);
        const Vec thp = profile_theta(wm, y, vv);
        const double shift = model::h_loglik(wm, y, thp, vv);
        const double width = 1.0 / std::sqrt(profile_curvature(wm, y, vv, thp));
        const auto integrand = [&](double s) {
            const Vec t = Vec::Constant(1, thp[0] + width * s);
            if (!wm.in_theta_support(t)) return 0.0;
            return std::exp(wm.log_cond(t, vv, y) + wm.log_marg_v(t, vv) - shift);
        };
        const num::Interval s_support((th_support.lower - thp[0]) / width,
                                      (th_support.upper - thp[0]) / width);
        const auto rq = num::integrate(integrand, s_support, qspec);
        return shift + std::log(width) + std::log(std::max(rq.value, 1e-300));
    };

    const num::Interval v_support = wm.support_v(wm.init_theta(y)).axes[0];
    DensityGrid v_grid = grid_over(log_f, v_support, spec, jobs);

    RDensity d;
    d.closed_form = false;
    if (wm.predictive.to_r && wm.predictive.dv_dr) {
        const auto& pv = wm.predictive;
        std::vector<double> r_nodes(v_grid.size());
        std::vector<double> r_logd(v_grid.size());
        for (int i = 0; i < v_grid.size(); ++i) {
            r_nodes[i] = pv.to_r(v_grid.nodes()[i], y);
            r_logd[i] = v_grid.log_density()[i] + std::log(std::abs(pv.dv_dr(r_nodes[i], y)));
        }
        d.support = pv.r_support(y);
        d.grid = std::make_shared<DensityGrid>(d.support, std::move(r_nodes),
                                               std::move(r_logd));
    } else {
        d.support = v_support;
        d.grid = std::make_shared<DensityGrid>(std::move(v_grid));
    }
    const auto g = d.grid;
    d.log_pdf = [g](double r) {
        const double p = g->pdf_at(r);
        return p > 0.0 ? std::log(p) : -num::inf;
    };
    return d;
}

HdpInterval hdp_interval(const DensityGrid& g, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw InvalidConfig("hdp_interval: alpha must be in (0, 1]");
    const int n = g.size();
    std::vector<double> f(n);
    double fmax = 0.0;
    int imax = 0;
    for (int i = 0; i < n; ++i) {
        f[i] = g.pdf(i);
        if (f[i] > fmax) {
            fmax = f[i];
            imax = i;
        }
    }
    HdpInterval out;
    out.level = 1.0 - alpha;
    if (alpha == 1.0) {
        out.intervals = {{g.nodes()[imax], g.nodes()[imax]}};
        return out;
    }

    const auto mass_above = [&](double t) {
        double mass = 0.0;
        for (int i = 1; i < n; ++i) {
            const double x0 = g.nodes()[i - 1], x1 = g.nodes()[i];
            const double f0 = f[i - 1], f1 = f[i];
            if (f0 >= t && f1 >= t) {
                mass += 0.5 * (f0 + f1) * (x1 - x0);
            } else if (f0 >= t || f1 >= t) {
                const double xi = x0 + (t - f0) / (f1 - f0) * (x1 - x0);
                if (f0 >= t)
                    mass += 0.5 * (f0 + t) * (xi - x0);
                else
                    mass += 0.5 * (t + f1) * (x1 - xi);
            }
        }
        return mass;
    };

    double lo_t = 0.0, hi_t = fmax;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo_t + hi_t);
        if (mass_above(mid) >= 1.0 - alpha)
            lo_t = mid;
        else
            hi_t = mid;
    }
    const double t = lo_t;

    for (int i = 0; i < n; ++i) {
        const bool in = f[i] >= t;
        const bool prev_in = i > 0 && f[i - 1] >= t;
        if (in && (i == 0 || !prev_in)) {
            double start = g.nodes()[i];
            if (i > 0) start = g.nodes()[i - 1] +
                               (t - f[i - 1]) / (f[i] - f[i - 1]) *
                                   (g.nodes()[i] - g.nodes()[i - 1]);
            out.intervals.emplace_back(start, start);
        }
        if (prev_in && !in) {
            out.intervals.back().second =
                g.nodes()[i - 1] +
                (t - f[i - 1]) / (f[i] - f[i - 1]) * (g.nodes()[i] - g.nodes()[i - 1]);
        } else if (in && i == n - 1) {
            out.intervals.back().second = g.nodes()[i];
        }
    }
    if (out.intervals.empty()) out.intervals = {{g.nodes()[imax], g.nodes()[imax]}};
    return out;
}

HdpInterval hdp_interval(const RDensity& d, double alpha, const GridSpec& spec) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw InvalidConfig("hdp_interval: alpha must be in (0, 1]");
    if (d.hdp_upper) {
        HdpInterval out;
        out.level = 1.0 - alpha;
        const double c = (*d.hdp_upper)(alpha);
        out.c = c;
        out.intervals = {{d.support.lower_finite() ? d.support.lower : -num::inf, c}};
        return out;
    }
    if (d.grid) return hdp_interval(*d.grid, alpha);
    const DensityGrid g = build_density_grid(d.log_pdf, d.support, spec);
    return hdp_interval(g, alpha);
}

PredictiveTriple compare_triple(const JointModel& m, const ObservedData& y, ParamScale scale,
                                const GridSpec& spec, int jobs) {
    PredictiveTriple out{
        h_distribution(m, y, scale, spec, jobs), pivotal_predictive(m, y),
        posterior_predictive_flat(
            m, y, scale == ParamScale::log ? FlatPrior::log_scale : FlatPrior::natural_scale,
            spec, jobs),
        scale, TripleDistances{}};

    const DensityGrid& rg = out.h_dist.r_grid;
    double tv_hp = 0.0, tv_hq = 0.0, tv_pq = 0.0;
    for (int i = 0; i < rg.size(); ++i) {
        const double r = rg.nodes()[i];
        const double fh = rg.pdf(i);
        const double fp = std::exp(out.pivotal.log_pdf(r));
        const double fq = std::exp(out.posterior.log_pdf(r));
        out.distances.sup_h_pivotal = std::max(out.distances.sup_h_pivotal, std::abs(fh - fp));
        out.distances.sup_h_posterior =
            std::max(out.distances.sup_h_posterior, std::abs(fh - fq));
        out.distances.sup_pivotal_posterior =
            std::max(out.distances.sup_pivotal_posterior, std::abs(fp - fq));
        if (i > 0) {
            const double w = 0.5 * (rg.nodes()[i] - rg.nodes()[i - 1]);
            const double r0 = rg.nodes()[i - 1];
            const double fh0 = rg.pdf(i - 1);
            const double fp0 = std::exp(out.pivotal.log_pdf(r0));
            const double fq0 = std::exp(out.posterior.log_pdf(r0));
            tv_hp += w * (std::abs(fh - fp) + std::abs(fh0 - fp0));
            tv_hq += w * (std::abs(fh - fq) + std::abs(fh0 - fq0));
            tv_pq += w * (std::abs(fp - fq) + std::abs(fp0 - fq0));
        }
    }
    out.distances.tv_h_pivotal = 0.5 * tv_hp;
    out.distances.tv_h_posterior = 0.5 * tv_hq;
    out.distances.tv_pivotal_posterior = 0.5 * tv_pq;
    return out;
}

}  // namespace hlik::pred
