#include "hlik/prediction/density_grid.hpp"

#include <algorithm>
#include <cmath>

#include "hlik/errors.hpp"

namespace hlik::pred {

namespace {

double pullback(const num::Interval& ax, double t) {
    if (ax.finite()) return ax.lower + t * ax.width();
    if (ax.lower_finite()) return ax.lower + t / (1.0 - t);
    if (ax.upper_finite()) return ax.upper - (1.0 - t) / t;  // increasing in t
    return std::log(t / (1.0 - t));
}

}  // namespace

DensityGrid::DensityGrid(num::Interval support, std::vector<double> nodes,
                         std::vector<double> log_density)
    : support_(support), nodes_(std::move(nodes)), log_density_(std::move(log_density)) {
    if (nodes_.size() != log_density_.size() || nodes_.size() < 2)
        throw InvalidConfig("DensityGrid: need matching nodes/log_density, length >= 2");
    for (std::size_t i = 1; i < nodes_.size(); ++i)
        if (!(nodes_[i] > nodes_[i - 1]))
            throw InvalidConfig("DensityGrid: nodes must be strictly increasing");

    shift_ = *std::max_element(log_density_.begin(), log_density_.end());
    if (!std::isfinite(shift_)) throw NonFinite("DensityGrid: log density has no finite max");
    cum_.resize(nodes_.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        const double f0 = std::exp(log_density_[i - 1] - shift_);
        const double f1 = std::exp(log_density_[i] - shift_);
        acc += 0.5 * (f0 + f1) * (nodes_[i] - nodes_[i - 1]);
        cum_[i] = acc;
    }
    if (!(acc > 0.0)) throw NonFinite("DensityGrid: zero mass on the grid");
    acc_ = acc;
    z_ = acc * std::exp(shift_);
}

double DensityGrid::pdf(int i) const { return std::exp(log_density_[i] - shift_) / acc_; }

double DensityGrid::pdf_at(double x) const {
    if (x < nodes_.front() || x > nodes_.back()) return 0.0;
    if (x == nodes_.front()) return pdf(0);
    if (x == nodes_.back()) return pdf(size() - 1);
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
    const double t = (x - nodes_[i - 1]) / (nodes_[i] - nodes_[i - 1]);
    const double ld = (1.0 - t) * log_density_[i - 1] + t * log_density_[i];
    return std::exp(ld - shift_) / acc_;
}

double DensityGrid::cdf_at(double x) const {
    if (x <= nodes_.front()) return 0.0;
    if (x >= nodes_.back()) return 1.0;
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
    const double x0 = nodes_[i - 1], x1 = nodes_[i];
    const double f0 = std::exp(log_density_[i - 1] - shift_);
    const double f1 = std::exp(log_density_[i] - shift_);
    const double t = (x - x0) / (x1 - x0);
    const double fx = f0 + t * (f1 - f0);
    return (cum_[i - 1] + 0.5 * (f0 + fx) * (x - x0)) / acc_;
}

double DensityGrid::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidConfig("quantile: p must be in [0,1]");
    const double target = p * acc_;
    if (target <= 0.0) return nodes_.front();
    if (target >= cum_.back()) return nodes_.back();
    const auto it = std::lower_bound(cum_.begin(), cum_.end(), target);
    const std::size_t i = static_cast<std::size_t>(it - cum_.begin());
    const double need = target - cum_[i - 1];
    const double x0 = nodes_[i - 1], x1 = nodes_[i];
    const double f0 = std::exp(log_density_[i - 1] - shift_);
    const double f1 = std::exp(log_density_[i] - shift_);
    const double slope = (f1 - f0) / (x1 - x0);
    if (std::abs(slope) < 1e-300) return x0 + need / std::max(f0, 1e-300);
    const double disc = std::max(f0 * f0 + 2.0 * slope * need, 0.0);
    return x0 + (std::sqrt(disc) - f0) / slope;
}

double DensityGrid::trapezoid_mass() const { return cum_.back() / acc_; }

DensityGrid build_density_grid(const std::function<double(double)>& log_f,
                               const num::Interval& support, const GridSpec& spec) {
    if (spec.nodes < 16) throw InvalidConfig("build_density_grid: too few nodes");

    // pilot scan over the pulled-back unit grid
    const int K = 513;
    double best_t = 0.5, best = -num::inf;
    for (int k = 0; k < K; ++k) {
        const double t = (k + 0.5) / K;
        const double x = pullback(support, t);
        const double v = log_f(x);
        if (std::isfinite(v) && v > best) {
            best = v;
            best_t = t;
        }
    }
    if (!std::isfinite(best))
        throw NonFinite("build_density_grid: log density is -inf everywhere on the scan");

    // golden-section refinement between the scan neighbors
    double a = pullback(support, std::max(best_t - 1.5 / K, 1e-12));
    double b = pullback(support, std::min(best_t + 1.5 / K, 1.0 - 1e-12));
    const double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = log_f(x1), f2 = log_f(x2);
    for (int it = 0; it < 80 && (b - a) > 1e-12 * std::max(1.0, std::abs(a)); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = log_f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = log_f(x1);
        }
    }
    const double mode = 0.5 * (a + b);
    const double fmode = log_f(mode);

    // curvature -> pilot normal scale
    const double h = 1e-3 * std::max(1.0, std::abs(mode));
    double curv = -(log_f(mode + h) - 2.0 * fmode + log_f(mode - h)) / (h * h);
    if (!(curv > 0.0)) curv = 1.0;
    const double s = 1.0 / std::sqrt(curv);

    // initial bracket from the pilot normal, then expand each free end until
    // a local exponential tail bound clears the coverage target
    const double z0 = std::sqrt(-2.0 * std::log(spec.tail_mass / 2.0)) + 1.0;
    double lo = mode - z0 * s, hi = mode + z0 * s;
    const bool lo_clipped = support.lower_finite();
    const bool hi_clipped = support.upper_finite();
    if (lo_clipped) lo = std::max(lo, support.lower);
    if (hi_clipped) hi = std::min(hi, support.upper);

    const double tail_target = 0.5 * spec.tail_mass * s;  // vs mass scale f(mode)*s
    const auto tail_small = [&](double edge, bool upper) {
        const double fe = log_f(edge);
        if (!std::isfinite(fe)) return true;  // already past the density cliff
        const double step = 1e-4 * std::max(1.0, std::abs(edge));
        const double g = (log_f(edge + step) - log_f(edge - step)) / (2.0 * step);
        const double out_slope = upper ? -g : g;
        if (out_slope <= 0.0) return false;
        return std::exp(fe - fmode) / out_slope < tail_target;
    };

    for (int grow = 0;; ++grow) {
        bool ok = true;
        if (!(lo_clipped && lo <= support.lower) && !tail_small(lo, false)) {
            lo = mode - (mode - lo) * 1.5;
            if (lo_clipped) lo = std::max(lo, support.lower);
            ok = false;
        }
        if (!(hi_clipped && hi >= support.upper) && !tail_small(hi, true)) {
            hi = mode + (hi - mode) * 1.5;
            if (hi_clipped) hi = std::min(hi, support.upper);
            ok = false;
        }
        if (ok) break;
        if (grow >= 300)
            throw NonConvergent(
                "build_density_grid: density does not decay; cannot cover the "
                "required mass (is it normalizable?)");
    }

    std::vector<double> nodes(spec.nodes), logd(spec.nodes);
    for (int i = 0; i < spec.nodes; ++i) {
        nodes[i] = lo + (hi - lo) * i / (spec.nodes - 1);
        const double v = log_f(nodes[i]);
        logd[i] = std::isfinite(v) ? v : fmode - 745.0;  // -inf as hard zero
    }
    return DensityGrid(support, std::move(nodes), std::move(logd));
}

}  // namespace hlik::pred
