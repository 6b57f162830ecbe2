#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "hlik/errors.hpp"

namespace hlik::num {

// Truncation/round-off balance: eps^(1/3) for first differences,
// eps^(1/4) for second differences, both scaled by max(1, |x_i|).
inline double default_gradient_step() {
    return std::cbrt(std::numeric_limits<double>::epsilon());
}

inline double default_hessian_step() {
    return std::pow(std::numeric_limits<double>::epsilon(), 0.25);
}

namespace detail {
inline double checked(double v, const char* what) {
    if (!std::isfinite(v)) throw NonFinite(std::string(what) + ": non-finite evaluation");
    return v;
}
}  // namespace detail

// Central-difference gradient, error O(step^2).
template <typename F>
Eigen::VectorXd gradient(F&& f, const Eigen::VectorXd& x, double step = 0.0) {
    if (step <= 0.0) step = default_gradient_step();
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd g(n);
    Eigen::VectorXd xp = x, xm = x;
    for (int i = 0; i < n; ++i) {
        const double h = step * std::max(1.0, std::abs(x[i]));
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        const double fp = detail::checked(f(xp), "gradient");
        const double fm = detail::checked(f(xm), "gradient");
        g[i] = (fp - fm) / (2.0 * h);
        xp[i] = x[i];
        xm[i] = x[i];
    }
    return g;
}

// Central second differences; output symmetrized exactly.
template <typename F>
Eigen::MatrixXd hessian(F&& f, const Eigen::VectorXd& x, double step = 0.0) {
    if (step <= 0.0) step = default_hessian_step();
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd h(n);
    for (int i = 0; i < n; ++i) h[i] = step * std::max(1.0, std::abs(x[i]));

    const double f0 = detail::checked(f(x), "hessian");
    Eigen::MatrixXd H(n, n);
    Eigen::VectorXd xt = x;
    for (int i = 0; i < n; ++i) {
        xt[i] = x[i] + h[i];
        const double fpp = detail::checked(f(xt), "hessian");
        xt[i] = x[i] - h[i];
        const double fmm = detail::checked(f(xt), "hessian");
        xt[i] = x[i];
        H(i, i) = (fpp - 2.0 * f0 + fmm) / (h[i] * h[i]);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            xt[i] = x[i] + h[i];
            xt[j] = x[j] + h[j];
            const double fpp = detail::checked(f(xt), "hessian");
            xt[j] = x[j] - h[j];
            const double fpm = detail::checked(f(xt), "hessian");
            xt[i] = x[i] - h[i];
            const double fmm = detail::checked(f(xt), "hessian");
            xt[j] = x[j] + h[j];
            const double fmp = detail::checked(f(xt), "hessian");
            xt[i] = x[i];
            xt[j] = x[j];
            const double v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            H(i, j) = v;
            H(j, i) = v;
        }
    }
    return H;
}

}  // namespace hlik::num
