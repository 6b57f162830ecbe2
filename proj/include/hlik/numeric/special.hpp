#pragma once

namespace hlik::num {

inline constexpr double euler_gamma = 0.57721566490153286061;
inline constexpr double pi_sq_over_6 = 1.6449340668482264365;
inline constexpr double two_pi = 6.2831853071795864769;

// psi'(x), x > 0
double trigamma(double x);

// Phi^{-1}(p), p in (0,1)
double normal_quantile(double p);

// standard normal pdf
double normal_pdf(double z);

}  // namespace hlik::num
