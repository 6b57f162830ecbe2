#include "hlik/numeric/special.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>

#include "hlik/errors.hpp"

namespace hlik::num {

double trigamma(double x) {
    if (!(x > 0.0)) throw InvalidConfig("trigamma: x must be > 0");
    return boost::math::trigamma(x);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidConfig("normal_quantile: p must be in (0,1)");
    return std::sqrt(2.0) * boost::math::erf_inv(2.0 * p - 1.0);
}

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(two_pi);
}

}  // namespace hlik::num
