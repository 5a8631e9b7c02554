#include "osp/bessel.hpp"

#include <cmath>
#include <stdexcept>

namespace osp {

double bessel_k0(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::domain_error("bessel_k0: argument must be positive and finite");
    }
    constexpr double step = 0.125;
    // exp(-745) underflows to zero in double precision
    constexpr double cutoff = 745.0;

    double sum = 0.5 * std::exp(-x);
    for (int k = 1;; ++k) {
        const double arg = x * std::cosh(k * step);
        if (arg > cutoff) break;
        const double term = std::exp(-arg);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return step * sum;
}

}  // namespace osp
