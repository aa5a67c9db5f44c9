#pragma once

#include <cmath>

#include "mpu/common.hpp"

namespace mpu {

// Bracketed bisection to the requested width, then one Newton polish when a
// derivative is supplied and usable. f(lo) and f(hi) must straddle zero.
template <class Func, class Deriv>
double solve_bracketed(const Func& f, const Deriv& df, double lo, double hi,
                       double width = 1e-13) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw numerical_error("solve_bracketed: endpoints do not bracket a root");

    while (hi - lo > width) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // hit floating-point resolution
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }

    double x = 0.5 * (lo + hi);
    const double d = df(x);
    if (std::isfinite(d) && std::abs(d) > 1e-300) {
        const double step = f(x) / d;
        const double polished = x - step;
        if (polished >= lo && polished <= hi) x = polished;
    }
    return x;
}

template <class Func>
double solve_bisection(const Func& f, double lo, double hi, double width = 1e-13) {
    return solve_bracketed(f, [](double) { return 0.0; }, lo, hi, width);
}

}  // namespace mpu
