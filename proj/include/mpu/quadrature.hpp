#pragma once

#include <cmath>
#include <vector>

#include "mpu/common.hpp"

namespace mpu {

namespace detail {

// Gauss-Kronrod 7-15 nodes on [-1,1]: {abscissa, Gauss weight, Kronrod weight}.
inline constexpr double gk15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
};

template <class Func>
double gk15_panel(const Func& f, double a, double b, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    const double y0 = f(mid);
    double g7 = gk15[0][1] * y0;
    double k15 = gk15[0][2] * y0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * gk15[i][0];
        const double yi = f(mid + dx) + f(mid - dx);
        g7 += gk15[i][1] * yi;
        k15 += gk15[i][2] * yi;
    }
    g7 *= half;
    k15 *= half;

    err = std::abs(k15 - g7);
    err = 200.0 * err * std::sqrt(std::max(err, 0.0));
    return k15;
}

}  // namespace detail

// Adaptive Gauss-Kronrod integration of f over [a,b] to absolute tolerance.
template <class Func>
double integrate(const Func& f, double a, double b, double abs_tol = 1e-11) {
    if (a == b) return 0.0;
    struct Interval {
        double a, b, value, error;
    };
    std::vector<Interval> work;
    double err0;
    const double v0 = detail::gk15_panel(f, a, b, err0);
    work.push_back({a, b, v0, err0});

    double total = v0;
    double total_err = err0;
    const int max_intervals = 4000;

    while (total_err > abs_tol) {
        // split the interval with the largest error estimate
        std::size_t worst = 0;
        for (std::size_t i = 1; i < work.size(); ++i)
            if (work[i].error > work[worst].error) worst = i;
        if (work[worst].error <= abs_tol / (2.0 * static_cast<double>(work.size())))
            break;
        if (static_cast<int>(work.size()) >= max_intervals)
            throw numerical_error("adaptive quadrature: interval budget exceeded");

        const Interval iv = work[worst];
        const double mid = 0.5 * (iv.a + iv.b);
        double el, er;
        const double vl = detail::gk15_panel(f, iv.a, mid, el);
        const double vr = detail::gk15_panel(f, mid, iv.b, er);

        total += vl + vr - iv.value;
        total_err += el + er - iv.error;
        work[worst] = {iv.a, mid, vl, el};
        work.push_back({mid, iv.b, vr, er});
    }
    return total;
}

// Integrates f over [x_lo, x_hi] inside [lo, hi] after the substitution
// x = lo + (hi-lo)*sin^2(u), which absorbs inverse-square-root endpoint
// singularities into a smooth integrand.
template <class Func>
double integrate_sqrt_endpoints(const Func& f, double lo, double hi, double x_lo,
                                double x_hi, double abs_tol = 1e-11) {
    if (x_hi <= x_lo) return 0.0;
    const double span = hi - lo;
    auto u_of = [&](double x) {
        double r = (x - lo) / span;
        r = std::min(1.0, std::max(0.0, r));
        return std::asin(std::sqrt(r));
    };
    const double ua = u_of(x_lo);
    const double ub = u_of(x_hi);
    auto g = [&](double u) {
        const double s = std::sin(u);
        const double c = std::cos(u);
        const double x = lo + span * s * s;
        return f(x) * span * 2.0 * s * c;
    };
    return integrate(g, ua, ub, abs_tol);
}

}  // namespace mpu
