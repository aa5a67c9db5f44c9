#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_airy.h>

#include "mpu/common.hpp"

namespace mpu {

namespace detail {

inline double airy_ai(double x) {
    static const bool handler_off = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)handler_off;
    gsl_sf_result res;
    const int status = gsl_sf_airy_Ai_e(x, GSL_PREC_DOUBLE, &res);
    if (status != GSL_SUCCESS)
        throw numerical_error("Airy evaluation failed at x=" + std::to_string(x));
    return res.val;
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_m.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int m) {
    std::vector<double> x(static_cast<std::size_t>(m)), w(static_cast<std::size_t>(m));
    const int half = (m + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double xi = std::cos(M_PI * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = xi;
            for (int k = 2; k <= m; ++k) {
                const double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (xi * p1 - p0) / (xi * xi - 1.0);
            const double step = p1 / dp;
            xi -= step;
            if (std::abs(step) < 1e-15) break;
        }
        x[static_cast<std::size_t>(i)] = -xi;
        x[static_cast<std::size_t>(m - 1 - i)] = xi;
        const double wi = 2.0 / ((1.0 - xi * xi) * dp * dp);
        w[static_cast<std::size_t>(i)] = wi;
        w[static_cast<std::size_t>(m - 1 - i)] = wi;
    }
    return {x, w};
}

}  // namespace detail

// GOE Tracy-Widom CDF via the Ferrari-Spohn determinantal form
// F1(s) = det(I - K) on L^2(s, infinity), K(x,y) = Ai((x+y)/2)/2, evaluated
// by a Gauss-Legendre Nystroem discretization on [s, cutoff].
inline double tw1_cdf_fredholm(double s, int nodes = 96, double cutoff = 0.0) {
    if (cutoff <= s) cutoff = std::max(s + 4.0, 14.0);
    auto [t, w] = detail::gauss_legendre(nodes);
    const double half = 0.5 * (cutoff - s);
    const double mid = 0.5 * (cutoff + s);
    std::vector<double> x(static_cast<std::size_t>(nodes)),
        sw(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i) {
        x[static_cast<std::size_t>(i)] = mid + half * t[static_cast<std::size_t>(i)];
        sw[static_cast<std::size_t>(i)] =
            std::sqrt(half * w[static_cast<std::size_t>(i)]);
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(nodes, nodes);
    for (int i = 0; i < nodes; ++i) {
        for (int j = i; j < nodes; ++j) {
            const double k = 0.5 * detail::airy_ai(0.5 * (x[static_cast<std::size_t>(i)] +
                                                          x[static_cast<std::size_t>(j)]));
            const double v = sw[static_cast<std::size_t>(i)] *
                             sw[static_cast<std::size_t>(j)] * k;
            A(i, j) -= v;
            if (i != j) A(j, i) -= v;
        }
    }
    const double det = Eigen::PartialPivLU<Eigen::MatrixXd>(A).determinant();
    return std::min(1.0, std::max(0.0, det));
}

// (s, F1(s)) pairs on a uniform grid, ready for TW1Table::from_points or CSV.
inline std::vector<std::pair<double, double>> tw1_reference_points(
    double s_min = -10.0, double s_max = 7.0, double step = 0.01, int nodes = 96) {
    if (!(step > 0.0) || !(s_max > s_min))
        throw config_error("tw1_reference_points: bad grid");
    std::vector<std::pair<double, double>> pts;
    const int n = static_cast<int>(std::lround((s_max - s_min) / step));
    pts.reserve(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        const double s = s_min + step * k;
        pts.emplace_back(s, tw1_cdf_fredholm(s, nodes));
    }
    return pts;
}

}  // namespace mpu
