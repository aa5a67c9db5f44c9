#pragma once

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "mpu/common.hpp"
#include "mpu/mp_model.hpp"
#include "mpu/spectral.hpp"
#include "mpu/stats.hpp"

namespace mpu {

// Rectangle of spectral points inside S: energies crossed with log-spaced
// eta values. polylog_exponent is the stand-in p for the paper's unpinned
// phi^{C_zeta} thresholds, reported as (log N)^p.
struct DomainGrid {
    std::vector<SpectralPoint> points;
    double polylog_exponent = 3.0;

    // Default scan grid: bulk midpoint plus both sides of the top edge, with
    // n_eta log-spaced scales in [eta_lo, eta_hi].
    static DomainGrid edge_and_bulk(const MPModel& model, int N, int n_eta = 12,
                                    double eta_lo = 0.0, double eta_hi = 0.0,
                                    double min_eta_c = 1.0) {
        if (N < 1) throw config_error("DomainGrid: N must be positive");
        if (eta_lo <= 0.0) eta_lo = std::pow(N, -0.9);
        if (eta_hi <= 0.0) eta_hi = std::pow(N, -0.2);
        if (eta_lo < min_eta_c / N)
            throw config_error("DomainGrid: eta_lo below c/N floor");
        if (!(eta_lo < eta_hi) || n_eta < 2)
            throw config_error("DomainGrid: degenerate eta range");
        const double bulk = 0.5 * (model.lambda_minus() + model.lambda_plus());
        const double shift = std::pow(N, -2.0 / 3.0);
        const std::vector<double> energies = {bulk, model.lambda_plus() - shift,
                                              model.lambda_plus() + shift};
        DomainGrid g;
        const double step = std::log(eta_hi / eta_lo) / (n_eta - 1);
        for (double E : energies)
            for (int k = 0; k < n_eta; ++k)
                g.points.emplace_back(E, eta_lo * std::exp(step * k));
        return g;
    }

    static DomainGrid single_energy(double E, int N, int n_eta, double eta_lo,
                                    double eta_hi, double min_eta_c = 1.0) {
        if (eta_lo < min_eta_c / N)
            throw config_error("DomainGrid: eta_lo below c/N floor");
        if (!(eta_lo < eta_hi) || n_eta < 2)
            throw config_error("DomainGrid: degenerate eta range");
        DomainGrid g;
        const double step = std::log(eta_hi / eta_lo) / (n_eta - 1);
        for (int k = 0; k < n_eta; ++k)
            g.points.emplace_back(E, eta_lo * std::exp(step * k));
        return g;
    }
};

struct LocalLawSample {
    SpectralPoint z;
    Complex m;
    Complex m_c;
    double Lambda = 0.0;    // |m - m_c|
    double Lambda_d = 0.0;  // max_k |G_kk - m_c|
    double Lambda_o = 0.0;  // max_{k != l} |G_kl|
    double Psi = 0.0;       // sqrt((Im m_c + Lambda) / (N eta))
    Complex Z_avg;          // [Z] over the sampled index subset
    Complex dev;            // deviance of m
};

// D(u) = (1/u + z d u) - (1/m_c + z d m_c); the self-consistent-equation
// residual, zero exactly at m_c.
inline Complex deviance(Complex m, SpectralPoint z, const MPModel& model) {
    if (m == Complex(0.0, 0.0)) throw numerical_error("deviance: m must be nonzero");
    const Complex zz = z.z();
    const Complex mc = model.stieltjes(zz);
    const double d = model.d();
    return (1.0 / m + zz * d * m) - (1.0 / mc + zz * d * mc);
}

inline Complex z_average(const std::vector<Complex>& zs) {
    if (zs.empty()) throw config_error("z_average of empty list");
    Complex s = 0.0;
    for (const Complex& v : zs) s += v;
    return s / static_cast<double>(zs.size());
}

namespace detail {

// Spectral data of the column-i minor needed for Z_i at any z: singular
// values of X^(i), the expansion coefficients of x_i on the left singular
// vectors, and the kernel remainder.
struct MinorQuadratic {
    Vector sq_singular;  // sigma_k^2, k <= min(M, N-1)
    Vector coeff_sq;     // (u_k . x_i)^2
    double kernel_sq = 0.0;  // |x_i|^2 - sum coeff_sq
    int rows = 0;            // M

    Complex quad_form(Complex z) const {
        Complex s = kernel_sq / (0.0 - z);
        for (int k = 0; k < sq_singular.size(); ++k)
            s += coeff_sq[k] / (sq_singular[k] - z);
        return s;
    }
    Complex trace(Complex z) const {
        Complex s = static_cast<double>(rows - sq_singular.size()) / (0.0 - z);
        for (int k = 0; k < sq_singular.size(); ++k)
            s += 1.0 / (sq_singular[k] - z);
        return s;
    }
};

inline MinorQuadratic minor_quadratic(const DataMatrix& X, int i) {
    const ColumnMinor mi = minor_columns(X, {i});
    Eigen::BDCSVD<Matrix> svd(mi.matrix, Eigen::ComputeThinU);
    MinorQuadratic q;
    q.rows = static_cast<int>(X.rows());
    const auto& sigma = svd.singularValues();
    q.sq_singular.resize(sigma.size());
    for (int k = 0; k < sigma.size(); ++k) q.sq_singular[k] = sigma[k] * sigma[k];
    const Vector c = svd.matrixU().transpose() * X.col(i);
    q.coeff_sq = c.array().square();
    q.kernel_sq = std::max(0.0, X.col(i).squaredNorm() - q.coeff_sq.sum());
    return q;
}

}  // namespace detail

// Z_i = z <x_i, curly-G^(i) x_i> - (z/M) tr curly-G^(i) for each requested
// column (0-based), with the minor resolvent taken spectrally.
inline std::vector<Complex> z_vector(const DataMatrix& X, SpectralPoint z,
                                     const std::vector<int>& indices) {
    const Complex zz = z.z();
    const double M = static_cast<double>(X.rows());
    std::vector<Complex> out;
    out.reserve(indices.size());
    for (int i : indices) {
        if (i < 0 || i >= X.cols())
            throw config_error("z_vector: column index out of range");
        const detail::MinorQuadratic q = detail::minor_quadratic(X, i);
        out.push_back(zz * q.quad_form(zz) - (zz / M) * q.trace(zz));
    }
    return out;
}

struct ScanOptions {
    bool green_entries = true;  // compute Lambda_d / Lambda_o via green_slice
};

// One diagnostic sample per grid point. z_subset_size columns (deterministic,
// evenly spaced) feed the [Z] estimate; each needs one minor SVD reused
// across all grid points.
inline std::vector<LocalLawSample> scan(const DataMatrix& X, const DomainGrid& grid,
                                        int z_subset_size,
                                        const ScanOptions& opts = {}) {
    if (grid.points.empty()) throw config_error("scan: empty grid");
    const int N = static_cast<int>(X.cols());
    if (z_subset_size < 0 || z_subset_size > N)
        throw config_error("scan: z_subset_size must lie in [0, N]");
    const MPModel model(static_cast<double>(N) / X.rows());

    const Spectrum S = covariance_spectrum(X, opts.green_entries);

    std::vector<int> subset;
    for (int k = 0; k < z_subset_size; ++k)
        subset.push_back(static_cast<int>((static_cast<long long>(k) * N) /
                                          z_subset_size));
    std::vector<detail::MinorQuadratic> minors;
    minors.reserve(subset.size());
    for (int i : subset) minors.push_back(detail::minor_quadratic(X, i));

    std::vector<LocalLawSample> samples;
    samples.reserve(grid.points.size());
    for (const SpectralPoint& z : grid.points) {
        const Complex zz = z.z();
        LocalLawSample s;
        s.z = z;
        s.m_c = model.stieltjes(zz);
        if (opts.green_entries) {
            const GreenSlice slice = green_slice(S, z);
            s.m = slice.m;
            s.Lambda_o = slice.offdiag_max;
            double dmax = 0.0;
            for (int k = 0; k < slice.diag.size(); ++k)
                dmax = std::max(dmax, std::abs(slice.diag[k] - s.m_c));
            s.Lambda_d = dmax;
        } else {
            s.m = empirical_stieltjes(S, z);
        }
        s.Lambda = std::abs(s.m - s.m_c);
        s.Psi = std::sqrt((s.m_c.imag() + s.Lambda) / (N * z.eta));
        if (!minors.empty()) {
            std::vector<Complex> zs;
            zs.reserve(minors.size());
            const double M = static_cast<double>(X.rows());
            for (const auto& q : minors)
                zs.push_back(zz * q.quad_form(zz) - (zz / M) * q.trace(zz));
            s.Z_avg = z_average(zs);
        }
        s.dev = deviance(s.m, z, model);
        samples.push_back(s);
    }
    return samples;
}

// Least-squares slope of log median-Lambda against log(N eta). Points are
// (N*eta, median Lambda) pairs; needs >= 5 scales spanning >= 1.5 decades.
inline double fit_decay_exponent(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 5)
        throw config_error("fit_decay_exponent: need at least 5 eta values");
    double lo = pts.front().first, hi = pts.front().first;
    std::vector<double> lx, ly;
    for (const auto& [neta, med] : pts) {
        if (!(neta > 0.0) || !(med > 0.0))
            throw numerical_error("fit_decay_exponent: nonpositive input");
        lo = std::min(lo, neta);
        hi = std::max(hi, neta);
        lx.push_back(std::log(neta));
        ly.push_back(std::log(med));
    }
    if (std::log10(hi / lo) < 1.5)
        throw config_error("fit_decay_exponent: eta span below 1.5 decades");
    return ls_slope(lx, ly);
}

}  // namespace mpu
