#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "mpu/common.hpp"

namespace mpu {

// Ordered spectrum of H = X^T X with optional orthonormal eigenvectors.
// values holds all N eigenvalues in descending order; for N > M the kernel
// block of N - M exact zeros is included.
struct Spectrum {
    Vector values;         // size N, descending
    Eigen::MatrixXd vectors;  // N x N when requested, else 0 x 0
    int rows = 0;          // M
    int cols = 0;          // N

    bool has_vectors() const { return vectors.size() > 0; }
    double ratio() const { return static_cast<double>(cols) / rows; }
};

struct GreenSlice {
    SpectralPoint z;
    Eigen::VectorXcd diag;
    double offdiag_max = 0.0;
    Complex m;
};

// Eigenvalues (and eigenvectors) of X^T X computed through the singular
// values of X; sigma_k^2 = lambda_k avoids squaring the condition number at
// the hard edge.
inline Spectrum covariance_spectrum(const DataMatrix& X, bool want_vectors) {
    if (!all_finite(X)) throw data_error("covariance_spectrum: non-finite entries");
    const int M = static_cast<int>(X.rows());
    const int N = static_cast<int>(X.cols());
    Spectrum S;
    S.rows = M;
    S.cols = N;
    S.values = Vector::Zero(N);

    unsigned opts = want_vectors ? Eigen::ComputeFullV : 0;
    Eigen::BDCSVD<Matrix> svd(X, opts);
    const auto& sigma = svd.singularValues();
    const int K = std::min(M, N);
    for (int k = 0; k < std::min<int>(K, sigma.size()); ++k)
        S.values[k] = sigma[k] * sigma[k];

    // exact kernel vs numerical noise
    const double clamp = 1e-10 * std::max(1.0, S.values.size() ? S.values[0] : 1.0);
    for (int k = 0; k < N; ++k)
        if (S.values[k] < clamp) S.values[k] = 0.0;

    if (want_vectors) S.vectors = svd.matrixV();
    return S;
}

// m(z) = (1/N) sum_j 1/(lambda_j - z)
inline Complex empirical_stieltjes(const Spectrum& S, SpectralPoint z) {
    const Complex zz = z.z();
    Complex sum = 0.0;
    for (int j = 0; j < S.values.size(); ++j) sum += 1.0 / (S.values[j] - zz);
    return sum / static_cast<double>(S.values.size());
}

// Assembles G_ij = sum_a v_a(i) v_a(j) / (lambda_a - z) from the spectral
// representation: diagonal entries, the off-diagonal maximum and the trace
// average in one pass.
inline GreenSlice green_slice(const Spectrum& S, SpectralPoint z) {
    if (!S.has_vectors())
        throw config_error("green_slice: spectrum carries no eigenvectors");
    const int N = S.cols;
    const Complex zz = z.z();
    Vector w_re(N), w_im(N);
    for (int a = 0; a < N; ++a) {
        const Complex w = 1.0 / (S.values[a] - zz);
        w_re[a] = w.real();
        w_im[a] = w.imag();
    }
    const Matrix& V = S.vectors;
    Matrix G_re = V * w_re.asDiagonal() * V.transpose();
    Matrix G_im = V * w_im.asDiagonal() * V.transpose();

    GreenSlice slice;
    slice.z = z;
    slice.diag.resize(N);
    Complex trace = 0.0;
    double omax = 0.0;
    for (int i = 0; i < N; ++i) {
        slice.diag[i] = Complex(G_re(i, i), G_im(i, i));
        trace += slice.diag[i];
        for (int j = i + 1; j < N; ++j) {
            const double mag2 =
                G_re(i, j) * G_re(i, j) + G_im(i, j) * G_im(i, j);
            omax = std::max(omax, mag2);
        }
    }
    slice.offdiag_max = std::sqrt(omax);
    slice.m = trace / static_cast<double>(N);
    return slice;
}

// |tr G - tr curly-G - (M-N)/z| with both traces evaluated from the shared
// singular values of X.
inline double trace_identity_residual(const DataMatrix& X, SpectralPoint z) {
    const Complex zz = z.z();
    const int M = static_cast<int>(X.rows());
    const int N = static_cast<int>(X.cols());
    Eigen::BDCSVD<Matrix> svd(X);
    const auto& sigma = svd.singularValues();
    const int K = std::min(M, N);
    Complex common = 0.0;
    for (int k = 0; k < K; ++k) common += 1.0 / (sigma[k] * sigma[k] - zz);
    const Complex tr_g = common + static_cast<double>(N - K) * (-1.0 / zz);
    const Complex tr_gc = common + static_cast<double>(M - K) * (-1.0 / zz);
    return std::abs(tr_g - tr_gc - static_cast<double>(M - N) / zz);
}

// M x (N-|T|) minor with the T columns removed; kept records the original
// column identities in order.
struct ColumnMinor {
    DataMatrix matrix;
    std::vector<int> kept;
    bool degenerate = false;  // all columns removed

    // position of original column index in the minor, or -1 if removed
    int position_of(int original) const {
        for (std::size_t p = 0; p < kept.size(); ++p)
            if (kept[p] == original) return static_cast<int>(p);
        return -1;
    }
};

inline ColumnMinor minor_columns(const DataMatrix& X, const std::vector<int>& T) {
    const int N = static_cast<int>(X.cols());
    std::vector<bool> removed(static_cast<std::size_t>(N), false);
    for (int t : T) {
        if (t < 0 || t >= N)
            throw config_error("minor_columns: column index out of range");
        removed[static_cast<std::size_t>(t)] = true;
    }
    ColumnMinor out;
    for (int j = 0; j < N; ++j)
        if (!removed[static_cast<std::size_t>(j)]) out.kept.push_back(j);
    out.matrix.resize(X.rows(), static_cast<Eigen::Index>(out.kept.size()));
    for (std::size_t p = 0; p < out.kept.size(); ++p)
        out.matrix.col(static_cast<Eigen::Index>(p)) = X.col(out.kept[p]);
    out.degenerate = out.kept.empty();
    return out;
}

namespace detail {
inline Eigen::MatrixXcd dense_resolvent(const Matrix& sym, Complex z) {
    Eigen::MatrixXcd A = sym.cast<Complex>();
    for (Eigen::Index i = 0; i < A.rows(); ++i) A(i, i) -= z;
    return A.inverse();
}
}  // namespace detail

struct ResolventResiduals {
    double gii = 0.0;   // self-consistent diagonal identity
    double gij = 0.0;   // off-diagonal quadratic-form identity
    double gijk = 0.0;  // one-column expansion identity
};

// Residuals of the three resolvent identities, each evaluated with dense
// inversions of the full matrix and its column minors. Indices are 0-based.
inline ResolventResiduals resolvent_identity_residuals(const DataMatrix& X,
                                                       SpectralPoint z, int i,
                                                       int j, int k) {
    const int N = static_cast<int>(X.cols());
    if (N < 3) throw config_error("resolvent identities need N >= 3");
    if (i == j || k == i || k == j)
        throw config_error("resolvent identities need distinct i, j, k");
    if (i < 0 || j < 0 || k < 0 || i >= N || j >= N || k >= N)
        throw config_error("resolvent identities: index out of range");

    const Complex zz = z.z();
    const Eigen::MatrixXcd G = detail::dense_resolvent(X.transpose() * X, zz);
    if (std::abs(G(k, k)) < 1e-12)
        throw numerical_error("resolvent identities: near-singular pivot G_kk");

    const ColumnMinor mi = minor_columns(X, {i});
    const ColumnMinor mij = minor_columns(X, {i, j});
    const ColumnMinor mk = minor_columns(X, {k});

    const Eigen::MatrixXcd cG_i =
        detail::dense_resolvent(mi.matrix * mi.matrix.transpose(), zz);
    const Eigen::MatrixXcd cG_ij =
        detail::dense_resolvent(mij.matrix * mij.matrix.transpose(), zz);
    const Eigen::MatrixXcd G_i =
        detail::dense_resolvent(mi.matrix.transpose() * mi.matrix, zz);
    const Eigen::MatrixXcd G_k =
        detail::dense_resolvent(mk.matrix.transpose() * mk.matrix, zz);

    const Eigen::VectorXcd xi = X.col(i).cast<Complex>();
    const Eigen::VectorXcd xj = X.col(j).cast<Complex>();

    ResolventResiduals r;
    const Complex quad_ii = xi.dot(cG_i * xi);  // x_i is real, so dot = bilinear
    r.gii = std::abs(G(i, i) - 1.0 / (-zz - zz * quad_ii));

    const Complex quad_ij = xi.dot(cG_ij * xj);
    const int j_in_i = mi.position_of(j);
    r.gij = std::abs(G(i, j) - zz * G(i, i) * G_i(j_in_i, j_in_i) * quad_ij);

    const int i_in_k = mk.position_of(i);
    const int j_in_k = mk.position_of(j);
    r.gijk = std::abs(G(i, j) - G_k(i_in_k, j_in_k) -
                      G(i, k) * G(k, j) / G(k, k));
    return r;
}

// Normalized empirical counting function n(E) = #{lambda_j >= E} / N.
inline double counting(const Spectrum& S, double E) {
    int count = 0;
    for (int j = 0; j < S.values.size(); ++j)
        if (S.values[j] >= E) ++count;
    return static_cast<double>(count) / static_cast<double>(S.values.size());
}

// Exact closed form of tr chi_[E,E_top] * theta_eta (H): each eigenvalue
// contributes (1/pi)(arctan((l-E)/eta) - arctan((l-E_top)/eta)).
inline double smoothed_counting(const Spectrum& S, double E, double E_top,
                                double eta) {
    if (!(E < E_top)) throw config_error("smoothed_counting needs E < E_top");
    if (!(eta > 0.0)) throw config_error("smoothed_counting needs eta > 0");
    double sum = 0.0;
    for (int j = 0; j < S.values.size(); ++j) {
        const double l = S.values[j];
        sum += std::atan((l - E) / eta) - std::atan((l - E_top) / eta);
    }
    return sum / M_PI;
}

}  // namespace mpu
