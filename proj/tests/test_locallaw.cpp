#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "mpu/ensemble.hpp"
#include "mpu/locallaw.hpp"
#include "mpu/stats.hpp"

using Catch::Approx;
using mpu::Complex;
using mpu::DataMatrix;
using mpu::MPModel;
using mpu::SpectralPoint;

namespace {
mpu::EnsembleSpec gaussian_spec(int M, int N, std::uint64_t seed) {
    mpu::EnsembleSpec s;
    s.kind = mpu::EnsembleKind::gaussian;
    s.n_rows = M;
    s.n_cols = N;
    s.seed = seed;
    return s;
}
}  // namespace

TEST_CASE("deviance vanishes at m_c and linearizes", "[locallaw]") {
    const MPModel model(0.5);
    const SpectralPoint z(1.2, 0.3);
    const Complex mc = model.stieltjes(z.z());
    REQUIRE(std::abs(mpu::deviance(mc, z, model)) <= 1e-14);

    // |D(m_c + eps)| ~ |eps| |d D / du| at m_c
    const Complex eps(1e-6, 0.0);
    const double lhs = std::abs(mpu::deviance(mc + eps, z, model));
    const double deriv = std::abs(-1.0 / (mc * mc) + z.z() * model.d());
    REQUIRE(lhs == Approx(1e-6 * deriv).epsilon(0.01));

    REQUIRE_THROWS_AS(mpu::deviance(Complex(0.0, 0.0), z, model),
                      mpu::numerical_error);
}

TEST_CASE("z_average", "[locallaw]") {
    REQUIRE(mpu::z_average({Complex(1, 1), Complex(1, -1)}) == Complex(1, 0));
    REQUIRE(mpu::z_average({Complex(2, 3)}) == Complex(2, 3));
    std::mt19937_64 eng(4);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Complex> zs;
    Complex fold = 0.0;
    for (int i = 0; i < 37; ++i) {
        zs.emplace_back(u(eng), u(eng));
        fold += zs.back();
    }
    REQUIRE(std::abs(mpu::z_average(zs) - fold / 37.0) <= 1e-15);
    REQUIRE_THROWS_AS(mpu::z_average({}), mpu::config_error);
}

TEST_CASE("Z_i reproduces the diagonal resolvent identity", "[locallaw]") {
    // 1/G_ii = -z - z <x_i, cG^(i) x_i>  =>  Z_i = -1/G_ii - z - (z/M) tr cG^(i)
    std::mt19937_64 eng(6);
    std::normal_distribution<double> normal;
    const int M = 9, N = 6;
    DataMatrix X(M, N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < M; ++i) X(i, j) = normal(eng) / 3.0;
    const SpectralPoint z(1.0, 0.4);
    const auto zs = mpu::z_vector(X, z, {0, 2, 5});

    Eigen::MatrixXcd G = (X.transpose() * X).cast<Complex>();
    for (int i = 0; i < N; ++i) G(i, i) -= z.z();
    G = G.inverse().eval();
    const std::vector<int> idx{0, 2, 5};
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const int i = idx[k];
        const auto mi = mpu::minor_columns(X, {i});
        Eigen::MatrixXcd cGi = (mi.matrix * mi.matrix.transpose()).cast<Complex>();
        for (int r = 0; r < M; ++r) cGi(r, r) -= z.z();
        const Complex tr = cGi.inverse().trace();
        const Complex expected = -1.0 / G(i, i) - z.z() - z.z() / double(M) * tr;
        REQUIRE(std::abs(zs[k] - expected) <= 1e-9);
    }
}

TEST_CASE("Z_i is centered and shrinks with dimension", "[locallaw][mc]") {
    SECTION("centering") {
        // mean of Z_i over independent trials is 0 within MC error
        const auto spec = gaussian_spec(30, 30, 21);
        const SpectralPoint z(2.0, 1.0);
        Complex acc = 0.0;
        std::vector<double> reals;
        const int trials = 500;
        for (int t = 0; t < trials; ++t) {
            const auto zi = mpu::z_vector(mpu::sample_matrix(spec, t), z, {0});
            acc += zi[0];
            reals.push_back(zi[0].real());
        }
        acc /= double(trials);
        const double se = mpu::standard_error(reals);
        REQUIRE(std::abs(acc.real()) <= 4.0 * se);
    }
    SECTION("median |Z_i| scales like N^{-1/2}") {
        const SpectralPoint z(2.0, 1.0);
        auto med_abs = [&](int n, std::uint64_t seed) {
            const auto spec = gaussian_spec(n, n, seed);
            std::vector<double> mags;
            for (int t = 0; t < 16; ++t) {
                const auto zi =
                    mpu::z_vector(mpu::sample_matrix(spec, t), z, {0, n / 2});
                for (const Complex& v : zi) mags.push_back(std::abs(v));
            }
            return mpu::median(mags);
        };
        const double ratio = med_abs(100, 31) / med_abs(400, 32);
        REQUIRE(ratio >= 1.6);
        REQUIRE(ratio <= 2.6);
    }
}

TEST_CASE("scan produces consistent diagnostics", "[locallaw]") {
    const auto spec = gaussian_spec(80, 60, 12);
    const DataMatrix X = mpu::sample_matrix(spec, 0);
    const MPModel model(60.0 / 80.0);
    mpu::DomainGrid grid =
        mpu::DomainGrid::edge_and_bulk(model, 60, 6, 0.05, 0.8);
    const auto samples = mpu::scan(X, grid, 4);
    REQUIRE(samples.size() == grid.points.size());
    for (const auto& s : samples) {
        REQUIRE(std::isfinite(s.Lambda));
        REQUIRE(std::isfinite(s.Lambda_d));
        REQUIRE(std::isfinite(s.Lambda_o));
        // |m - m_c| <= max_k |G_kk - m_c| up to the trace-average identity
        REQUIRE(s.Lambda <= s.Lambda_d + 1e-12);
        // Psi recomputes from its definition
        const double psi =
            std::sqrt((s.m_c.imag() + s.Lambda) / (60.0 * s.z.eta));
        REQUIRE(s.Psi == Approx(psi).margin(1e-14));
        REQUIRE(s.Psi >= std::sqrt(s.m_c.imag() / (60.0 * s.z.eta)));
        // deviance of the empirical m is attached
        REQUIRE(std::isfinite(s.dev.real()));
    }
}

TEST_CASE("scan stays finite with a kernel block (d > 1)", "[locallaw]") {
    const auto spec = gaussian_spec(40, 80, 14);
    const DataMatrix X = mpu::sample_matrix(spec, 0);
    const MPModel model(2.0);
    mpu::DomainGrid grid = mpu::DomainGrid::single_energy(
        0.5 * (model.lambda_minus() + model.lambda_plus()), 80, 6, 0.05, 1.0);
    for (const auto& s : mpu::scan(X, grid, 2)) {
        REQUIRE(std::isfinite(s.Lambda));
        REQUIRE(std::isfinite(std::abs(s.Z_avg)));
    }
}

TEST_CASE("lambda-only scan skips Green entries", "[locallaw]") {
    const auto spec = gaussian_spec(50, 50, 15);
    const DataMatrix X = mpu::sample_matrix(spec, 0);
    const MPModel model(1.0);
    mpu::DomainGrid grid = mpu::DomainGrid::single_energy(2.0, 50, 6, 0.05, 1.0);
    mpu::ScanOptions opts;
    opts.green_entries = false;
    const auto samples = mpu::scan(X, grid, 0, opts);
    for (const auto& s : samples) {
        REQUIRE(s.Lambda_d == 0.0);
        REQUIRE(s.Lambda_o == 0.0);
        REQUIRE(s.Lambda > 0.0);
        REQUIRE(s.Z_avg == Complex(0.0, 0.0));
    }
}

TEST_CASE("decay exponent fit", "[locallaw]") {
    SECTION("exact (N eta)^{-1} law gives slope -1") {
        std::vector<std::pair<double, double>> pts;
        for (int k = 0; k < 8; ++k) {
            const double neta = std::pow(10.0, 0.3 * k);
            pts.emplace_back(neta, 1.0 / neta);
        }
        REQUIRE(mpu::fit_decay_exponent(pts) == Approx(-1.0).margin(1e-12));
    }
    SECTION("square-root law gives slope -1/2") {
        std::vector<std::pair<double, double>> pts;
        for (int k = 0; k < 8; ++k) {
            const double neta = std::pow(10.0, 0.3 * k);
            pts.emplace_back(neta, std::pow(neta, -0.5));
        }
        REQUIRE(mpu::fit_decay_exponent(pts) == Approx(-0.5).margin(1e-12));
    }
    SECTION("degenerate inputs are rejected") {
        std::vector<std::pair<double, double>> few{{1, 1}, {2, 0.5}, {4, 0.25}};
        REQUIRE_THROWS_AS(mpu::fit_decay_exponent(few), mpu::config_error);
        std::vector<std::pair<double, double>> narrow;
        for (int k = 0; k < 6; ++k) narrow.emplace_back(1.0 + 0.1 * k, 1.0);
        REQUIRE_THROWS_AS(mpu::fit_decay_exponent(narrow), mpu::config_error);
    }
}
