#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mpu/ensemble.hpp"

using Catch::Approx;
using mpu::EnsembleKind;
using mpu::EnsembleSpec;

namespace {
EnsembleSpec make(EnsembleKind kind, int M, int N, std::uint64_t seed = 1) {
    EnsembleSpec s;
    s.kind = kind;
    s.n_rows = M;
    s.n_cols = N;
    s.seed = seed;
    return s;
}
}  // namespace

TEST_CASE("moment profiles are the analytic atom moments", "[ensemble]") {
    REQUIRE(mpu::moment_profile(make(EnsembleKind::gaussian, 10, 10)) ==
            std::array<double, 4>{0.0, 1.0, 0.0, 3.0});
    REQUIRE(mpu::moment_profile(make(EnsembleKind::rademacher, 10, 10)) ==
            std::array<double, 4>{0.0, 1.0, 0.0, 1.0});

    // two_point oracle: p a^k + (1-p) b^k with p = 1/(1+a^2), b = -1/a
    for (double a : {0.5, 1.0, 2.0, 3.0}) {
        EnsembleSpec s = make(EnsembleKind::two_point, 10, 10);
        s.two_point_a = a;
        const double p = 1.0 / (1.0 + a * a);
        const double b = -1.0 / a;
        const auto m = mpu::moment_profile(s);
        for (int k = 1; k <= 4; ++k) {
            const double expected = p * std::pow(a, k) + (1.0 - p) * std::pow(b, k);
            REQUIRE(m[static_cast<std::size_t>(k - 1)] ==
                    Approx(expected).margin(1e-12));
        }
    }

    // a = 2: atoms {2, -1/2} with p = 1/5; third moment 3/2, fourth 13/4
    EnsembleSpec tp = make(EnsembleKind::two_point, 10, 10);
    tp.two_point_a = 2.0;
    const auto m = mpu::moment_profile(tp);
    REQUIRE(m[2] == Approx(1.5));
    REQUIRE(m[3] == Approx(3.25));

    // self-normalized fourth moment 3M/(M+2)
    const auto sn = mpu::moment_profile(make(EnsembleKind::self_normalized, 8, 4));
    REQUIRE(sn[3] == Approx(3.0 * 8.0 / 10.0));
}

TEST_CASE("sampling is a pure function of (spec, trial)", "[ensemble]") {
    const EnsembleSpec s = make(EnsembleKind::gaussian, 20, 10, 99);
    const mpu::DataMatrix a = mpu::sample_matrix(s, 3);
    const mpu::DataMatrix b = mpu::sample_matrix(s, 3);
    REQUIRE(a == b);
    const mpu::DataMatrix c = mpu::sample_matrix(s, 4);
    REQUIRE(a != c);

    EnsembleSpec other = s;
    other.seed = 100;
    REQUIRE(mpu::sample_matrix(other, 3) != a);
}

TEST_CASE("rademacher entries carry the M^{-1/2} scale", "[ensemble]") {
    const mpu::DataMatrix X =
        mpu::sample_matrix(make(EnsembleKind::rademacher, 4, 2), 0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j)
            REQUIRE(std::abs(X(i, j)) == Approx(0.5));
}

TEST_CASE("scalar gaussian ensemble matches its defining moments", "[ensemble][mc]") {
    const EnsembleSpec s = make(EnsembleKind::gaussian, 1, 1, 5);
    double sum = 0.0, sq = 0.0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        const double x = mpu::sample_matrix(s, t)(0, 0);
        sum += x;
        sq += x * x;
    }
    const double mean = sum / trials;
    const double var = sq / trials - mean * mean;
    REQUIRE(std::abs(mean) < 0.02);
    REQUIRE(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("empirical moments match the profile within CLT error", "[ensemble][mc]") {
    // one 1000x1000 draw = 1e6 entries of sqrt(M) q
    for (EnsembleKind kind : {EnsembleKind::gaussian, EnsembleKind::rademacher,
                              EnsembleKind::two_point, EnsembleKind::self_normalized}) {
        EnsembleSpec s = make(kind, 1000, 1000, 11);
        const auto prof = mpu::moment_profile(s);
        const mpu::DataMatrix X = mpu::sample_matrix(s, 0);
        const double root_m = std::sqrt(1000.0);
        double m1 = 0.0, m2 = 0.0, m3 = 0.0;
        for (int j = 0; j < 1000; ++j)
            for (int i = 0; i < 1000; ++i) {
                const double q = root_m * X(i, j);
                m1 += q;
                m2 += q * q;
                m3 += q * q * q;
            }
        const double n = 1e6;
        m1 /= n;
        m2 /= n;
        m3 /= n;
        // 4 standard errors; SE(m_k) <= sqrt(E q^{2k}) / sqrt(n)
        REQUIRE(std::abs(m1 - prof[0]) < 4.0 * std::sqrt(prof[1] / n));
        const double se2 = std::sqrt(std::max(prof[3] - prof[1] * prof[1], 0.1) / n);
        REQUIRE(std::abs(m2 - prof[1]) < 4.0 * se2);
        if (kind == EnsembleKind::two_point) {
            // third moment = 3/2: check within 3 sigma of CLT error
            const double m6 = 0.2 * 64.0 + 0.8 * (1.0 / 64.0);  // E q^6
            REQUIRE(std::abs(m3 - 1.5) < 3.0 * std::sqrt(m6 / n) + 3.0 * 1e-3);
        }
    }
}

TEST_CASE("self_normalize produces unit columns", "[ensemble]") {
    SECTION("already normalized column is unchanged") {
        mpu::DataMatrix X = mpu::DataMatrix::Zero(4, 1);
        X(0, 0) = 1.0;
        REQUIRE(mpu::self_normalize(X) == X);
    }
    SECTION("3-4-5 column") {
        mpu::DataMatrix X(2, 1);
        X << 3.0, 4.0;
        const mpu::DataMatrix Y = mpu::self_normalize(X);
        REQUIRE(Y(0, 0) == Approx(0.6));
        REQUIRE(Y(1, 0) == Approx(0.8));
    }
    SECTION("every output column has unit norm") {
        const mpu::DataMatrix X =
            mpu::sample_matrix(make(EnsembleKind::gaussian, 30, 12), 1);
        const mpu::DataMatrix Y = mpu::self_normalize(X);
        for (int j = 0; j < Y.cols(); ++j)
            REQUIRE(Y.col(j).norm() == Approx(1.0).margin(1e-12));
    }
    SECTION("zero column is rejected") {
        mpu::DataMatrix X = mpu::DataMatrix::Zero(3, 2);
        X(0, 0) = 1.0;
        REQUIRE_THROWS_AS(mpu::self_normalize(X), mpu::numerical_error);
    }
}

TEST_CASE("gaussian interpolation endpoints and variance", "[ensemble][mc]") {
    const EnsembleSpec s = make(EnsembleKind::rademacher, 316, 316, 17);
    const mpu::DataMatrix X0 = mpu::sample_matrix(s, 0);

    SECTION("t = 0 returns X0 exactly") {
        REQUIRE(mpu::gaussian_interpolate(X0, 0.0, 1, 0) == X0);
    }
    SECTION("t -> infinity forgets the initial data") {
        const mpu::DataMatrix X = mpu::gaussian_interpolate(X0, 50.0, 1, 0);
        double var = 0.0;
        for (int j = 0; j < X.cols(); ++j)
            for (int i = 0; i < X.rows(); ++i) var += X(i, j) * X(i, j);
        var /= (316.0 * 316.0);
        REQUIRE(var == Approx(1.0 / 316.0).epsilon(0.02));
    }
    SECTION("entry variance is preserved for all t") {
        for (double t : {0.0, 0.1, 1.0, 10.0}) {
            const mpu::DataMatrix X = mpu::gaussian_interpolate(X0, t, 1, 2);
            double var = 0.0;
            for (int j = 0; j < X.cols(); ++j)
                for (int i = 0; i < X.rows(); ++i) var += X(i, j) * X(i, j);
            var /= (316.0 * 316.0);
            // 3 sigma of the variance estimator over ~1e5 entries
            REQUIRE(std::abs(var - 1.0 / 316.0) < 3.0 * std::sqrt(2.0 / 1e5) / 316.0);
        }
    }
}

TEST_CASE("spec validation and JSON round trip", "[ensemble]") {
    EnsembleSpec s = make(EnsembleKind::two_point, 400, 200, 123);
    s.two_point_a = 2.0;
    const auto j = s.to_json();
    const EnsembleSpec back = EnsembleSpec::from_json(j);
    REQUIRE(back.kind == s.kind);
    REQUIRE(back.n_rows == s.n_rows);
    REQUIRE(back.n_cols == s.n_cols);
    REQUIRE(back.seed == s.seed);
    REQUIRE(back.two_point_a == s.two_point_a);
    REQUIRE(back.to_json() == j);

    SECTION("invalid two_point atom") {
        EnsembleSpec bad = make(EnsembleKind::two_point, 10, 10);
        bad.two_point_a = -1.0;
        REQUIRE_THROWS_AS(bad.validate(), mpu::config_error);
    }
    SECTION("aspect guard") {
        EnsembleSpec bad = make(EnsembleKind::gaussian, 1000, 10);
        REQUIRE_THROWS_AS(bad.validate(), mpu::config_error);
    }
    SECTION("square flag") { REQUIRE(make(EnsembleKind::gaussian, 7, 7).square()); }
}
