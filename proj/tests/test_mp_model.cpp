#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "mpu/mp_model.hpp"
#include "mpu/quadrature.hpp"

using Catch::Approx;
using mpu::Complex;
using mpu::MPModel;

TEST_CASE("MP edges and density closed form", "[mp_model]") {
    const MPModel m1(1.0);
    REQUIRE(m1.lambda_minus() == Approx(0.0).margin(1e-15));
    REQUIRE(m1.lambda_plus() == Approx(4.0));
    REQUIRE(m1.density(2.0) == Approx(1.0 / (2.0 * M_PI)));
    REQUIRE(std::isinf(m1.density(0.0)));

    const MPModel mq(0.25);
    REQUIRE(mq.lambda_minus() == Approx(0.25));
    REQUIRE(mq.lambda_plus() == Approx(2.25));
    REQUIRE(mq.density(3.0) == 0.0);
    REQUIRE(mq.density(0.1) == 0.0);
}

TEST_CASE("density normalization", "[mp_model]") {
    for (double d : {0.5, 1.0, 2.0}) {
        const MPModel m(d);
        const double mass = mpu::integrate_sqrt_endpoints(
            [&](double x) { return m.density(x); }, m.lambda_minus(),
            m.lambda_plus(), m.lambda_minus(), m.lambda_plus(), 1e-11);
        REQUIRE(mass == Approx(std::min(1.0, 1.0 / d)).margin(1e-8));
    }
}

TEST_CASE("Stieltjes transform closed form", "[mp_model]") {
    SECTION("large-z asymptotic for unit mass") {
        const MPModel m(0.5);
        const Complex z(0.0, 1000.0);
        REQUIRE(std::abs(z * m.stieltjes(z) + 1.0) <= 0.01);
    }
    SECTION("fixed-point residual on a 100-point grid") {
        for (double d : {0.5, 1.0, 2.0}) {
            const MPModel m(d);
            std::mt19937_64 eng(3);
            std::uniform_real_distribution<double> uE(
                d > 1 ? m.lambda_minus() / 5.0 : 0.0, 5.0 * m.lambda_plus());
            std::uniform_real_distribution<double> ueta(std::log(1e-4),
                                                        std::log(10.0 * (1 + d)));
            for (int i = 0; i < 100; ++i) {
                const Complex z(uE(eng), std::exp(ueta(eng)));
                const Complex mc = m.stieltjes(z);
                const Complex residual = mc + 1.0 / (z - (1.0 - d) + z * d * mc);
                REQUIRE(std::abs(residual) <= 1e-12);
                REQUIRE(mc.imag() > 0.0);
            }
        }
    }
    SECTION("domain error for the closed half-plane") {
        const MPModel m(1.0);
        REQUIRE_THROWS_AS(m.stieltjes(Complex(1.0, 0.0)), mpu::config_error);
        REQUIRE_THROWS_AS(m.stieltjes(Complex(1.0, -0.5)), mpu::config_error);
    }
}

TEST_CASE("Stieltjes transform agrees with direct quadrature", "[mp_model]") {
    std::mt19937_64 eng(11);
    for (double d : {0.5, 2.0}) {
        const MPModel m(d);
        std::uniform_real_distribution<double> uE(0.1, 1.2 * m.lambda_plus());
        std::uniform_real_distribution<double> ueta(0.1, 2.0);
        for (int i = 0; i < 10; ++i) {
            const Complex z(uE(eng), ueta(eng));
            auto re = [&](double x) { return ((x - z.real()) * m.density(x)) /
                                             (std::norm(Complex(x, 0) - z)); };
            auto im = [&](double x) { return (z.imag() * m.density(x)) /
                                             (std::norm(Complex(x, 0) - z)); };
            Complex quad(mpu::integrate_sqrt_endpoints(re, m.lambda_minus(),
                                                       m.lambda_plus(), m.lambda_minus(),
                                                       m.lambda_plus(), 1e-10),
                         mpu::integrate_sqrt_endpoints(im, m.lambda_minus(),
                                                       m.lambda_plus(), m.lambda_minus(),
                                                       m.lambda_plus(), 1e-10));
            if (d > 1.0) quad += (1.0 - 1.0 / d) / (0.0 - z);
            REQUIRE(std::abs(quad - m.stieltjes(z)) <= 1e-8);
        }
    }
}

TEST_CASE("properties of m_c on the spectral domain", "[mp_model]") {
    for (double d : {0.5, 1.0, 2.0}) {
        const MPModel m(d);
        const double E_lo = d > 1 ? m.lambda_minus() / 5.0 : 1e-3;
        for (int ie = 0; ie <= 24; ++ie) {
            const double E = E_lo + (5.0 * m.lambda_plus() - E_lo) * ie / 24.0;
            for (int ik = 0; ik <= 12; ++ik) {
                const double eta = std::pow(10.0, -6.0 + 7.0 * ik / 12.0);
                const Complex mc = m.stieltjes(Complex(E, eta));
                REQUIRE(mc.imag() > 0.0);
                const double amc = std::abs(mc);
                REQUIRE(amc >= 1.0 / 20.0);
                REQUIRE(amc <= 20.0);
                // order-of-magnitude shape of Im m_c
                const double kappa = m.kappa(E);
                const bool inside = E >= m.lambda_minus() && E <= m.lambda_plus();
                const double ratio =
                    (kappa >= eta && !inside)
                        ? mc.imag() * std::sqrt(kappa + eta) / eta
                        : mc.imag() / std::sqrt(kappa + eta);
                REQUIRE(ratio >= 1.0 / 20.0);
                REQUIRE(ratio <= 20.0);
            }
        }
    }
}

TEST_CASE("tail mass", "[mp_model]") {
    SECTION("support boundaries") {
        const MPModel m(0.5);
        REQUIRE(m.tail_mass(m.lambda_plus()) == 0.0);
        REQUIRE(m.tail_mass(m.lambda_plus() + 1.0) == 0.0);
        REQUIRE(m.tail_mass(m.lambda_minus()) == Approx(1.0).margin(1e-10));
    }
    SECTION("d > 1 zero atom counts only at E <= 0") {
        const MPModel m(2.0);
        REQUIRE(m.tail_mass(m.lambda_minus()) == Approx(0.5).margin(1e-10));
        REQUIRE(m.tail_mass(0.0) == Approx(1.0).margin(1e-10));
        REQUIRE(m.tail_mass(-3.0) == Approx(1.0).margin(1e-10));
    }
    SECTION("quadrature vs midpoint-rule oracle at d = 1") {
        const MPModel m(1.0);
        // 1e7-point midpoint rule over [2, 4]
        const int n = 10000000;
        const double h = 2.0 / n;
        double oracle = 0.0;
        for (int i = 0; i < n; ++i) oracle += m.density(2.0 + (i + 0.5) * h);
        oracle *= h;
        REQUIRE(m.tail_mass(2.0) == Approx(oracle).margin(1e-4));
    }
}

TEST_CASE("classical locations solve n_c(gamma_j) = j/N", "[mp_model]") {
    for (double d : {0.5, 1.0, 2.0}) {
        const MPModel m(d);
        const int N = 200;
        const auto locs = m.classical_locations(N);
        const int count = d > 1 ? static_cast<int>(N / d) : N;
        REQUIRE(locs.count == count);
        for (int j = 1; j <= count; ++j) {
            const double g = locs.gamma[static_cast<std::size_t>(j - 1)];
            REQUIRE(std::abs(m.tail_mass(g) - static_cast<double>(j) / N) <= 1e-10);
            if (j > 1) REQUIRE(g < locs.gamma[static_cast<std::size_t>(j - 2)]);
            REQUIRE(g >= m.lambda_minus() - 1e-12);
            REQUIRE(g <= m.lambda_plus() + 1e-12);
        }
    }
}

TEST_CASE("gamma_1 confirmed by an independent Monte Carlo root find", "[mp_model][mc]") {
    const MPModel m(1.0);
    const int N = 10;
    const auto locs = m.classical_locations(N);

    // random-point Monte Carlo estimate of the tail mass
    std::mt19937_64 eng(2024);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto mc_tail = [&](double E) {
        const int samples = 400000;
        double acc = 0.0;
        for (int i = 0; i < samples; ++i) {
            const double x = E + (4.0 - E) * unif(eng);
            acc += m.density(x);
        }
        return acc * (4.0 - E) / samples;
    };
    // independent bisection on n_c(g) = 1/N
    double lo = 0.0, hi = 4.0;
    for (int it = 0; it < 22; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mc_tail(mid) > 1.0 / N)
            lo = mid;
        else
            hi = mid;
    }
    REQUIRE(locs.gamma[0] == Approx(0.5 * (lo + hi)).margin(1e-3 * 4.0));
}

TEST_CASE("kappa is the distance to the nearer edge", "[mp_model]") {
    const MPModel m(1.0);
    REQUIRE(m.kappa(m.lambda_plus()) == 0.0);
    REQUIRE(m.kappa(1.0) == Approx(1.0));
    const double mid = 0.5 * (m.lambda_minus() + m.lambda_plus());
    REQUIRE(m.kappa(mid) == Approx(0.5 * (m.lambda_plus() - m.lambda_minus())));
}
