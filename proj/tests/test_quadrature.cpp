#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mpu/quadrature.hpp"
#include "mpu/rootfind.hpp"
#include "mpu/stats.hpp"

using Catch::Approx;

TEST_CASE("adaptive Gauss-Kronrod hits analytic integrals", "[quadrature]") {
    SECTION("polynomial") {
        const double v = mpu::integrate([](double x) { return 3.0 * x * x; }, 0.0, 2.0);
        REQUIRE(v == Approx(8.0).margin(1e-12));
    }
    SECTION("oscillatory") {
        const double v = mpu::integrate([](double x) { return std::cos(x); }, 0.0, 10.0);
        REQUIRE(v == Approx(std::sin(10.0)).margin(1e-10));
    }
    SECTION("peaked") {
        // integral of 1/(x^2 + 1e-4) over [-1, 1] = 2*atan(100)/0.01
        const double v = mpu::integrate(
            [](double x) { return 1.0 / (x * x + 1e-4); }, -1.0, 1.0, 1e-10);
        REQUIRE(v == Approx(200.0 * std::atan(100.0)).epsilon(1e-10));
    }
}

TEST_CASE("sqrt-endpoint substitution absorbs edge singularities", "[quadrature]") {
    // integral of 1/sqrt(x) on (0,1] = 2, singular at the left endpoint
    const double v = mpu::integrate_sqrt_endpoints(
        [](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 0.0, 1.0, 1e-11);
    REQUIRE(v == Approx(2.0).margin(1e-10));

    // semicircle area: integral of sqrt((1-x)(x+1)) over [-1,1] = pi/2
    const double s = mpu::integrate_sqrt_endpoints(
        [](double x) { return std::sqrt((1.0 - x) * (1.0 + x)); }, -1.0, 1.0, -1.0,
        1.0, 1e-11);
    REQUIRE(s == Approx(M_PI / 2.0).margin(1e-10));
}

TEST_CASE("bracketed root finder", "[rootfind]") {
    auto f = [](double x) { return x * x - 2.0; };
    auto df = [](double x) { return 2.0 * x; };
    REQUIRE(mpu::solve_bracketed(f, df, 0.0, 2.0) == Approx(std::sqrt(2.0)).margin(1e-13));
    REQUIRE_THROWS_AS(mpu::solve_bracketed(f, df, 2.0, 3.0), mpu::numerical_error);
}

TEST_CASE("type-7 quantiles", "[stats]") {
    std::vector<double> xs;
    for (int i = 1; i <= 100; ++i) xs.push_back(i);
    REQUIRE(mpu::median(xs) == Approx(50.5));
    REQUIRE(mpu::quantile(xs, 0.0) == Approx(1.0));
    REQUIRE(mpu::quantile(xs, 1.0) == Approx(100.0));
    REQUIRE(mpu::quantile({42.0}, 0.25) == Approx(42.0));
}

TEST_CASE("KS distances", "[stats]") {
    std::vector<double> a{0.0}, b{1.0};
    REQUIRE(mpu::ks_two_sample(a, a) == Approx(0.0));
    REQUIRE(mpu::ks_two_sample(a, b) == Approx(1.0));

    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> unif;
    std::vector<double> u, v;
    for (int i = 0; i < 57; ++i) u.push_back(unif(eng));
    for (int i = 0; i < 91; ++i) v.push_back(unif(eng));
    REQUIRE(mpu::ks_two_sample(u, v) == Approx(mpu::ks_two_sample(v, u)));

    // one-sample distance of uniforms against the exact CDF is small
    std::vector<double> big;
    for (int i = 0; i < 20000; ++i) big.push_back(unif(eng));
    const double d = mpu::ks_vs_cdf(big, [](double x) { return std::clamp(x, 0.0, 1.0); });
    REQUIRE(d < 0.02);
}

TEST_CASE("least-squares slope", "[stats]") {
    std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
    REQUIRE(mpu::ls_slope(x, y) == Approx(2.0));
    std::vector<double> flat{1, 1, 1, 1};
    REQUIRE_THROWS_AS(mpu::ls_slope(flat, y), mpu::numerical_error);
}
