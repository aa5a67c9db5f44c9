#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "mpu/common.hpp"
#include "mpu/quadrature.hpp"
#include "mpu/rootfind.hpp"

namespace mpu {

// Deterministic quantiles gamma_1 > gamma_2 > ... of the MP law, defined by
// n_c(gamma_j) = j/N.
struct ClassicalLocations {
    std::vector<double> gamma;
    int count = 0;
};

// Exact Marchenko-Pastur reference for the ratio d = N/M: edges, density,
// Stieltjes transform, tail mass and classical eigenvalue locations, all in
// the spectral units of H = X^T X.
class MPModel {
public:
    explicit MPModel(double d) : d_(d) {
        if (!(d > 0.0) || !std::isfinite(d))
            throw config_error("MP ratio d must be positive and finite");
        const double r = std::sqrt(d);
        lambda_minus_ = (1.0 - r) * (1.0 - r);
        lambda_plus_ = (1.0 + r) * (1.0 + r);
    }

    double d() const { return d_; }
    double lambda_minus() const { return lambda_minus_; }
    double lambda_plus() const { return lambda_plus_; }
    bool hard_edge() const { return d_ == 1.0; }

    // Continuous MP density (1/(2 pi d x)) sqrt([(l+ - x)(x - l-)]_+); the
    // point mass (1 - 1/d) at 0 for d > 1 is not part of the density.
    double density(double x) const {
        if (!std::isfinite(x)) throw config_error("density: x must be finite");
        if (x <= lambda_minus_ || x >= lambda_plus_) {
            if (hard_edge() && x == 0.0)
                return std::numeric_limits<double>::infinity();
            return 0.0;
        }
        if (x == 0.0) return std::numeric_limits<double>::infinity();
        const double num = (lambda_plus_ - x) * (x - lambda_minus_);
        return std::sqrt(num / (x * x)) / (2.0 * M_PI * d_);
    }

    // Closed form (1 - d - z + i sqrt((z-l-)(l+-z))) / (2 d z) with the root
    // chosen so that Im m_c > 0, the Stieltjes-transform branch.
    Complex stieltjes(Complex z) const {
        if (!(z.imag() > 0.0))
            throw config_error("stieltjes: Im z must be positive");
        const Complex w = std::sqrt((z - lambda_minus_) * (lambda_plus_ - z));
        const Complex i(0.0, 1.0);
        Complex m = (1.0 - d_ - z + i * w) / (2.0 * d_ * z);
        if (!(m.imag() > 0.0)) m = (1.0 - d_ - z - i * w) / (2.0 * d_ * z);
        return m;
    }

    // n_c(E) = mass of the MP law at or above E. The zero-point mass for
    // d > 1 is counted exactly when E <= 0, matching the convention that the
    // empirical counting function counts lambda_j >= E.
    double tail_mass(double E) const {
        if (!std::isfinite(E)) throw config_error("tail_mass: E must be finite");
        const double atom = d_ > 1.0 ? 1.0 - 1.0 / d_ : 0.0;
        double mass = 0.0;
        if (E < lambda_plus_) {
            const double lo = std::max(E, lambda_minus_);
            mass = integrate_sqrt_endpoints([this](double x) { return density(x); },
                                            lambda_minus_, lambda_plus_, lo,
                                            lambda_plus_, 1e-11);
        }
        if (E <= 0.0) mass += atom;
        return std::min(std::max(mass, 0.0), 1.0);
    }

    // Distance of E to the nearer spectral edge.
    double kappa(double E) const {
        return std::min(std::abs(lambda_plus_ - E), std::abs(E - lambda_minus_));
    }

    // Solves n_c(gamma_j) = j/N for j = 1..count by bisection on
    // [lambda_-, lambda_+] with one Newton polish (n_c' = -density).
    ClassicalLocations classical_locations(int N) const {
        if (N < 1) throw config_error("classical_locations: N must be >= 1");
        const int M = static_cast<int>(std::lround(N / d_));
        const int count = std::min(N, M);
        const double total = tail_mass(lambda_minus_);
        ClassicalLocations locs;
        locs.count = count;
        locs.gamma.resize(static_cast<std::size_t>(count));
        double hi = lambda_plus_;
        for (int j = 1; j <= count; ++j) {
            const double target = static_cast<double>(j) / N;
            if (target > total + 1e-9)
                throw config_error("classical_locations: quantile exceeds continuous mass");
            auto f = [&](double x) { return tail_mass(x) - target; };
            auto df = [&](double x) { return -density(x); };
            // n_c is decreasing in E, so gamma_j < gamma_{j-1}; shrink the
            // bracket as we walk down from the top edge.
            double g;
            if (f(lambda_minus_) <= 0.0) {
                g = lambda_minus_;  // quantile saturates at the lower edge
            } else {
                g = solve_bracketed(f, df, lambda_minus_, hi, 1e-13);
            }
            locs.gamma[static_cast<std::size_t>(j - 1)] = g;
            hi = g;
        }
        return locs;
    }

private:
    double d_;
    double lambda_minus_;
    double lambda_plus_;
};

}  // namespace mpu
