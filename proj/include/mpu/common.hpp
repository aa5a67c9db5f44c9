#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mpu {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

// An M x N data matrix X with entries on the 1/sqrt(M) scale.
using DataMatrix = Eigen::MatrixXd;

// Error taxonomy mirrors the CLI exit codes: config -> 2, data -> 3,
// numerical -> 4.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Spectral parameter z = E + i*eta with eta > 0.
struct SpectralPoint {
    double E = 0.0;
    double eta = 0.0;

    SpectralPoint() = default;
    SpectralPoint(double energy, double scale) : E(energy), eta(scale) {
        if (!(eta > 0.0))
            throw config_error("SpectralPoint requires eta > 0");
    }

    Complex z() const { return {E, eta}; }
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace mpu
