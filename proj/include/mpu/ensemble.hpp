#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <json.hpp>

#include "mpu/common.hpp"
#include "mpu/rng.hpp"

namespace mpu {

enum class EnsembleKind { gaussian, rademacher, two_point, self_normalized };

inline std::string to_string(EnsembleKind k) {
    switch (k) {
        case EnsembleKind::gaussian: return "gaussian";
        case EnsembleKind::rademacher: return "rademacher";
        case EnsembleKind::two_point: return "two_point";
        case EnsembleKind::self_normalized: return "self_normalized";
    }
    throw config_error("unknown ensemble kind");
}

inline EnsembleKind ensemble_kind_from_string(const std::string& s) {
    if (s == "gaussian") return EnsembleKind::gaussian;
    if (s == "rademacher") return EnsembleKind::rademacher;
    if (s == "two_point") return EnsembleKind::two_point;
    if (s == "self_normalized") return EnsembleKind::self_normalized;
    throw config_error("unknown ensemble kind: " + s);
}

// Recipe for the law of the rescaled entries sqrt(M)*x_ij.
//
// two_point places atoms {a, -1/a} with P(a) = 1/(1+a^2), the unique
// mean-0/variance-1 two-atom law with positive atom a.
//
// var_scale multiplies the entry variance and exists solely as a
// negative-control knob for comparison experiments; the mean-0/variance-1
// contract holds whenever it is 1.
struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::gaussian;
    int n_rows = 0;  // M
    int n_cols = 0;  // N
    std::uint64_t seed = 0;
    double two_point_a = 2.0;
    double var_scale = 1.0;
    double theta = 0.05;

    double ratio() const { return static_cast<double>(n_cols) / n_rows; }
    bool square() const { return n_rows == n_cols; }

    void validate() const {
        if (n_rows < 1 || n_cols < 1)
            throw config_error("ensemble dimensions must be positive");
        if (!(theta > 0.0 && theta < 1.0))
            throw config_error("aspect guard theta must lie in (0,1)");
        const double d = ratio();
        if (!(d > theta && d < 1.0 / theta))
            throw config_error("aspect ratio N/M outside (theta, 1/theta)");
        if (kind == EnsembleKind::two_point && !(two_point_a > 0.0))
            throw config_error("two_point atom must satisfy a > 0");
        if (!(var_scale > 0.0))
            throw config_error("var_scale must be positive");
        if (kind == EnsembleKind::self_normalized && var_scale != 1.0)
            throw config_error("self_normalized columns are scale invariant; var_scale must be 1");
    }

    nlohmann::json to_json() const {
        nlohmann::json params = nlohmann::json::object();
        if (kind == EnsembleKind::two_point) params["a"] = two_point_a;
        if (var_scale != 1.0) params["var_scale"] = var_scale;
        if (theta != 0.05) params["theta"] = theta;
        return nlohmann::json{{"kind", to_string(kind)},
                              {"params", params},
                              {"N", n_cols},
                              {"M", n_rows},
                              {"seed", seed}};
    }

    static EnsembleSpec from_json(const nlohmann::json& j) {
        EnsembleSpec spec;
        spec.kind = ensemble_kind_from_string(j.at("kind").get<std::string>());
        spec.n_cols = j.at("N").get<int>();
        spec.n_rows = j.at("M").get<int>();
        spec.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("params")) {
            const auto& p = j.at("params");
            if (p.contains("a")) spec.two_point_a = p.at("a").get<double>();
            if (p.contains("var_scale")) spec.var_scale = p.at("var_scale").get<double>();
            if (p.contains("theta")) spec.theta = p.at("theta").get<double>();
        }
        spec.validate();
        return spec;
    }
};

// Analytic first four moments of sqrt(M)*q_ij.
inline std::array<double, 4> moment_profile(const EnsembleSpec& spec) {
    spec.validate();
    std::array<double, 4> m{};
    switch (spec.kind) {
        case EnsembleKind::gaussian:
            m = {0.0, 1.0, 0.0, 3.0};
            break;
        case EnsembleKind::rademacher:
            m = {0.0, 1.0, 0.0, 1.0};
            break;
        case EnsembleKind::two_point: {
            const double a = spec.two_point_a;
            m = {0.0, 1.0, a - 1.0 / a, a * a - 1.0 + 1.0 / (a * a)};
            break;
        }
        case EnsembleKind::self_normalized: {
            // h1^2/||h||^2 is Beta(1/2,(M-1)/2); its second moment gives the
            // exact fourth entry moment 3M/(M+2).
            const double M = static_cast<double>(spec.n_rows);
            m = {0.0, 1.0, 0.0, 3.0 * M / (M + 2.0)};
            break;
        }
    }
    const double s = std::sqrt(spec.var_scale);
    return {m[0] * s, m[1] * s * s, m[2] * s * s * s, m[3] * s * s * s * s};
}

// Column-normalizes X: output column j is x_j / ||x_j||_2.
inline DataMatrix self_normalize(const DataMatrix& X) {
    DataMatrix out = X;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double norm = out.col(j).norm();
        if (!(norm > 0.0))
            throw numerical_error("self_normalize: zero column " + std::to_string(j));
        out.col(j) /= norm;
    }
    return out;
}

// Draws the M x N data matrix for the given trial. Pure in (spec, trial).
inline DataMatrix sample_matrix(const EnsembleSpec& spec, int trial) {
    spec.validate();
    if (trial < 0) throw config_error("trial index must be nonnegative");
    const int M = spec.n_rows;
    const int N = spec.n_cols;
    DataMatrix X(M, N);

    if (spec.kind == EnsembleKind::self_normalized) {
        auto eng = make_engine(spec.seed, static_cast<std::uint64_t>(trial),
                               Stream::self_norm_base);
        std::normal_distribution<double> normal;
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < M; ++i) X(i, j) = normal(eng);
        return self_normalize(X);
    }

    auto eng = make_engine(spec.seed, static_cast<std::uint64_t>(trial), Stream::matrix);
    const double scale = std::sqrt(spec.var_scale / M);
    switch (spec.kind) {
        case EnsembleKind::gaussian: {
            std::normal_distribution<double> normal;
            for (int j = 0; j < N; ++j)
                for (int i = 0; i < M; ++i) X(i, j) = scale * normal(eng);
            break;
        }
        case EnsembleKind::rademacher: {
            std::bernoulli_distribution coin(0.5);
            for (int j = 0; j < N; ++j)
                for (int i = 0; i < M; ++i) X(i, j) = coin(eng) ? scale : -scale;
            break;
        }
        case EnsembleKind::two_point: {
            const double a = spec.two_point_a;
            const double p = 1.0 / (1.0 + a * a);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            const double hi = scale * a;
            const double lo = -scale / a;
            for (int j = 0; j < N; ++j)
                for (int i = 0; i < M; ++i) X(i, j) = unif(eng) < p ? hi : lo;
            break;
        }
        case EnsembleKind::self_normalized:
            break;  // handled above
    }
    return X;
}

// e^{-t/2} X0 + sqrt(1-e^{-t}) V with V fresh Gaussian of entry variance 1/M;
// realizes the law of the OU flow at time t in one shot.
inline DataMatrix gaussian_interpolate(const DataMatrix& X0, double t,
                                       std::uint64_t seed, int trial) {
    if (t < 0.0) throw config_error("gaussian_interpolate requires t >= 0");
    if (t == 0.0) return X0;
    const double keep = std::exp(-0.5 * t);
    const double mix = std::sqrt(1.0 - std::exp(-t));
    auto eng = make_engine(seed, static_cast<std::uint64_t>(trial), Stream::interpolate);
    std::normal_distribution<double> normal;
    const double entry_sd = 1.0 / std::sqrt(static_cast<double>(X0.rows()));
    DataMatrix out(X0.rows(), X0.cols());
    for (Eigen::Index j = 0; j < X0.cols(); ++j)
        for (Eigen::Index i = 0; i < X0.rows(); ++i)
            out(i, j) = keep * X0(i, j) + mix * entry_sd * normal(eng);
    return out;
}

}  // namespace mpu
