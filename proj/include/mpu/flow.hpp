#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "mpu/common.hpp"
#include "mpu/ensemble.hpp"
#include "mpu/mp_model.hpp"
#include "mpu/parallel.hpp"
#include "mpu/rng.hpp"
#include "mpu/spectral.hpp"
#include "mpu/stats.hpp"

namespace mpu {

// Matrix-valued OU flow dX = dB/sqrt(M) - X dt/2; a FlowState owns its noise
// stream and is single-owner mutable while stepping.
struct FlowState {
    DataMatrix X;
    double t = 0.0;
    int steps = 0;
    std::mt19937_64 rng;
};

inline FlowState make_flow_state(DataMatrix X0, std::uint64_t seed, int trial) {
    FlowState st;
    st.X = std::move(X0);
    st.rng = make_engine(seed, static_cast<std::uint64_t>(trial), Stream::ou_flow);
    return st;
}

// One Euler-Maruyama step X <- X + sqrt(dt/M) Xi - (dt/2) X. The noise can be
// switched off to expose the deterministic drift in tests.
inline void ou_step(FlowState& state, double dt, bool with_noise = true) {
    if (!(dt > 0.0)) throw config_error("ou_step: dt must be positive");
    if (dt > 0.1) throw config_error("ou_step: dt above 0.1 stability guard");
    const double drift = 1.0 - 0.5 * dt;
    if (with_noise) {
        std::normal_distribution<double> normal;
        const double amp = std::sqrt(dt / static_cast<double>(state.X.rows()));
        for (Eigen::Index j = 0; j < state.X.cols(); ++j)
            for (Eigen::Index i = 0; i < state.X.rows(); ++i)
                state.X(i, j) = drift * state.X(i, j) + amp * normal(state.rng);
    } else {
        state.X *= drift;
    }
    state.t += dt;
    state.steps += 1;
}

// Two-sample KS between top-eigenvalue draws from (a) the stepped OU flow at
// time t and (b) the closed-form Gaussian interpolation, over independent
// noise per trial.
inline double flow_vs_closed_form(const DataMatrix& X0, double t, int steps,
                                  int trials, std::uint64_t seed, int threads = 0) {
    if (t < 0.0) throw config_error("flow_vs_closed_form: t must be >= 0");
    if (steps < static_cast<int>(std::ceil(100.0 * t)))
        throw config_error("flow_vs_closed_form: steps below 100*t discretization guard");
    if (trials < 1) throw config_error("flow_vs_closed_form: trials must be >= 1");
    std::vector<double> flowed(static_cast<std::size_t>(trials));
    std::vector<double> closed(static_cast<std::size_t>(trials));
    parallel_for(
        trials,
        [&](int trial) {
            if (t == 0.0) {
                const Spectrum S = covariance_spectrum(X0, false);
                flowed[static_cast<std::size_t>(trial)] = S.values[0];
                closed[static_cast<std::size_t>(trial)] = S.values[0];
                return;
            }
            FlowState st = make_flow_state(X0, seed, trial);
            const double dt = t / steps;
            for (int k = 0; k < steps; ++k) ou_step(st, dt);
            flowed[static_cast<std::size_t>(trial)] =
                covariance_spectrum(st.X, false).values[0];
            const DataMatrix Xt = gaussian_interpolate(X0, t, seed, trial);
            closed[static_cast<std::size_t>(trial)] =
                covariance_spectrum(Xt, false).values[0];
        },
        threads);
    return ks_two_sample(flowed, closed);
}

// Consecutive unfolded gaps N rho_c(E) (lambda_{i+1} - lambda_i) inside the
// window [E-b, E+b].
struct SpacingSample {
    double E = 0.0;
    double b = 0.0;
    std::vector<double> gaps;
    bool empty_window = false;
};

inline SpacingSample spacing_sample(const Spectrum& S, const MPModel& model,
                                    double E, double b) {
    const double margin = 0.05 * (model.lambda_plus() - model.lambda_minus());
    if (!(E - b >= model.lambda_minus() + margin &&
          E + b <= model.lambda_plus() - margin))
        throw config_error("spacing_sample: window leaves the bulk margin");
    SpacingSample out;
    out.E = E;
    out.b = b;
    std::vector<double> inside;
    for (int j = 0; j < S.values.size(); ++j) {
        const double l = S.values[j];
        if (l >= E - b && l <= E + b) inside.push_back(l);
    }
    std::sort(inside.begin(), inside.end());
    if (inside.size() < 2) {
        out.empty_window = inside.empty();
        return out;
    }
    const double unfold = S.cols * model.density(E);
    out.gaps.reserve(inside.size() - 1);
    for (std::size_t i = 0; i + 1 < inside.size(); ++i)
        out.gaps.push_back(unfold * (inside[i + 1] - inside[i]));
    return out;
}

// Synthetic spectrum with i.i.d. eigenvalues drawn from the MP density via
// inverse-CDF sampling; Poisson local statistics, used as a negative control.
inline Spectrum poisson_surrogate_spectrum(const MPModel& model, int N, int M,
                                           std::uint64_t seed, int trial) {
    const int quantiles = 2048;
    // piecewise-linear inverse CDF through the classical locations
    static thread_local struct {
        double d = -1.0;
        std::vector<double> gamma;
    } cache;
    if (cache.d != model.d()) {
        cache.gamma = model.classical_locations(quantiles).gamma;
        cache.d = model.d();
    }
    const double total_mass = std::min(1.0, 1.0 / model.d());
    auto eng = make_engine(seed, static_cast<std::uint64_t>(trial), Stream::surrogate);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Spectrum S;
    S.rows = M;
    S.cols = N;
    S.values = Vector::Zero(N);
    const int live = std::min(N, M);
    const auto& g = cache.gamma;
    const int count = static_cast<int>(g.size());
    // node i has tail mass i/quantiles; node 0 is the top edge itself
    auto node = [&](int i) {
        return i <= 0 ? model.lambda_plus() : g[static_cast<std::size_t>(i - 1)];
    };
    for (int k = 0; k < live; ++k) {
        const double tau = unif(eng) * total_mass;  // target tail mass
        const double h = tau * quantiles;
        const int i = std::min(count - 1, static_cast<int>(std::floor(h)));
        const double frac = h - i;
        S.values[k] = node(i) + frac * (node(i + 1) - node(i));
    }
    std::sort(S.values.data(), S.values.data() + N, std::greater<double>());
    return S;
}

// Pooled unfolded-gap KS distance between two ensembles at a bulk window.
// Optional flow times pre-relax either side by the closed-form interpolation.
inline double bulk_compare(const EnsembleSpec& specA, const EnsembleSpec& specB,
                           double E, double b, int trials, double flow_tA = 0.0,
                           double flow_tB = 0.0, int threads = 0) {
    if (specA.n_rows != specB.n_rows || specA.n_cols != specB.n_cols)
        throw config_error("bulk_compare: ensembles must share (N, M)");
    if (trials < 1) throw config_error("bulk_compare: trials must be >= 1");
    const MPModel model(specA.ratio());
    std::vector<std::vector<double>> gapsA(static_cast<std::size_t>(trials));
    std::vector<std::vector<double>> gapsB(static_cast<std::size_t>(trials));
    parallel_for(
        2 * trials,
        [&](int i) {
            const int trial = i / 2;
            const bool first = (i % 2 == 0);
            const EnsembleSpec& spec = first ? specA : specB;
            const double ft = first ? flow_tA : flow_tB;
            DataMatrix X = sample_matrix(spec, trial);
            if (ft > 0.0) X = gaussian_interpolate(X, ft, spec.seed, trial);
            const Spectrum S = covariance_spectrum(X, false);
            auto& slot = first ? gapsA[static_cast<std::size_t>(trial)]
                               : gapsB[static_cast<std::size_t>(trial)];
            slot = spacing_sample(S, model, E, b).gaps;
        },
        threads);
    std::vector<double> pooledA, pooledB;
    for (const auto& g : gapsA) pooledA.insert(pooledA.end(), g.begin(), g.end());
    for (const auto& g : gapsB) pooledB.insert(pooledB.end(), g.begin(), g.end());
    return ks_two_sample(pooledA, pooledB);
}

}  // namespace mpu
