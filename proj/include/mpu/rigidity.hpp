#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "mpu/common.hpp"
#include "mpu/mp_model.hpp"
#include "mpu/spectral.hpp"

namespace mpu {

struct RigidityRow {
    int j = 0;       // 1-based rank
    int jtilde = 0;  // distance to the nearer spectral end
    double lambda = 0.0;
    double gamma = 0.0;
    double raw_dev = 0.0;
    double normalized_dev = 0.0;  // N^{2/3} jtilde^{1/3} |lambda_j - gamma_j|
};

struct RigidityReport {
    std::vector<RigidityRow> rows;
    double max_normalized_dev = 0.0;
};

// Compares lambda_j against gamma_j for j = 1..min(N,M); the kernel block for
// d > 1 is excluded per the min(N,M) indexing.
inline RigidityReport rigidity_report(const Spectrum& S,
                                      const ClassicalLocations& locs) {
    const int count = std::min(S.cols, S.rows);
    if (locs.count != count)
        throw config_error("rigidity_report: location count does not match min(N,M)");
    const double n23 = std::pow(static_cast<double>(S.cols), 2.0 / 3.0);
    RigidityReport rep;
    rep.rows.reserve(static_cast<std::size_t>(count));
    for (int j = 1; j <= count; ++j) {
        RigidityRow row;
        row.j = j;
        row.jtilde = std::min(count + 1 - j, j);
        row.lambda = S.values[j - 1];
        row.gamma = locs.gamma[static_cast<std::size_t>(j - 1)];
        row.raw_dev = std::abs(row.lambda - row.gamma);
        row.normalized_dev = n23 * std::cbrt(static_cast<double>(row.jtilde)) *
                             row.raw_dev;
        rep.max_normalized_dev = std::max(rep.max_normalized_dev, row.normalized_dev);
        rep.rows.push_back(row);
    }
    return rep;
}

// max over the grid of N * |counting(E) - n_c(E)|.
inline double counting_deviation(const Spectrum& S, const MPModel& model,
                                 const std::vector<double>& E_grid) {
    if (E_grid.empty()) throw config_error("counting_deviation: empty grid");
    const double N = static_cast<double>(S.cols);
    double worst = 0.0;
    for (double E : E_grid) {
        const double dev = N * std::abs(counting(S, E) - model.tail_mass(E));
        worst = std::max(worst, dev);
    }
    return worst;
}

// Default energy grid: uniform points across the broadened support plus
// N^{-2/3}/4-spaced refinement near both edges, where the counting estimate
// is sharpest.
inline std::vector<double> default_energy_grid(const MPModel& model, int N,
                                               int uniform_points = 512) {
    std::vector<double> grid;
    const double lo = std::max(0.0, model.lambda_minus()) - 0.1;
    const double hi = model.lambda_plus() + 0.1;
    for (int k = 0; k < uniform_points; ++k)
        grid.push_back(lo + (hi - lo) * k / (uniform_points - 1));
    const double fine = std::pow(static_cast<double>(N), -2.0 / 3.0) / 4.0;
    for (double edge : {model.lambda_minus(), model.lambda_plus()})
        for (int k = -32; k <= 32; ++k) grid.push_back(edge + fine * k);
    std::sort(grid.begin(), grid.end());
    return grid;
}

struct EdgeConfinement {
    double top_gap_scaled = 0.0;  // N^{2/3} (lambda_1 - lambda_+)
    std::optional<double> bottom_gap_scaled;  // N^{2/3} (lambda_- - lambda_min!=0)
};

// Scaled overshoot of the extreme eigenvalues past the MP edges; positive
// values measure how far outside the support they sit. The bottom statistic
// is not applicable at the hard edge d = 1.
inline EdgeConfinement edge_confinement(const Spectrum& S, const MPModel& model) {
    const double n23 = std::pow(static_cast<double>(S.cols), 2.0 / 3.0);
    EdgeConfinement out;
    out.top_gap_scaled = n23 * (S.values[0] - model.lambda_plus());
    if (!model.hard_edge()) {
        double smallest = -1.0;
        for (int j = static_cast<int>(S.values.size()) - 1; j >= 0; --j) {
            if (S.values[j] > 0.0) {
                smallest = S.values[j];
                break;
            }
        }
        if (smallest > 0.0)
            out.bottom_gap_scaled = n23 * (model.lambda_minus() - smallest);
    }
    return out;
}

struct DelocalizationReport {
    std::vector<double> values;  // sqrt(N) * ||v_a||_inf per nonzero mode
    double max_value = 0.0;
};

// sqrt(N) ||v_a||_inf for every eigenvector with a nonzero eigenvalue; values
// sit in [1, sqrt(N)] by the norm pigeonhole.
inline DelocalizationReport delocalization(const Spectrum& S) {
    if (!S.has_vectors())
        throw config_error("delocalization: spectrum carries no eigenvectors");
    const double root_n = std::sqrt(static_cast<double>(S.cols));
    DelocalizationReport rep;
    for (int a = 0; a < S.values.size(); ++a) {
        if (S.values[a] <= 0.0) continue;
        const double v = root_n * S.vectors.col(a).cwiseAbs().maxCoeff();
        rep.values.push_back(v);
        rep.max_value = std::max(rep.max_value, v);
    }
    return rep;
}

}  // namespace mpu
