#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mpu/common.hpp"
#include "mpu/ensemble.hpp"
#include "mpu/mp_model.hpp"
#include "mpu/parallel.hpp"
#include "mpu/rng.hpp"
#include "mpu/spectral.hpp"
#include "mpu/stats.hpp"

namespace mpu {

// One Tracy-Widom-rescaled extreme eigenvalue.
struct EdgeSample {
    std::string ens;
    int trial = 0;
    int k = 0;  // 1-based rank
    double s = 0.0;
};

// (M lambda_k - (sqrt(N)+sqrt(M))^2) / ((sqrt(N)+sqrt(M)) (1/sqrt(N)+1/sqrt(M))^{1/3})
inline std::vector<double> rescale_topk(const Spectrum& S, int k) {
    if (k < 1 || k > std::min(S.rows, S.cols))
        throw config_error("rescale_topk: k outside [1, min(N,M)]");
    const double rn = std::sqrt(static_cast<double>(S.cols));
    const double rm = std::sqrt(static_cast<double>(S.rows));
    const double center = (rn + rm) * (rn + rm);
    const double scale = (rn + rm) * std::cbrt(1.0 / rn + 1.0 / rm);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r)
        out.push_back((S.rows * S.values[r] - center) / scale);
    return out;
}

// Reference TW1 CDF table with monotone cubic (Fritsch-Carlson) evaluation;
// interpolation stays inside each bracket, so monotonicity survives.
class TW1Table {
public:
    static TW1Table from_points(std::vector<double> s, std::vector<double> f) {
        TW1Table t;
        t.s_ = std::move(s);
        t.f_ = std::move(f);
        t.validate();
        t.build_slopes();
        return t;
    }

    static TW1Table load_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw data_error("TW1 table: cannot open " + path);
        std::string line;
        if (!std::getline(in, line) || line.rfind("s,F1", 0) != 0)
            throw data_error("TW1 table: missing 's,F1' header in " + path);
        std::vector<double> s, f;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos)
                throw data_error("TW1 table: malformed row '" + line + "'");
            try {
                s.push_back(std::stod(line.substr(0, comma)));
                f.push_back(std::stod(line.substr(comma + 1)));
            } catch (const std::exception&) {
                throw data_error("TW1 table: unparsable row '" + line + "'");
            }
        }
        return from_points(std::move(s), std::move(f));
    }

    void save_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw data_error("TW1 table: cannot write " + path);
        out << "s,F1\n";
        char buf[64];
        for (std::size_t i = 0; i < s_.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.4f,%.15g\n", s_[i], f_[i]);
            out << buf;
        }
    }

    void validate() const {
        if (s_.size() != f_.size() || s_.size() < 2)
            throw data_error("TW1 table: need matched s/F1 columns");
        if (s_.front() > -10.0 + 1e-9 || s_.back() < 6.0 - 1e-9)
            throw data_error("TW1 table: grid must cover [-10, 6]");
        for (std::size_t i = 1; i < s_.size(); ++i) {
            if (!(s_[i] > s_[i - 1]))
                throw data_error("TW1 table: s not strictly increasing");
            if (s_[i] - s_[i - 1] > 0.01 + 1e-9)
                throw data_error("TW1 table: grid spacing exceeds 0.01");
            if (!(f_[i] >= f_[i - 1]))
                throw data_error("TW1 table: F1 not monotone");
        }
        for (double v : f_)
            if (!(v >= 0.0 && v <= 1.0))
                throw data_error("TW1 table: F1 outside [0,1]");
        if (f_.front() > 1e-6)
            throw data_error("TW1 table: left tail exceeds 1e-6");
        if (f_.back() < 1.0 - 1e-6)
            throw data_error("TW1 table: right tail gap exceeds 1e-6");
    }

    double cdf(double s) const {
        if (s <= s_.front()) return 0.0;
        if (s >= s_.back()) return 1.0;
        const auto it = std::upper_bound(s_.begin(), s_.end(), s);
        const std::size_t k = static_cast<std::size_t>(it - s_.begin()) - 1;
        const double h = s_[k + 1] - s_[k];
        const double t = (s - s_[k]) / h;
        const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        const double h10 = t * (1.0 - t) * (1.0 - t);
        const double h01 = t * t * (3.0 - 2.0 * t);
        const double h11 = t * t * (t - 1.0);
        return h00 * f_[k] + h10 * h * slope_[k] + h01 * f_[k + 1] +
               h11 * h * slope_[k + 1];
    }

    const std::vector<double>& grid() const { return s_; }
    const std::vector<double>& values() const { return f_; }

private:
    void build_slopes() {
        const std::size_t n = s_.size();
        std::vector<double> delta(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k)
            delta[k] = (f_[k + 1] - f_[k]) / (s_[k + 1] - s_[k]);
        slope_.assign(n, 0.0);
        slope_[0] = delta[0];
        slope_[n - 1] = delta[n - 2];
        for (std::size_t k = 1; k + 1 < n; ++k) {
            if (delta[k - 1] * delta[k] <= 0.0) {
                slope_[k] = 0.0;
            } else {
                const double h0 = s_[k] - s_[k - 1];
                const double h1 = s_[k + 1] - s_[k];
                const double w0 = 2.0 * h1 + h0;
                const double w1 = h1 + 2.0 * h0;
                slope_[k] = (w0 + w1) / (w0 / delta[k - 1] + w1 / delta[k]);
            }
        }
    }

    std::vector<double> s_, f_;
    std::vector<double> slope_;
};

inline double tw1_cdf(const TW1Table& table, double s) { return table.cdf(s); }

// trials x k rescaled extreme-eigenvalue samples, deterministic in
// (spec, trial range).
inline std::vector<EdgeSample> edge_montecarlo(const EnsembleSpec& spec, int trials,
                                               int k, int threads = 0) {
    if (trials < 1) throw config_error("edge_montecarlo: trials must be >= 1");
    spec.validate();
    std::vector<std::vector<double>> per_trial(static_cast<std::size_t>(trials));
    parallel_for(
        trials,
        [&](int t) {
            const Spectrum S = covariance_spectrum(sample_matrix(spec, t), false);
            per_trial[static_cast<std::size_t>(t)] = rescale_topk(S, k);
        },
        threads);
    std::vector<EdgeSample> out;
    out.reserve(static_cast<std::size_t>(trials) * k);
    const std::string tag = to_string(spec.kind);
    for (int t = 0; t < trials; ++t)
        for (int r = 0; r < k; ++r)
            out.push_back({tag, t, r + 1, per_trial[static_cast<std::size_t>(t)]
                                              [static_cast<std::size_t>(r)]});
    return out;
}

// Largest violation of the two-sided shifted CDF sandwich
//   F_v(s - eps) - delta <= F_w(s) <= F_v(s + eps) + delta
// over the s grid, with slack delta = 3x a binomial-CI width at the sample
// sizes. Zero means the empirical inequality holds everywhere.
inline double sandwich_check(std::span<const double> v, std::span<const double> w,
                             double epsilon, std::span<const double> s_grid) {
    if (v.empty() || w.empty())
        throw config_error("sandwich_check: empty sample set");
    std::vector<double> sv(v.begin(), v.end());
    std::vector<double> sw(w.begin(), w.end());
    std::sort(sv.begin(), sv.end());
    std::sort(sw.begin(), sw.end());
    const double delta =
        3.0 * (0.5 / std::sqrt(static_cast<double>(sv.size())) +
               0.5 / std::sqrt(static_cast<double>(sw.size())));
    double violation = 0.0;
    for (double s : s_grid) {
        const double lower = ecdf(sv, s - epsilon) - delta - ecdf(sw, s);
        const double upper = ecdf(sw, s) - ecdf(sv, s + epsilon) - delta;
        violation = std::max({violation, lower, upper});
    }
    return violation;
}

enum class TestFn { identity, square, cutoff };

inline std::string to_string(TestFn f) {
    switch (f) {
        case TestFn::identity: return "identity";
        case TestFn::square: return "square";
        case TestFn::cutoff: return "cutoff";
    }
    throw config_error("unknown test function");
}

inline TestFn test_fn_from_string(const std::string& s) {
    if (s == "identity") return TestFn::identity;
    if (s == "square") return TestFn::square;
    if (s == "cutoff") return TestFn::cutoff;
    throw config_error("unknown test function: " + s);
}

namespace detail {
// Smooth cutoff q: 1 on |x| <= 1/9, 0 on |x| >= 2/9, decreasing in |x|.
inline double smooth_cutoff(double x) {
    const double a = 1.0 / 9.0, b = 2.0 / 9.0;
    const double ax = std::abs(x);
    if (ax <= a) return 1.0;
    if (ax >= b) return 0.0;
    auto bump = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
    const double t = (ax - a) / (b - a);
    return bump(1.0 - t) / (bump(1.0 - t) + bump(t));
}
}  // namespace detail

inline double apply_test_fn(TestFn f, double x) {
    switch (f) {
        case TestFn::identity: return x;
        case TestFn::square: return x * x;
        case TestFn::cutoff: return detail::smooth_cutoff(x);
    }
    throw config_error("unknown test function");
}

// Scales for the edge Green-function comparison: eta = N^{-2/3-eps} with the
// smoothing companions ell = eta/2 and eta1 = N^{-2/3-9 eps}.
struct GfctConfig {
    double E = 0.0;
    double eta = 0.0;
    double ell = 0.0;
    double eta1 = 0.0;
    double epsilon = 0.0;
    TestFn fn = TestFn::identity;

    static GfctConfig edge_default(int N, double d, double eps,
                                   TestFn fn = TestFn::identity,
                                   double E_offset = 0.0) {
        if (!(eps > 0.0 && eps <= 0.1))
            throw config_error("GfctConfig: epsilon must lie in (0, 0.1]");
        const MPModel model(d);
        GfctConfig cfg;
        cfg.epsilon = eps;
        cfg.eta = std::pow(N, -2.0 / 3.0 - eps);
        cfg.ell = 0.5 * cfg.eta;
        cfg.eta1 = std::pow(N, -2.0 / 3.0 - 9.0 * eps);
        cfg.E = model.lambda_plus() + E_offset;
        cfg.fn = fn;
        if (std::abs(E_offset) > std::pow(N, -2.0 / 3.0 + eps))
            throw config_error("GfctConfig: |E - lambda_+| exceeds N^{-2/3+eps}");
        return cfg;
    }
};

struct GfctResult {
    double delta_F = 0.0;
    double mc_error = 0.0;
    double mean_v = 0.0;
    double mean_w = 0.0;
};

namespace detail {
inline double edge_functional(const EnsembleSpec& spec, int trial,
                              const GfctConfig& cfg) {
    const Spectrum S = covariance_spectrum(sample_matrix(spec, trial), false);
    const SpectralPoint z(cfg.E, cfg.eta);
    const Complex m = empirical_stieltjes(S, z);
    return apply_test_fn(cfg.fn, S.cols * cfg.eta * m.imag());
}
}  // namespace detail

// |avg_v F(N eta Im m) - avg_w F(N eta Im m)| at the edge point, with the
// pooled Monte Carlo standard error. The two-moment precondition mirrors the
// comparison theorem's hypothesis; enforce_moments=false is the negative
// control's escape hatch.
inline GfctResult gfct_experiment(const EnsembleSpec& spec_v,
                                  const EnsembleSpec& spec_w, const GfctConfig& cfg,
                                  int trials, bool enforce_moments = true,
                                  int threads = 0) {
    if (trials < 2) throw config_error("gfct_experiment: trials must be >= 2");
    if (spec_v.n_rows != spec_w.n_rows || spec_v.n_cols != spec_w.n_cols)
        throw config_error("gfct_experiment: ensembles must share (N, M)");
    if (enforce_moments) {
        const auto mv = moment_profile(spec_v);
        const auto mw = moment_profile(spec_w);
        if (std::abs(mv[0] - mw[0]) > 1e-12 || std::abs(mv[1] - mw[1]) > 1e-12)
            throw config_error("gfct_experiment: first two moments do not match");
    }
    std::vector<double> fv(static_cast<std::size_t>(trials)),
        fw(static_cast<std::size_t>(trials));
    parallel_for(
        2 * trials,
        [&](int i) {
            const int t = i / 2;
            if (i % 2 == 0)
                fv[static_cast<std::size_t>(t)] = detail::edge_functional(spec_v, t, cfg);
            else
                fw[static_cast<std::size_t>(t)] = detail::edge_functional(spec_w, t, cfg);
        },
        threads);
    GfctResult r;
    r.mean_v = mean(fv);
    r.mean_w = mean(fw);
    r.delta_F = std::abs(r.mean_v - r.mean_w);
    r.mc_error = std::sqrt(sample_variance(fv) / trials + sample_variance(fw) / trials);
    return r;
}

struct ColumnSwapResult {
    double f_original = 0.0;
    double f_swapped = 0.0;
    Complex m_original;
    Complex m_swapped;

    double difference() const { return f_original - f_swapped; }
};

// Replaces column gamma (0-based) by a fresh Gaussian column of entry
// variance 1/M and evaluates the edge functional for both matrices; the
// single-swap step of the telescoping comparison.
inline ColumnSwapResult column_swap_diff(const DataMatrix& X_v, int gamma,
                                         const GfctConfig& cfg, std::uint64_t seed,
                                         int gaussian_trial) {
    const int N = static_cast<int>(X_v.cols());
    if (gamma < 0 || gamma >= N)
        throw config_error("column_swap_diff: gamma out of range");
    DataMatrix X_w = X_v;
    auto eng = make_engine(seed, static_cast<std::uint64_t>(gaussian_trial),
                           Stream::column_swap);
    std::normal_distribution<double> normal;
    const double sd = 1.0 / std::sqrt(static_cast<double>(X_v.rows()));
    for (Eigen::Index i = 0; i < X_w.rows(); ++i) X_w(i, gamma) = sd * normal(eng);

    const SpectralPoint z(cfg.E, cfg.eta);
    ColumnSwapResult r;
    const Spectrum Sv = covariance_spectrum(X_v, false);
    const Spectrum Sw = covariance_spectrum(X_w, false);
    r.m_original = empirical_stieltjes(Sv, z);
    r.m_swapped = empirical_stieltjes(Sw, z);
    r.f_original = apply_test_fn(cfg.fn, N * cfg.eta * r.m_original.imag());
    r.f_swapped = apply_test_fn(cfg.fn, N * cfg.eta * r.m_swapped.imag());
    return r;
}

}  // namespace mpu
