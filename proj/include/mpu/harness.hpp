#pragma once

#include <chrono>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mpu/common.hpp"
#include "mpu/edge.hpp"
#include "mpu/ensemble.hpp"
#include "mpu/flow.hpp"
#include "mpu/io.hpp"
#include "mpu/locallaw.hpp"
#include "mpu/parallel.hpp"
#include "mpu/rigidity.hpp"
#include "mpu/stats.hpp"

namespace mpu {

enum class ExperimentKind { locallaw, rigidity, edge, gfct, flow, bulk };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::locallaw: return "locallaw";
        case ExperimentKind::rigidity: return "rigidity";
        case ExperimentKind::edge: return "edge";
        case ExperimentKind::gfct: return "gfct";
        case ExperimentKind::flow: return "flow";
        case ExperimentKind::bulk: return "bulk";
    }
    throw config_error("unknown experiment kind");
}

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "locallaw") return ExperimentKind::locallaw;
    if (s == "rigidity") return ExperimentKind::rigidity;
    if (s == "edge") return ExperimentKind::edge;
    if (s == "gfct") return ExperimentKind::gfct;
    if (s == "flow") return ExperimentKind::flow;
    if (s == "bulk") return ExperimentKind::bulk;
    throw config_error("unknown experiment kind: " + s);
}

// Full experiment description; round-trips through JSON losslessly. The base
// seed feeds any ensemble whose own seed is left at 0.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::locallaw;
    EnsembleSpec ensemble;
    std::optional<EnsembleSpec> ensemble_b;
    int trials = 1;
    std::uint64_t seed = 1;
    std::string out = "mpu_out";
    double polylog_p = 3.0;
    int threads = 0;  // 0 = logical cores
    json params = json::object();

    json to_json() const {
        json j{{"experiment", to_string(kind)},
               {"ensemble", ensemble.to_json()},
               {"trials", trials},
               {"seed", seed},
               {"out", out},
               {"polylog_p", polylog_p},
               {"params", params}};
        if (threads != 0) j["threads"] = threads;
        if (ensemble_b) j["ensemble_b"] = ensemble_b->to_json();
        return j;
    }

    static ExperimentConfig from_json(const json& j) {
        ExperimentConfig cfg;
        try {
            cfg.kind = experiment_kind_from_string(j.at("experiment").get<std::string>());
            cfg.ensemble = EnsembleSpec::from_json(j.at("ensemble"));
            if (j.contains("ensemble_b"))
                cfg.ensemble_b = EnsembleSpec::from_json(j.at("ensemble_b"));
            if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
            if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
            if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
            if (j.contains("polylog_p")) cfg.polylog_p = j.at("polylog_p").get<double>();
            if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
            if (j.contains("params")) cfg.params = j.at("params");
        } catch (const json::exception& e) {
            throw config_error(std::string("bad experiment config: ") + e.what());
        }
        cfg.validate();
        return cfg;
    }

    void validate() const {
        if (trials < 0) throw config_error("trials must be >= 0");
        ensemble.validate();
        if (ensemble_b) {
            ensemble_b->validate();
            if (ensemble_b->n_rows != ensemble.n_rows ||
                ensemble_b->n_cols != ensemble.n_cols)
                throw config_error("paired ensembles must share (N, M)");
        }
        if (kind == ExperimentKind::gfct && !ensemble_b)
            throw config_error("gfct experiment needs ensemble_b");
        if (!(polylog_p > 0.0)) throw config_error("polylog_p must be positive");
    }

    std::string hash() const { return config_hash(to_json()); }

    double param(const std::string& key, double fallback) const {
        if (params.contains(key)) return params.at(key).get<double>();
        return fallback;
    }

    // Effective ensembles: zero seeds are derived from the base seed so two
    // paired ensembles never share a stream by accident.
    EnsembleSpec ensemble_a_effective() const {
        EnsembleSpec s = ensemble;
        if (s.seed == 0) s.seed = derive_seed(seed, 0xA, Stream::matrix);
        return s;
    }
    EnsembleSpec ensemble_b_effective() const {
        if (!ensemble_b) throw config_error("ensemble_b missing");
        EnsembleSpec s = *ensemble_b;
        if (s.seed == 0) s.seed = derive_seed(seed, 0xB, Stream::matrix);
        return s;
    }
};

namespace detail {

inline json stat_row(const std::string& hash, int trial, const std::string& stat,
                     double value) {
    return json{{"hash", hash}, {"trial", trial}, {"stat", stat}, {"value", value}};
}

inline std::vector<double> stat_values(const std::vector<json>& rows,
                                       const std::string& stat) {
    std::vector<double> out;
    for (const json& r : rows)
        if (r.value("stat", "") == stat) out.push_back(r.at("value").get<double>());
    return out;
}

// Work plan: per-trial row computation plus summary rows (trial = -1)
// recomputed from the full row set, which keeps resumed runs byte-identical
// to clean ones.
struct ExperimentPlan {
    std::function<std::vector<json>(int)> trial_rows;
    std::function<std::vector<json>(const std::vector<json>&)> summary_rows =
        [](const std::vector<json>&) { return std::vector<json>{}; };
};

inline ExperimentPlan make_plan(const ExperimentConfig& cfg) {
    const std::string hash = cfg.hash();
    const EnsembleSpec spec_a = cfg.ensemble_a_effective();
    ExperimentPlan plan;

    switch (cfg.kind) {
        case ExperimentKind::locallaw: {
            const MPModel model(spec_a.ratio());
            const int n_eta = static_cast<int>(cfg.param("n_eta", 12));
            const double eta_lo = cfg.param("eta_lo", 0.0);
            const double eta_hi = cfg.param("eta_hi", 0.0);
            const int z_subset = static_cast<int>(cfg.param("z_subset", 16));
            ScanOptions opts;
            opts.green_entries = cfg.param("green_entries", 1.0) != 0.0;
            auto grid = std::make_shared<DomainGrid>(
                cfg.params.contains("E")
                    ? DomainGrid::single_energy(
                          cfg.params.at("E").get<double>(), spec_a.n_cols, n_eta,
                          eta_lo > 0 ? eta_lo : std::pow(spec_a.n_cols, -0.9),
                          eta_hi > 0 ? eta_hi : std::pow(spec_a.n_cols, -0.2))
                    : DomainGrid::edge_and_bulk(model, spec_a.n_cols, n_eta,
                                                eta_lo, eta_hi));
            grid->polylog_exponent = cfg.polylog_p;
            plan.trial_rows = [=](int t) {
                const DataMatrix X = sample_matrix(spec_a, t);
                std::vector<json> rows;
                for (const LocalLawSample& s : scan(X, *grid, z_subset, opts))
                    rows.push_back(json{{"hash", hash},
                                        {"trial", t},
                                        {"E", s.z.E},
                                        {"eta", s.z.eta},
                                        {"m_re", s.m.real()},
                                        {"m_im", s.m.imag()},
                                        {"mc_re", s.m_c.real()},
                                        {"mc_im", s.m_c.imag()},
                                        {"Lambda", s.Lambda},
                                        {"Lambda_d", s.Lambda_d},
                                        {"Lambda_o", s.Lambda_o},
                                        {"Psi", s.Psi},
                                        {"Zavg_re", s.Z_avg.real()},
                                        {"Zavg_im", s.Z_avg.imag()},
                                        {"dev_re", s.dev.real()},
                                        {"dev_im", s.dev.imag()}});
                return rows;
            };
            break;
        }
        case ExperimentKind::rigidity: {
            auto model = std::make_shared<MPModel>(spec_a.ratio());
            auto locs = std::make_shared<ClassicalLocations>(
                model->classical_locations(spec_a.n_cols));
            auto grid = std::make_shared<std::vector<double>>(default_energy_grid(
                *model, spec_a.n_cols, static_cast<int>(cfg.param("e_grid_points", 512))));
            plan.trial_rows = [=](int t) {
                const DataMatrix X = sample_matrix(spec_a, t);
                const Spectrum S = covariance_spectrum(X, true);
                const RigidityReport rep = rigidity_report(S, *locs);
                std::vector<json> rows;
                rows.push_back(stat_row(hash, t, "max_normalized_dev",
                                        rep.max_normalized_dev));
                rows.push_back(stat_row(hash, t, "counting_dev_max",
                                        counting_deviation(S, *model, *grid)));
                rows.push_back(stat_row(hash, t, "deloc_max",
                                        delocalization(S).max_value));
                const EdgeConfinement conf = edge_confinement(S, *model);
                rows.push_back(stat_row(hash, t, "edge_top", conf.top_gap_scaled));
                if (conf.bottom_gap_scaled)
                    rows.push_back(
                        stat_row(hash, t, "edge_bottom", *conf.bottom_gap_scaled));
                return rows;
            };
            break;
        }
        case ExperimentKind::edge: {
            const int k = static_cast<int>(cfg.param("k", 1));
            const bool paired = cfg.ensemble_b.has_value();
            const EnsembleSpec spec_b =
                paired ? cfg.ensemble_b_effective() : spec_a;
            const std::string tag_a = to_string(spec_a.kind);
            const std::string tag_b = paired && to_string(spec_b.kind) == tag_a
                                          ? tag_a + "_b"
                                          : to_string(spec_b.kind);
            plan.trial_rows = [=](int t) {
                std::vector<json> rows;
                auto emit = [&](const EnsembleSpec& spec, const std::string& tag) {
                    const Spectrum S =
                        covariance_spectrum(sample_matrix(spec, t), false);
                    const std::vector<double> s = rescale_topk(S, k);
                    for (int r = 0; r < k; ++r)
                        rows.push_back(json{{"hash", hash},
                                            {"ens", tag},
                                            {"trial", t},
                                            {"k", r + 1},
                                            {"s", s[static_cast<std::size_t>(r)]}});
                };
                emit(spec_a, tag_a);
                if (paired) emit(spec_b, tag_b);
                return rows;
            };
            const double eps_default = std::pow(spec_a.n_cols, -0.1);
            const double eps = cfg.param("epsilon", eps_default);
            const int batches = static_cast<int>(cfg.param("batches", 10));
            const std::string table_path =
                cfg.params.contains("tw_table")
                    ? cfg.params.at("tw_table").get<std::string>()
                    : "";
            plan.summary_rows = [=](const std::vector<json>& rows) {
                std::map<int, std::vector<double>> a_by_trial, b_by_trial;
                for (const json& r : rows) {
                    if (!r.contains("s") || r.value("k", 0) != 1) continue;
                    const int trial = r.value("trial", 0);
                    const std::string ens = r.value("ens", "");
                    if (ens == tag_a && a_by_trial[trial].empty())
                        a_by_trial[trial].push_back(r["s"].get<double>());
                    else if (paired && ens == tag_b && b_by_trial[trial].empty())
                        b_by_trial[trial].push_back(r["s"].get<double>());
                }
                std::vector<double> sa, sb;
                for (auto& [t, v] : a_by_trial) sa.push_back(v.front());
                for (auto& [t, v] : b_by_trial) sb.push_back(v.front());
                std::vector<json> summary;
                if (!table_path.empty() && !sa.empty()) {
                    const TW1Table table = TW1Table::load_csv(table_path);
                    summary.push_back(stat_row(
                        hash, -1, "ks_tw_" + tag_a,
                        ks_vs_cdf(sa, [&](double x) { return table.cdf(x); })));
                    if (paired)
                        summary.push_back(stat_row(
                            hash, -1, "ks_tw_" + tag_b,
                            ks_vs_cdf(sb, [&](double x) { return table.cdf(x); })));
                }
                if (paired && !sa.empty() && !sb.empty()) {
                    summary.push_back(
                        stat_row(hash, -1, "ks_pair", ks_two_sample(sa, sb)));
                    // fixed sandwich grid spanning the TW coordinate range
                    std::vector<double> grid;
                    for (int g = 0; g <= 400; ++g) grid.push_back(-12.0 + 0.05 * g);
                    const int B = std::max(1, batches);
                    const int per = static_cast<int>(sa.size()) / B;
                    for (int b = 0; b < B && per > 0; ++b) {
                        std::span<const double> va(sa.data() + b * per,
                                                   static_cast<std::size_t>(per));
                        std::span<const double> vb(sb.data() + b * per,
                                                   static_cast<std::size_t>(per));
                        summary.push_back(
                            stat_row(hash, b, "sandwich_violation",
                                     sandwich_check(va, vb, eps, grid)));
                    }
                }
                return summary;
            };
            break;
        }
        case ExperimentKind::gfct: {
            const double eps = cfg.param("epsilon", 0.05);
            const TestFn fn = test_fn_from_string(
                cfg.params.contains("fn") ? cfg.params.at("fn").get<std::string>()
                                          : "identity");
            const GfctConfig gcfg = GfctConfig::edge_default(
                spec_a.n_cols, spec_a.ratio(), eps, fn, cfg.param("E_offset", 0.0));
            const EnsembleSpec spec_b = cfg.ensemble_b_effective();
            if (cfg.param("enforce_moments", 1.0) != 0.0) {
                const auto mv = moment_profile(spec_a);
                const auto mw = moment_profile(spec_b);
                if (std::abs(mv[0] - mw[0]) > 1e-12 || std::abs(mv[1] - mw[1]) > 1e-12)
                    throw config_error("gfct: first two moments do not match");
            }
            plan.trial_rows = [=](int t) {
                std::vector<json> rows;
                rows.push_back(
                    stat_row(hash, t, "F_v", edge_functional(spec_a, t, gcfg)));
                rows.push_back(
                    stat_row(hash, t, "F_w", edge_functional(spec_b, t, gcfg)));
                return rows;
            };
            plan.summary_rows = [=](const std::vector<json>& rows) {
                const std::vector<double> fv = stat_values(rows, "F_v");
                const std::vector<double> fw = stat_values(rows, "F_w");
                std::vector<json> summary;
                if (fv.size() >= 2 && fw.size() >= 2) {
                    const double mv = mean(fv), mw = mean(fw);
                    summary.push_back(stat_row(hash, -1, "mean_v", mv));
                    summary.push_back(stat_row(hash, -1, "mean_w", mw));
                    summary.push_back(stat_row(hash, -1, "delta_F", std::abs(mv - mw)));
                    summary.push_back(stat_row(
                        hash, -1, "mc_error",
                        std::sqrt(sample_variance(fv) / fv.size() +
                                  sample_variance(fw) / fw.size())));
                }
                return summary;
            };
            break;
        }
        case ExperimentKind::flow: {
            const double t_final = cfg.param("t", 0.5);
            const int steps = static_cast<int>(cfg.param("steps", 200));
            if (t_final > 0.0 && steps < static_cast<int>(std::ceil(100.0 * t_final)))
                throw config_error("flow: steps below 100*t discretization guard");
            auto X0 = std::make_shared<DataMatrix>(sample_matrix(spec_a, 0));
            const std::uint64_t seed = cfg.seed;
            plan.trial_rows = [=](int t) {
                double l_flow, l_closed;
                if (t_final == 0.0) {
                    l_flow = l_closed = covariance_spectrum(*X0, false).values[0];
                } else {
                    FlowState st = make_flow_state(*X0, seed, t);
                    const double dt = t_final / steps;
                    for (int s = 0; s < steps; ++s) ou_step(st, dt);
                    l_flow = covariance_spectrum(st.X, false).values[0];
                    l_closed = covariance_spectrum(
                                   gaussian_interpolate(*X0, t_final, seed, t), false)
                                   .values[0];
                }
                return std::vector<json>{
                    stat_row(hash, t, "lambda1_flow", l_flow),
                    stat_row(hash, t, "lambda1_interp", l_closed)};
            };
            plan.summary_rows = [=](const std::vector<json>& rows) {
                const auto f = stat_values(rows, "lambda1_flow");
                const auto c = stat_values(rows, "lambda1_interp");
                std::vector<json> summary;
                if (!f.empty() && !c.empty())
                    summary.push_back(
                        stat_row(hash, -1, "ks_flow_vs_closed", ks_two_sample(f, c)));
                return summary;
            };
            break;
        }
        case ExperimentKind::bulk: {
            auto model = std::make_shared<MPModel>(spec_a.ratio());
            const double E = cfg.param(
                "E", 0.5 * (model->lambda_minus() + model->lambda_plus()));
            const double b = cfg.param("b", 0.2);
            const double ft_a = cfg.param("flow_t_a", 0.0);
            const double ft_b = cfg.param("flow_t_b", 0.0);
            const bool poisson = cfg.param("poisson_control", 0.0) != 0.0;
            const bool paired = cfg.ensemble_b.has_value() || poisson;
            const EnsembleSpec spec_b =
                cfg.ensemble_b ? cfg.ensemble_b_effective() : spec_a;
            const std::uint64_t seed = cfg.seed;
            plan.trial_rows = [=](int t) {
                std::vector<json> rows;
                auto emit = [&](const std::string& tag, const Spectrum& S) {
                    rows.push_back(json{{"hash", hash},
                                        {"trial", t},
                                        {"E", E},
                                        {"b", b},
                                        {"ens", tag},
                                        {"gaps", spacing_sample(S, *model, E, b).gaps}});
                };
                DataMatrix Xa = sample_matrix(spec_a, t);
                if (ft_a > 0.0) Xa = gaussian_interpolate(Xa, ft_a, spec_a.seed, t);
                emit("a", covariance_spectrum(Xa, false));
                if (poisson) {
                    emit("poisson",
                         poisson_surrogate_spectrum(*model, spec_a.n_cols,
                                                    spec_a.n_rows, seed, t));
                } else if (paired) {
                    DataMatrix Xb = sample_matrix(spec_b, t);
                    if (ft_b > 0.0)
                        Xb = gaussian_interpolate(Xb, ft_b, spec_b.seed, t);
                    emit("b", covariance_spectrum(Xb, false));
                }
                return rows;
            };
            if (paired) {
                plan.summary_rows = [=](const std::vector<json>& rows) {
                    std::vector<double> pa, pb;
                    for (const json& r : rows) {
                        if (!r.contains("gaps")) continue;
                        auto& dst = r.value("ens", "") == "a" ? pa : pb;
                        for (double g : r["gaps"]) dst.push_back(g);
                    }
                    std::vector<json> summary;
                    if (!pa.empty() && !pb.empty())
                        summary.push_back(
                            stat_row(hash, -1, "ks_bulk", ks_two_sample(pa, pb)));
                    return summary;
                };
            }
            break;
        }
    }
    return plan;
}

}  // namespace detail

struct RunResult {
    std::string data_path;
    std::string meta_path;
    std::size_t rows = 0;
};

// Runs the experiment and writes <out>.jsonl plus <out>.meta.json. Data bytes
// are deterministic for a fixed config; wall time lives only in the metadata
// file. With resume=true, trials already present in the data file are kept
// and exactly the missing ones are recomputed.
inline RunResult run(ExperimentConfig cfg, bool resume = false) {
    if (const char* env = std::getenv("MPU_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw config_error("MPU_SEED must be an unsigned integer");
        }
    }
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const std::string hash = cfg.hash();
    RunResult result;
    result.data_path = cfg.out + ".jsonl";
    result.meta_path = cfg.out + ".meta.json";

    std::map<int, std::vector<json>> kept;
    if (resume && std::filesystem::exists(result.data_path)) {
        for (json& row : load_jsonl(result.data_path)) {
            if (row.value("hash", "") != hash)
                throw data_error("resume: existing rows carry a different config hash");
            const int t = row.value("trial", -1);
            if (t >= 0 && t < cfg.trials) kept[t].push_back(std::move(row));
        }
    }

    std::vector<int> todo;
    for (int t = 0; t < cfg.trials; ++t)
        if (!kept.count(t)) todo.push_back(t);

    const detail::ExperimentPlan plan = detail::make_plan(cfg);
    std::vector<std::vector<json>> fresh(todo.size());
    parallel_for(
        static_cast<int>(todo.size()),
        [&](int i) {
            fresh[static_cast<std::size_t>(i)] =
                plan.trial_rows(todo[static_cast<std::size_t>(i)]);
        },
        cfg.threads);
    for (std::size_t i = 0; i < todo.size(); ++i)
        kept[todo[i]] = std::move(fresh[i]);

    std::vector<json> all_rows;
    for (int t = 0; t < cfg.trials; ++t) {
        const auto it = kept.find(t);
        if (it == kept.end()) continue;
        for (const json& r : it->second) all_rows.push_back(r);
    }
    for (const json& s : plan.summary_rows(all_rows)) all_rows.push_back(s);

    std::ofstream out(result.data_path, std::ios::trunc);
    if (!out) throw data_error("cannot write " + result.data_path);
    int last_trial = std::numeric_limits<int>::min();
    for (const json& r : all_rows) {
        const int t = r.value("trial", -1);
        if (t != last_trial) {
            out.flush();  // partial results survive at trial granularity
            last_trial = t;
        }
        out << r.dump() << '\n';
        ++result.rows;
    }
    out.close();

    const auto t1 = std::chrono::steady_clock::now();
    json meta{{"schema", 1},
              {"hash", hash},
              {"config", cfg.to_json()},
              {"rows", result.rows},
              {"wall_time_s", std::chrono::duration<double>(t1 - t0).count()}};
    std::ofstream meta_out(result.meta_path, std::ios::trunc);
    if (!meta_out) throw data_error("cannot write " + result.meta_path);
    meta_out << meta.dump(2) << '\n';
    return result;
}

// Aggregates JSONL outputs: quantiles per named statistic, per-(ens,k)
// quantiles of edge samples, per-(E,eta) Lambda medians with a decay-slope
// fit per energy, and pooled spacing-gap stats.
inline json summarize(const std::vector<std::string>& files, bool allow_mixed = false) {
    std::vector<json> rows;
    std::optional<int> ensemble_n;
    for (const std::string& f : files) {
        const auto part = load_jsonl(f);
        rows.insert(rows.end(), part.begin(), part.end());
        if (f.size() > 6 && f.substr(f.size() - 6) == ".jsonl") {
            const std::string meta_path = f.substr(0, f.size() - 6) + ".meta.json";
            if (std::filesystem::exists(meta_path)) {
                const json meta = load_json_file(meta_path);
                if (meta.contains("config") && meta["config"].contains("ensemble"))
                    ensemble_n = meta["config"]["ensemble"]["N"].get<int>();
            }
        }
    }
    if (rows.empty()) throw data_error("summarize: no rows");
    std::set<std::string> hashes;
    for (const json& r : rows) hashes.insert(r.value("hash", ""));
    if (hashes.size() > 1 && !allow_mixed)
        throw data_error("summarize: mixed config hashes (pass --allow-mixed)");

    auto quantiles_of = [](std::vector<double> v) {
        return json{{"count", v.size()},       {"mean", mean(v)},
                    {"min", quantile(v, 0.0)}, {"q25", quantile(v, 0.25)},
                    {"median", quantile(v, 0.5)}, {"q75", quantile(v, 0.75)},
                    {"max", quantile(v, 1.0)}};
    };

    json out;
    out["rows"] = rows.size();
    out["hashes"] = std::vector<std::string>(hashes.begin(), hashes.end());

    std::map<std::string, std::vector<double>> stats;
    std::map<std::pair<std::string, int>, std::vector<double>> edge;
    std::map<std::pair<double, double>, std::vector<double>> lambda;  // (E,eta)
    std::vector<double> gaps;
    for (const json& r : rows) {
        if (r.contains("stat"))
            stats[r["stat"].get<std::string>()].push_back(r["value"].get<double>());
        else if (r.contains("s"))
            edge[{r.value("ens", "?"), r.value("k", 1)}].push_back(r["s"].get<double>());
        else if (r.contains("Lambda"))
            lambda[{r["E"].get<double>(), r["eta"].get<double>()}].push_back(
                r["Lambda"].get<double>());
        else if (r.contains("gaps"))
            for (double g : r["gaps"]) gaps.push_back(g);
    }
    for (auto& [name, vals] : stats) out["stats"][name] = quantiles_of(vals);
    for (auto& [key, vals] : edge)
        out["edge"][key.first]["k" + std::to_string(key.second)] = quantiles_of(vals);
    if (!gaps.empty()) out["gaps"] = quantiles_of(gaps);
    if (!lambda.empty()) {
        std::map<double, std::vector<std::pair<double, double>>> per_energy;
        for (auto& [key, vals] : lambda) {
            out["locallaw"].push_back(json{{"E", key.first},
                                           {"eta", key.second},
                                           {"median_Lambda", median(vals)}});
            per_energy[key.first].emplace_back(key.second, median(vals));
        }
        if (ensemble_n) {
            for (auto& [E, pts] : per_energy) {
                if (pts.size() < 5) continue;
                std::vector<std::pair<double, double>> neta;
                for (auto& [eta, med] : pts) neta.emplace_back(*ensemble_n * eta, med);
                try {
                    out["slopes"][std::to_string(E)] = fit_decay_exponent(neta);
                } catch (const std::exception&) {
                    // degenerate spread: slope omitted
                }
            }
        }
    }
    return out;
}

}  // namespace mpu
