// mpu: command-line driver for the covariance-matrix universality lab.
//
// Subcommands: gen, locallaw, rigidity, edge, gfct, flow, bulk, summarize,
// tw-table-check. Exit codes: 0 ok, 2 config error, 3 data error,
// 4 numerical failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpu/edge.hpp"
#include "mpu/ensemble.hpp"
#include "mpu/harness.hpp"
#include "mpu/io.hpp"
#include "mpu/mp_model.hpp"
#include "mpu/rigidity.hpp"
#include "mpu/spectral.hpp"
#include "mpu/tw1.hpp"

namespace {

using mpu::json;

struct CommonFlags {
    std::string kind = "gaussian";
    int n = 100;
    int m = 100;
    std::uint64_t seed = 1;
    double two_point_a = 2.0;
    double var_scale = 1.0;
    int trials = 1;
    int threads = 0;
    std::string out = "mpu_out";
    std::string config_file;
    double polylog_p = 3.0;
    std::string kind_b;
    bool resume = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_pair) {
    cmd->add_option("--kind", f.kind, "ensemble kind")
        ->check(CLI::IsMember({"gaussian", "rademacher", "two_point", "self_normalized"}));
    cmd->add_option("-N,--cols", f.n, "number of columns N");
    cmd->add_option("-M,--rows", f.m, "number of rows M");
    cmd->add_option("--seed", f.seed, "base seed");
    cmd->add_option("--two-point-a", f.two_point_a, "two_point atom a");
    cmd->add_option("--var-scale", f.var_scale, "entry variance multiplier (negative control)");
    cmd->add_option("--trials", f.trials, "number of trials");
    cmd->add_option("--threads", f.threads, "worker threads (0 = logical cores)");
    cmd->add_option("--out", f.out, "output path prefix");
    cmd->add_option("--config", f.config_file,
                    "JSON config file; wins over flags on conflict");
    cmd->add_option("--polylog-p", f.polylog_p, "polylog threshold exponent p");
    cmd->add_flag("--resume", f.resume, "complete missing trials of an interrupted run");
    if (with_pair)
        cmd->add_option("--kind-b", f.kind_b, "second ensemble kind for paired runs")
            ->check(CLI::IsMember({"gaussian", "rademacher", "two_point", "self_normalized"}));
}

mpu::EnsembleSpec spec_from_flags(const CommonFlags& f, const std::string& kind) {
    mpu::EnsembleSpec spec;
    spec.kind = mpu::ensemble_kind_from_string(kind);
    spec.n_cols = f.n;
    spec.n_rows = f.m;
    spec.two_point_a = f.two_point_a;
    spec.var_scale = f.var_scale;
    spec.seed = 0;  // derived from the base seed
    return spec;
}

mpu::ExperimentConfig build_config(const CommonFlags& f, mpu::ExperimentKind kind,
                                   json params) {
    mpu::ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.ensemble = spec_from_flags(f, f.kind);
    if (!f.kind_b.empty()) cfg.ensemble_b = spec_from_flags(f, f.kind_b);
    cfg.trials = f.trials;
    cfg.seed = f.seed;
    cfg.out = f.out;
    cfg.threads = f.threads;
    cfg.polylog_p = f.polylog_p;
    cfg.params = std::move(params);
    // A config file wins over flags on conflict.
    if (!f.config_file.empty()) cfg = mpu::ExperimentConfig::from_json(
        mpu::load_json_file(f.config_file));
    return cfg;
}

int run_and_report(const mpu::ExperimentConfig& cfg, bool resume) {
    const mpu::RunResult res = mpu::run(cfg, resume);
    std::cout << json{{"data", res.data_path},
                      {"meta", res.meta_path},
                      {"rows", res.rows},
                      {"hash", cfg.hash()}}
                     .dump()
              << "\n";
    return 0;
}

int error_json(const char* category, const std::exception& e, int code) {
    std::cerr << json{{"error", category}, {"message", e.what()}}.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Marchenko-Pastur universality lab"};
    app.require_subcommand(1);

    CommonFlags gen_f, ll_f, rig_f, edge_f, gfct_f, flow_f, bulk_f;

    // gen: sample one matrix, write its spectrum (and optional extras)
    auto* gen = app.add_subcommand("gen", "sample a matrix and export spectrum CSV");
    add_common(gen, gen_f, false);
    int gen_trial = 0;
    std::string gen_locations, gen_rigidity;
    gen->add_option("--trial", gen_trial, "trial index");
    gen->add_option("--locations-csv", gen_locations,
                    "also write classical locations CSV");
    gen->add_option("--rigidity-csv", gen_rigidity,
                    "also write per-index rigidity report CSV");

    auto* ll = app.add_subcommand("locallaw", "local-law diagnostic scan");
    add_common(ll, ll_f, false);
    double ll_E = std::nan("");
    int ll_neta = 12, ll_zsub = 16;
    double ll_eta_lo = 0.0, ll_eta_hi = 0.0;
    bool ll_lambda_only = false;
    ll->add_option("--energy", ll_E, "single scan energy (default: edge+bulk grid)");
    ll->add_option("--n-eta", ll_neta, "log-spaced eta count");
    ll->add_option("--eta-lo", ll_eta_lo, "smallest eta (default N^-0.9)");
    ll->add_option("--eta-hi", ll_eta_hi, "largest eta (default N^-0.2)");
    ll->add_option("--z-subset", ll_zsub, "columns entering the [Z] average");
    ll->add_flag("--lambda-only", ll_lambda_only,
                 "skip Green-entry diagnostics (Lambda_d, Lambda_o)");

    auto* rig = app.add_subcommand("rigidity", "rigidity / delocalization reports");
    add_common(rig, rig_f, false);
    int rig_grid = 512;
    rig->add_option("--e-grid-points", rig_grid, "uniform energy grid size");

    auto* edge = app.add_subcommand("edge", "Tracy-Widom edge statistics");
    add_common(edge, edge_f, true);
    int edge_k = 1, edge_batches = 10;
    double edge_eps = 0.0;
    std::string edge_table;
    edge->add_option("--top-k", edge_k, "ranks per trial (k <= 4 recommended)");
    edge->add_option("--epsilon", edge_eps, "sandwich shift (default N^-0.1)");
    edge->add_option("--batches", edge_batches, "sandwich batch count");
    edge->add_option("--tw-table", edge_table, "TW1 table CSV for one-sample KS");

    auto* gfct = app.add_subcommand("gfct", "Green-function comparison at the edge");
    add_common(gfct, gfct_f, true);
    double gfct_eps = 0.05;
    std::string gfct_fn = "identity";
    bool gfct_no_moments = false;
    gfct->add_option("--epsilon", gfct_eps, "edge scale exponent epsilon");
    gfct->add_option("--fn", gfct_fn, "test function")
        ->check(CLI::IsMember({"identity", "square", "cutoff"}));
    gfct->add_flag("--allow-moment-mismatch", gfct_no_moments,
                   "skip the two-moment precondition (negative control)");

    auto* flow = app.add_subcommand("flow", "OU flow vs closed-form interpolation");
    add_common(flow, flow_f, false);
    double flow_t = 0.5;
    int flow_steps = 200;
    flow->add_option("--time", flow_t, "flow time t");
    flow->add_option("--steps", flow_steps, "Euler steps");

    auto* bulk = app.add_subcommand("bulk", "bulk spacing-statistics comparison");
    add_common(bulk, bulk_f, true);
    double bulk_E = std::nan(""), bulk_b = 0.2, bulk_ft_a = 0.0, bulk_ft_b = 0.0;
    bool bulk_poisson = false;
    bulk->add_option("--energy", bulk_E, "window center (default bulk midpoint)");
    bulk->add_option("--half-width", bulk_b, "window half-width b");
    bulk->add_option("--flow-t-a", bulk_ft_a, "pre-relax ensemble A to this flow time");
    bulk->add_option("--flow-t-b", bulk_ft_b, "pre-relax ensemble B to this flow time");
    bulk->add_flag("--poisson-control", bulk_poisson,
                   "compare against an i.i.d.-eigenvalue surrogate");

    auto* summ = app.add_subcommand("summarize", "aggregate JSONL outputs");
    std::vector<std::string> summ_files;
    bool summ_mixed = false;
    summ->add_option("files", summ_files, "JSONL files")->required();
    summ->add_flag("--allow-mixed", summ_mixed, "accept mixed config hashes");

    auto* twc = app.add_subcommand("tw-table-check",
                                   "validate the TW1 table against the oracle");
    std::string twc_table = "data/tw1_f1.csv";
    int twc_stride = 1, twc_nodes = 96;
    double twc_tol = 1e-4;
    twc->add_option("--table", twc_table, "table CSV path");
    twc->add_option("--stride", twc_stride, "check every stride-th row");
    twc->add_option("--tol", twc_tol, "oracle agreement tolerance");
    twc->add_option("--nodes", twc_nodes, "quadrature nodes for the oracle");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            mpu::EnsembleSpec spec = spec_from_flags(gen_f, gen_f.kind);
            spec.seed = gen_f.seed;
            spec.validate();
            const mpu::DataMatrix X = mpu::sample_matrix(spec, gen_trial);
            const mpu::Spectrum S =
                mpu::covariance_spectrum(X, !gen_rigidity.empty());
            mpu::write_spectrum_csv(S, gen_f.out + ".spectrum.csv");
            const mpu::MPModel model(spec.ratio());
            if (!gen_locations.empty() || !gen_rigidity.empty()) {
                const mpu::ClassicalLocations locs =
                    model.classical_locations(spec.n_cols);
                if (!gen_locations.empty())
                    mpu::write_locations_csv(locs, gen_locations);
                if (!gen_rigidity.empty())
                    mpu::write_rigidity_csv(mpu::rigidity_report(S, locs),
                                            gen_rigidity);
            }
            std::cout << json{{"spectrum", gen_f.out + ".spectrum.csv"},
                              {"lambda_1", S.values[0]},
                              {"edges", {model.lambda_minus(), model.lambda_plus()}}}
                             .dump()
                      << "\n";
            return 0;
        }
        if (ll->parsed()) {
            json params{{"n_eta", ll_neta},
                        {"z_subset", ll_zsub},
                        {"green_entries", ll_lambda_only ? 0.0 : 1.0}};
            if (!std::isnan(ll_E)) params["E"] = ll_E;
            if (ll_eta_lo > 0) params["eta_lo"] = ll_eta_lo;
            if (ll_eta_hi > 0) params["eta_hi"] = ll_eta_hi;
            return run_and_report(
                build_config(ll_f, mpu::ExperimentKind::locallaw, params), ll_f.resume);
        }
        if (rig->parsed()) {
            return run_and_report(
                build_config(rig_f, mpu::ExperimentKind::rigidity,
                             json{{"e_grid_points", rig_grid}}),
                rig_f.resume);
        }
        if (edge->parsed()) {
            json params{{"k", edge_k}, {"batches", edge_batches}};
            if (edge_eps > 0) params["epsilon"] = edge_eps;
            if (!edge_table.empty()) params["tw_table"] = edge_table;
            return run_and_report(
                build_config(edge_f, mpu::ExperimentKind::edge, params), edge_f.resume);
        }
        if (gfct->parsed()) {
            if (gfct_f.kind_b.empty())
                throw mpu::config_error("gfct needs --kind-b");
            json params{{"epsilon", gfct_eps},
                        {"fn", gfct_fn},
                        {"enforce_moments", gfct_no_moments ? 0.0 : 1.0}};
            return run_and_report(
                build_config(gfct_f, mpu::ExperimentKind::gfct, params), gfct_f.resume);
        }
        if (flow->parsed()) {
            return run_and_report(
                build_config(flow_f, mpu::ExperimentKind::flow,
                             json{{"t", flow_t}, {"steps", flow_steps}}),
                flow_f.resume);
        }
        if (bulk->parsed()) {
            json params{{"b", bulk_b},
                        {"flow_t_a", bulk_ft_a},
                        {"flow_t_b", bulk_ft_b},
                        {"poisson_control", bulk_poisson ? 1.0 : 0.0}};
            if (!std::isnan(bulk_E)) params["E"] = bulk_E;
            return run_and_report(
                build_config(bulk_f, mpu::ExperimentKind::bulk, params), bulk_f.resume);
        }
        if (summ->parsed()) {
            std::cout << mpu::summarize(summ_files, summ_mixed).dump(2) << "\n";
            return 0;
        }
        if (twc->parsed()) {
            const mpu::TW1Table table = mpu::TW1Table::load_csv(twc_table);
            table.validate();
            const auto& grid = table.grid();
            const auto& vals = table.values();
            double worst = 0.0;
            for (std::size_t i = 0; i < grid.size();
                 i += static_cast<std::size_t>(std::max(1, twc_stride))) {
                const double oracle = mpu::tw1_cdf_fredholm(grid[i], twc_nodes);
                worst = std::max(worst, std::abs(oracle - vals[i]));
            }
            const bool ok = worst <= twc_tol;
            std::cout << json{{"table", twc_table},
                              {"rows", grid.size()},
                              {"monotone", true},
                              {"left_tail", vals.front()},
                              {"right_tail_gap", 1.0 - vals.back()},
                              {"max_oracle_dev", worst},
                              {"tol", twc_tol},
                              {"pass", ok}}
                             .dump()
                      << "\n";
            if (!ok) {
                std::cerr << json{{"error", "numerical"},
                                  {"message", "TW1 table disagrees with oracle"}}
                                 .dump()
                          << "\n";
                return 4;
            }
            return 0;
        }
    } catch (const mpu::config_error& e) {
        return error_json("config", e, 2);
    } catch (const mpu::data_error& e) {
        return error_json("data", e, 3);
    } catch (const mpu::numerical_error& e) {
        return error_json("numerical", e, 4);
    } catch (const std::exception& e) {
        return error_json("numerical", e, 4);
    }
    return 2;
}
