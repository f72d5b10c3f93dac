// rispls: Monte Carlo sweeps and self-checks.
//
//   rispls simulate --config cfg.json --scenario with-ris --snr-grid 0,5,10
//                   --trials 200 --seed 1 --out trials.csv
//   rispls verify

#include "checks.hpp"
#include "rispls/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

int simulate(const std::string& config_path, const std::string& scenario, const std::vector<double>& grid, int trials,
             std::uint64_t seed, const std::string& out_path, const std::string& summary_path, int threads,
             bool no_timing) {
    using namespace rispls;
    SweepSpec spec;
    if (!config_path.empty()) {
        const auto cfg = load_config(config_path);
        spec.config = cfg.system;
        spec.geometry = cfg.geometry;
    }
    spec.scenario = parse_scenario(scenario);
    if (!grid.empty()) spec.snr_grid_db = grid;
    spec.trials = trials;
    spec.master_seed = seed;
    spec.threads = threads;
    spec.record_timing = !no_timing;

    const auto res = run_sweep(spec);
    write_csv(res.trials, std::filesystem::path(out_path));
    if (!summary_path.empty()) {
        std::ofstream s(summary_path);
        if (!s) throw Error("cannot open " + summary_path + " for writing");
        write_aggregate_csv(res.aggregate, s);
    }

    std::printf("scenario %s, %zu trials -> %s\n", scenario_name(spec.scenario).c_str(), res.trials.size(),
                out_path.c_str());
    std::printf("%8s %8s %10s %10s %10s\n", "snr_db", "failed", "R_RX", "R_E", "secrecy");
    int failed = 0;
    for (const auto& a : res.aggregate) {
        std::printf("%8.2f %8d %10.4f %10.4f %10.4f\n", a.snr_db, a.failures, a.mean_rate_rx, a.mean_rate_e,
                    a.mean_secrecy);
        failed += a.failures;
    }
    for (const auto& m : res.failure_messages) std::fprintf(stderr, "failed: %s\n", m.c_str());
    const double rate = double(failed) / double(res.trials.size());
    if (rate >= 0.01) {
        std::fprintf(stderr, "warning: %.1f%% of trials failed (flagged run)\n", 100 * rate);
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Secure MIMO transmission design against an RIS-assisted eavesdropper"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo secrecy-rate sweep");
    std::string config_path, scenario = "with-ris", out_path, summary_path;
    std::vector<double> grid;
    int trials = 200, threads = 1;
    std::uint64_t seed = 1;
    bool no_timing = false;
    sim->add_option("--config", config_path, "JSON file with system and geometry keys")->check(CLI::ExistingFile);
    sim->add_option("--scenario", scenario, "with-ris or no-ris")
        ->check(CLI::IsMember({"with-ris", "no-ris"}));
    sim->add_option("--snr-grid", grid, "Comma-separated SNR values in dB")->delimiter(',');
    sim->add_option("--trials", trials, "Trials per SNR point")->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed, "Master seed");
    sim->add_option("--out", out_path, "Per-trial CSV output")->required();
    sim->add_option("--summary", summary_path, "Optional per-SNR mean CSV");
    sim->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sim->add_flag("--no-timing", no_timing, "Write wall_time_s = 0 for byte-stable output");

    auto* ver = app.add_subcommand("verify", "Run the property suites; nonzero exit on any failure");
    bool full = false;
    checks::SweepOptions sweep;
    sweep.threads = int(std::max(1u, std::thread::hardware_concurrency()));
    ver->add_flag("--full", full, "Also run the reproduction sweeps (slow)");
    ver->add_option("--trials", sweep.trials, "Trials per SNR point for --full")->check(CLI::PositiveNumber);
    ver->add_option("--threads", sweep.threads, "Worker threads for --full")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            return simulate(config_path, scenario, grid, trials, seed, out_path, summary_path, threads, no_timing);
        }
        const auto list = full ? checks::all_checks(sweep) : checks::property_checks();
        const int failed = checks::run_and_report(list);
        std::printf("%d of %zu checks passed\n", int(list.size()) - failed, list.size());
        return failed == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
