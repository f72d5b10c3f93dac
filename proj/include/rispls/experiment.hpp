#pragma once

#include "rispls/channel.hpp"
#include "rispls/config.hpp"
#include "rispls/driver.hpp"
#include "rispls/eavesdropper.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

// Monte Carlo harness: for each (SNR, trial) pair draw one channel
// realisation, design the legitimate side, let E design its side, and score
// both with the true signal models. Noise is fixed to 1 and P = 10^(SNR/10).

namespace rispls {

enum class Scenario { WithLegitRis, NoLegitRis };

Scenario parse_scenario(const std::string& name);   // "with-ris" | "no-ris"
std::string scenario_name(Scenario scenario);

struct SweepSpec {
    std::vector<double> snr_grid_db{0, 5, 10, 15, 20, 25, 30};
    int trials = 200;
    Scenario scenario = Scenario::WithLegitRis;
    SystemConfig config;
    Geometry geometry;
    std::uint64_t master_seed = 1;
    AoParams ao;
    EavesdropperParams eaves;
    int threads = 1;
    bool record_timing = true;  // false writes wall_time_s = 0 (byte-stable CSVs)

    void validate() const;
};

struct TrialResult {
    double snr_db = 0;
    int trial_index = 0;
    double rate_rx = 0;
    double rate_e = 0;
    double secrecy = 0;
    int nd_selected = 0;
    int inner_iters = 0;
    double wall_time_s = 0;
    bool ok = true;
};

struct SnrAggregate {
    double snr_db = 0;
    int trials = 0;      // successful trials only
    int failures = 0;
    double mean_rate_rx = 0;
    double mean_rate_e = 0;
    double mean_secrecy = 0;
};

struct SweepResult {
    std::vector<TrialResult> trials;  // ordered by (snr index, trial index)
    std::vector<SnrAggregate> aggregate;
    std::vector<std::string> failure_messages;
};

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t snr_index, std::size_t trial_index);

/// One Monte Carlo trial. Solver errors are caught and reported through
/// `ok = false`; `failure` receives the message when provided.
TrialResult run_trial(const SweepSpec& spec, std::size_t snr_index, int trial_index,
                      std::string* failure = nullptr);

SweepResult run_sweep(const SweepSpec& spec);

/// Per-SNR means over the successful trials, in grid order.
std::vector<SnrAggregate> aggregate(const std::vector<TrialResult>& trials);

// CSV schema, column order fixed:
//   snr_db,trial_index,rate_rx,rate_e,secrecy,nd_selected,inner_iters,wall_time_s,ok
inline constexpr const char* kTrialCsvHeader =
    "snr_db,trial_index,rate_rx,rate_e,secrecy,nd_selected,inner_iters,wall_time_s,ok";
inline constexpr const char* kAggregateCsvHeader = "snr_db,trials,failures,mean_rate_rx,mean_rate_e,mean_secrecy";

void write_csv(const std::vector<TrialResult>& results, std::ostream& out);
void write_csv(const std::vector<TrialResult>& results, const std::filesystem::path& path);
std::vector<TrialResult> read_csv(std::istream& in);
std::vector<TrialResult> read_csv(const std::filesystem::path& path);

void write_aggregate_csv(const std::vector<SnrAggregate>& rows, std::ostream& out);

/// Channel dump: one block per matrix, "name,rows,cols" followed by rows of
/// re,im pairs.
void write_channels_csv(const ChannelSet<double>& ch, std::ostream& out);

void write_ao_trace_csv(const std::vector<AoTraceRow>& rows, std::ostream& out);
void write_manifold_trace_csv(const std::vector<ManifoldTraceRow>& rows, std::ostream& out);

}  // namespace rispls
