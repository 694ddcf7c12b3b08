// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "risopt/alternating.hpp"
#include "risopt/core_model.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace risopt {

/// Thermal noise -174 dBm/Hz integrated over the bandwidth, in watts.
/// Throws DomainError for a nonpositive bandwidth.
double noise_power(double bandwidth_hz);

inline double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0; }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w * 1000.0); }

/// Everything a batch run needs: the base scenario, solver knobs and the sweep.
struct ExperimentPlan {
    SystemConfig system;
    AlternatingParams solver;
    int trials = 1;
    std::uint64_t seed = 1;
    std::vector<PhaseMethod> methods{PhaseMethod::Lse, PhaseMethod::Sdr, PhaseMethod::Quantized,
                                     PhaseMethod::RandomBaseline};
    std::vector<int> grid_K{6};
    std::vector<int> grid_M{12};
    std::vector<int> grid_N{24};
    std::vector<int> grid_B{3};
    int threads = 1;

    /// Throws ConfigError for empty grids or out-of-range values.
    void validate() const;

    bool operator==(const ExperimentPlan&) const = default;
};

/// Reads the flat `key: value` config (arrays as `[a, b, c]`). Unknown keys and
/// out-of-range values raise ConfigError with "<path>:<line>: <key>: ..." text.
ExperimentPlan load_config(const std::filesystem::path& path);
ExperimentPlan parse_config(const std::string& text, const std::string& source = "<string>");

/// Emits every key with 17 significant digits; parse_config(save_config(p)) == p.
std::string save_config(const ExperimentPlan& plan);

/// SplitMix64 finalizer.
std::uint64_t mix_seed(std::uint64_t x);
/// Seed of one trial at one grid point.
std::uint64_t trial_seed(std::uint64_t base, std::uint64_t grid_index, std::uint64_t trial);

struct TrialRecord {
    int trial = 0;
    std::uint64_t seed = 0;
    int K = 0;
    int M = 0;
    int N = 0;
    PhaseMethod method = PhaseMethod::Lse;
    int bits = 0;  // quantized rows only
    double min_sinr_linear = 0.0;
    double min_sinr_db = 0.0;
    std::vector<double> per_user_sinrs;
    int sweeps = 0;
    double wall_time_seconds = 0.0;
    double p_cap_used = 0.0;
    bool degenerate = false;
    std::uint64_t channel_hash = 0;
    std::string diagnostics;
    bool stage_trace_monotone = true;
};

/// Scenario at one grid point (K users, M antennas, N elements).
SystemConfig grid_config(const ExperimentPlan& plan, int K, int M, int N);

/// Channel of one trial, exactly as run_experiment samples it.
ChannelRealization trial_channel(const SystemConfig& config, std::uint64_t seed);

/// Every method on one shared channel. Never throws for optimizer failures; they
/// land in the diagnostics column.
std::vector<TrialRecord> run_trial(const ExperimentPlan& plan, const SystemConfig& config,
                                   int trial, std::uint64_t seed);

/// Rows ordered by (grid point, trial, method); the order and every column except
/// wall_time_seconds are independent of the thread count.
std::vector<TrialRecord> run_experiment(const ExperimentPlan& plan,
                                        const std::function<void(int, int)>& progress = {});

std::string csv_header();
std::string csv_row(const TrialRecord& r);
void write_csv(std::ostream& os, const std::vector<TrialRecord>& rows);

}  // namespace risopt
