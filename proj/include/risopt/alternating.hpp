// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "risopt/channel_gen.hpp"
#include "risopt/core_model.hpp"
#include "risopt/phase_opt.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace risopt {

enum class PhaseMethod { Sdr, Lse, Quantized, RandomBaseline };

std::string_view method_name(PhaseMethod m);
/// Accepts "sdr", "lse", "quant", "random" (and "random-baseline").
std::optional<PhaseMethod> parse_method(std::string_view name);

struct AlternatingParams {
    double tolerance = 1e-4;  // relative min-SINR gain per sweep
    int max_sweeps = 30;
    SdrParams sdr;
    LseParams lse;
    QuantParams quant;

    bool operator==(const AlternatingParams&) const = default;
};

struct Solution {
    Beamformer bf;
    PowerAllocation power;
    PhaseVector phase;
    SinrReport report;  // stage_trace holds the min-SINR after every stage
    VectorXd caps;
    int iterations = 0;
    double wall_time = 0.0;  // seconds
    PhaseMethod method = PhaseMethod::Lse;
    bool converged = false;
    bool degenerate = false;
    std::vector<std::string> warnings;
};

/// Starting phases for a method: uniform on the circle, on the 2^B grid for Quantized.
PhaseVector initial_phase(PhaseMethod method, int N, double alpha, int bits, Rng& rng);

/// Alternates receive beamforming, max-min power control and the chosen phase
/// optimizer. Every stage is accepted only if the minimum SINR does not drop,
/// so the recorded stage trace is nondecreasing. `init` defaults to
/// initial_phase(method, ...) drawn from `rng`.
Solution alternating_optimize(const SystemConfig& config, const ChannelRealization& chan,
                              PhaseMethod method, const AlternatingParams& params, Rng& rng,
                              const std::optional<PhaseVector>& init = std::nullopt);

}  // namespace risopt
