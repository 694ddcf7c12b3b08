// SPDX-License-Identifier: Apache-2.0
#include "risopt/alternating.hpp"

#include "risopt/beamforming.hpp"
#include "risopt/errors.hpp"
#include "risopt/power_alloc.hpp"

#include <chrono>

namespace risopt {

std::string_view method_name(PhaseMethod m) {
    switch (m) {
        case PhaseMethod::Sdr: return "sdr";
        case PhaseMethod::Lse: return "lse";
        case PhaseMethod::Quantized: return "quant";
        case PhaseMethod::RandomBaseline: return "random";
    }
    return "unknown";
}

std::optional<PhaseMethod> parse_method(std::string_view name) {
    if (name == "sdr") return PhaseMethod::Sdr;
    if (name == "lse") return PhaseMethod::Lse;
    if (name == "quant" || name == "quantized") return PhaseMethod::Quantized;
    if (name == "random" || name == "random-baseline") return PhaseMethod::RandomBaseline;
    return std::nullopt;
}

PhaseVector initial_phase(PhaseMethod method, int N, double alpha, int bits, Rng& rng) {
    if (method == PhaseMethod::Quantized) return random_grid_phase(N, bits, alpha, rng);
    return random_phase(N, alpha, rng);
}

namespace {

/// The current iterate with its effective channel cached.
struct State {
    PhaseVector phase;
    MatrixXcd G;
    Beamformer bf;
    PowerAllocation power;
    double minimum = 0.0;
};

double min_sinr(const MatrixXcd& G, const PowerAllocation& power, const Beamformer& bf,
                double sigma2) {
    return sinr_from_gains(G, power, bf, sigma2).minimum;
}

}  // namespace

Solution alternating_optimize(const SystemConfig& config, const ChannelRealization& chan,
                              PhaseMethod method, const AlternatingParams& params, Rng& rng,
                              const std::optional<PhaseVector>& init) {
    const auto started = std::chrono::steady_clock::now();
    config.validate();
    chan.check_dimensions();
    if (chan.antennas() != config.M || chan.elements() != config.N || chan.users() != config.K) {
        throw ConfigError("channel realization does not match the configured M, N, K");
    }
    const double sigma2 = config.sigma2;

    Solution sol;
    sol.method = method;
    sol.caps = power_caps(config);

    State s;
    s.phase = init ? *init : initial_phase(method, config.N, config.alpha, params.quant.bits, rng);
    if (s.phase.size() != config.N) throw ConfigError("initial phase vector has the wrong length");
    s.G = effective_channel(chan, s.phase);
    s.power.p = sol.caps;
    s.bf = optimal_beamformers_from_gains(s.G, s.power, sigma2);
    s.minimum = min_sinr(s.G, s.power, s.bf, sigma2);

    auto& trace = sol.report.stage_trace;
    trace.push_back({"init", s.minimum});

    for (int sweep = 1; sweep <= params.max_sweeps; ++sweep) {
        const double at_start = s.minimum;
        sol.iterations = sweep;

        // (1) receive beamforming
        {
            Beamformer bf = optimal_beamformers_from_gains(s.G, s.power, sigma2);
            const double m = min_sinr(s.G, s.power, bf, sigma2);
            if (m >= s.minimum) {
                s.bf = std::move(bf);
                s.minimum = m;
            }
            trace.push_back({"bf", s.minimum});
        }

        // (2) max-min power control
        {
            const GainTable table = gain_table_from_gains(s.G, s.bf, sigma2);
            const MaxMinPowerResult pr = max_min_power(table, sol.caps);
            if (pr.degenerate) sol.warnings.push_back("power: some user has zero direct gain");
            const double m = min_sinr(s.G, pr.power, s.bf, sigma2);
            if (!pr.degenerate && m >= s.minimum) {
                s.power = pr.power;
                s.minimum = m;
            }
            trace.push_back({"power", s.minimum});
        }

        // (3) RIS phases; the candidate is judged with combiners re-optimized for it
        if (method != PhaseMethod::RandomBaseline) {
            std::optional<PhaseVector> candidate;
            switch (method) {
                case PhaseMethod::Sdr: {
                    const QuadraticFormSet q = build_quadratic_forms(chan, s.bf, s.power, sigma2);
                    SdrResult r = sdr_dinkelbach_phase(q, s.phase, params.sdr, rng);
                    if (r.warning) sol.warnings.push_back("sdr: lambda not settled at max_outer");
                    if (!r.kept_input) candidate = std::move(r.phase);
                    break;
                }
                case PhaseMethod::Lse: {
                    LseResult r = lse_gradient_phase(chan, s.power, s.phase, sigma2, params.lse);
                    candidate = std::move(r.phase);
                    break;
                }
                case PhaseMethod::Quantized: {
                    const QuadraticFormSet q = build_quadratic_forms(chan, s.bf, s.power, sigma2);
                    QuantResult r = quantized_heuristic_phase(
                        [&q](const PhaseVector& ph) { return q.min_sinr(ph); }, s.phase,
                        params.quant, rng);
                    candidate = std::move(r.phase);
                    break;
                }
                case PhaseMethod::RandomBaseline: break;
            }
            if (candidate) {
                MatrixXcd G = effective_channel(chan, *candidate);
                Beamformer bf = optimal_beamformers_from_gains(G, s.power, sigma2);
                const double m = min_sinr(G, s.power, bf, sigma2);
                if (m >= s.minimum) {
                    s.phase = std::move(*candidate);
                    s.G = std::move(G);
                    s.bf = std::move(bf);
                    s.minimum = m;
                }
            }
            trace.push_back({"phase", s.minimum});
        }

        if (s.minimum - at_start <= params.tolerance * at_start) {
            sol.converged = true;
            break;
        }
    }

    if (s.minimum <= 0.0) sol.degenerate = true;
    sol.phase = s.phase;
    sol.bf = s.bf;
    sol.power = s.power;
    auto stages = std::move(sol.report.stage_trace);
    sol.report = sinr_from_gains(s.G, s.power, s.bf, sigma2);
    sol.report.stage_trace = std::move(stages);
    sol.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return sol;
}

}  // namespace risopt
