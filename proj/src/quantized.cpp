// SPDX-License-Identifier: Apache-2.0
#include "risopt/errors.hpp"
#include "risopt/phase_opt.hpp"

#include <cmath>

namespace risopt {

namespace {

// Gains below this relative size are rounding noise, not improvements.
constexpr double kRoundoff = 1e-12;

int grid_level(double theta, int levels) {
    const double pos = theta / kTwoPi * levels;
    return static_cast<int>(std::lround(pos)) % levels;
}

double grid_angle(int level, int levels) { return kTwoPi * level / levels; }

}  // namespace

PhaseVector random_grid_phase(int N, int bits, double alpha, Rng& rng) {
    const int levels = 1 << bits;
    std::uniform_int_distribution<int> pick(0, levels - 1);
    VectorXd theta(N);
    for (int n = 0; n < N; ++n) theta[n] = grid_angle(pick(rng), levels);
    return PhaseVector::from_angles(theta, alpha);
}

PhaseVector random_phase(int N, double alpha, Rng& rng) {
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    VectorXd theta(N);
    for (int n = 0; n < N; ++n) theta[n] = angle(rng);
    return PhaseVector::from_angles(theta, alpha);
}

bool on_grid(const PhaseVector& phase, int bits) {
    const int levels = 1 << bits;
    for (int n = 0; n < phase.size(); ++n) {
        const double pos = phase.theta()[n] / kTwoPi * levels;
        if (std::abs(pos - std::round(pos)) > 1e-9) return false;
    }
    return true;
}

QuantResult quantized_heuristic_phase(const PhaseEvaluator& evaluate, const PhaseVector& init,
                                      const QuantParams& params, Rng& rng) {
    if (params.bits < 1 || params.bits > 16) throw ConfigError("quantization bits must lie in [1,16]");
    if (params.window < 1) throw ConfigError("quantization window L must be >= 1");
    if (!on_grid(init, params.bits)) throw ConfigError("initial phases are not on the 2^B grid");

    const int N = init.size();
    const int levels = 1 << params.bits;
    const std::size_t L = static_cast<std::size_t>(params.window);

    QuantResult r;
    r.phase = init;
    r.min_sinr = evaluate(init);
    r.history.push_back(r.min_sinr);
    if (N == 0) return r;

    VectorXd theta = init.theta();
    std::uniform_int_distribution<int> pick(0, N - 1);

    auto settled = [&] {
        if (r.history.size() < L + 1) return false;
        // Total improvement over the last L entries.
        const double now = r.history.back();
        double recent = 0.0;
        for (std::size_t i = r.history.size() - 1 - L; i + 1 < r.history.size(); ++i) {
            recent += now - r.history[i];
        }
        return recent < params.epsilon * std::abs(now) || now == 0.0;
    };

    while (!settled() && r.evaluations < params.max_evaluations) {
        const int n = pick(rng);
        const int current = grid_level(theta[n], levels);
        for (int level = 0; level < levels; ++level) {
            if (level == current) continue;
            VectorXd trial = theta;
            trial[n] = grid_angle(level, levels);
            const PhaseVector cand = PhaseVector::from_angles(trial, init.alpha());
            const double value = evaluate(cand);
            ++r.evaluations;
            if (value > r.min_sinr + kRoundoff * std::abs(r.min_sinr)) {
                r.min_sinr = value;
                r.phase = cand;
                theta = trial;
            }
            r.history.push_back(r.min_sinr);
        }
    }
    return r;
}

}  // namespace risopt
