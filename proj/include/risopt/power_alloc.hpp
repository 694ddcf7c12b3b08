// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "risopt/core_model.hpp"

#include <vector>

namespace risopt {

/// f(k, i) = |beta_k^H g_i|^2 and n_k = sigma2 * ||beta_k||^2.
struct GainTable {
    MatrixXd f;
    VectorXd n;

    [[nodiscard]] int users() const { return static_cast<int>(n.size()); }
    /// SINR_k(p) = p_k f_kk / (sum_{i != k} p_i f_ki + n_k)
    [[nodiscard]] VectorXd sinr(const VectorXd& p) const;
};

GainTable gain_table(const ChannelRealization& chan, const PhaseVector& phase,
                     const Beamformer& bf, double sigma2);
GainTable gain_table_from_gains(const MatrixXcd& G, const Beamformer& bf, double sigma2);

/// Result of iterating p_k <- min(cap_k, tau (I_k(p) + n_k) / f_kk) from p = 0.
struct FixedPointResult {
    VectorXd p;
    bool converged = false;
    bool feasible = false;  // converged and no user is clipped below its target
    int iterations = 0;
};

struct FixedPointOptions {
    int max_iterations = 500;
    double tolerance = 1e-10;  // absolute, watts
};

FixedPointResult interference_fixed_point(const GainTable& table, const VectorXd& caps, double tau,
                                          const FixedPointOptions& options = {},
                                          std::vector<VectorXd>* iterates = nullptr);

struct MaxMinPowerResult {
    PowerAllocation power;
    double tau = 0.0;          // min_k SINR_k at `power`
    bool degenerate = false;   // some f_kk == 0
    int bisection_steps = 0;
};

struct MaxMinPowerOptions {
    double relative_tolerance = 1e-8;
    FixedPointOptions fixed_point;
};

/// Global max-min SINR power allocation under per-user caps, by bisection on the
/// target SINR with the interference fixed point as feasibility oracle.
MaxMinPowerResult max_min_power(const GainTable& table, const VectorXd& caps,
                                const MaxMinPowerOptions& options = {});

/// min(p_max, emf_max_k / sar_ref_k) per user. Throws DomainError if any sar_ref_k <= 0.
VectorXd effective_power_cap(double p_max, const std::vector<double>& sar_ref,
                             const std::vector<double>& emf_max);

/// Caps for a scenario: the EMF fold when enabled, p_max otherwise.
VectorXd power_caps(const SystemConfig& config);

}  // namespace risopt
