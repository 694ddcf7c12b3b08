// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "risopt/core_model.hpp"

namespace risopt {

/// Per-user interference-plus-noise covariance Sigma_k + sigma2*I, factored once.
/// Built from one Gram accumulation with a rank-one downdate per user.
class InterferenceSolver {
public:
    /// G is M x K, columns are the effective channels. Throws NumericError on
    /// non-finite input or a failed Cholesky factorization.
    InterferenceSolver(const MatrixXcd& G, const VectorXd& p, double sigma2);

    /// (Sigma_k + sigma2 I)^{-1} g_k
    [[nodiscard]] const VectorXcd& whitened(int k) const { return solved_[static_cast<std::size_t>(k)]; }
    /// rho_k = p_k g_k^H (Sigma_k + sigma2 I)^{-1} g_k
    [[nodiscard]] double rho(int k) const { return rho_[k]; }
    [[nodiscard]] const VectorXd& rho() const { return rho_; }

private:
    std::vector<VectorXcd> solved_;
    VectorXd rho_;
};

/// beta_k = (Sigma_k + sigma2 I)^{-1} g_k / ||.||; the first basis vector when g_k = 0.
Beamformer optimal_beamformers(const ChannelRealization& chan, const PhaseVector& phase,
                               const PowerAllocation& power, double sigma2);
Beamformer optimal_beamformers_from_gains(const MatrixXcd& G, const PowerAllocation& power,
                                          double sigma2);

/// SINR attained by the optimal combiners, via Hermitian solves.
SinrReport post_bf_sinr(const ChannelRealization& chan, const PhaseVector& phase,
                        const PowerAllocation& power, double sigma2);
SinrReport post_bf_sinr_from_gains(const MatrixXcd& G, const PowerAllocation& power,
                                   double sigma2);

}  // namespace risopt
