// SPDX-License-Identifier: Apache-2.0
// Shared random instances for the phase optimizer suites.
#pragma once

#include "oracles.hpp"

#include "risopt/beamforming.hpp"
#include "risopt/phase_opt.hpp"

namespace fixture {

using namespace risopt;

struct PhaseInstance {
    ChannelRealization chan;
    PowerAllocation power;
    double sigma2 = 1.0;
    PhaseVector init;
    Beamformer bf;
    QuadraticFormSet q;
};

/// Unit-variance channel, powers in [0.2, 1], noise 1, combiners optimal at a random init.
inline PhaseInstance phase_instance(int M, int N, int K, std::mt19937_64& rng, double alpha = 1.0,
                                    bool correlated = false) {
    PhaseInstance in;
    in.chan = oracle::random_channel(M, N, K, rng, correlated);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    in.power.p = VectorXd(K);
    for (int k = 0; k < K; ++k) in.power.p[k] = u(rng);
    in.init = PhaseVector::from_angles(oracle::random_angles(N, rng), alpha);
    in.bf = optimal_beamformers(in.chan, in.init, in.power, in.sigma2);
    in.q = build_quadratic_forms(in.chan, in.bf, in.power, in.sigma2);
    return in;
}

/// min_k SINR_k with the instance's fixed combiners.
inline double fixed_bf_min(const PhaseInstance& in, const VectorXd& theta) {
    return in.q.min_sinr(PhaseVector::from_angles(theta, in.init.alpha()));
}

/// min_k rho_k, combiners re-optimized for the phase.
inline double post_bf_min(const PhaseInstance& in, const VectorXd& theta) {
    return post_bf_sinr(in.chan, PhaseVector::from_angles(theta, in.init.alpha()), in.power, in.sigma2).minimum;
}

/// Max relative mismatch between the analytic tangent gradients and central differences.
inline double gradient_fd_error(const PhaseInstance& in, double h = 1e-6) {
    const MatrixXd analytic = rho_tangent_gradients(in.chan, in.power, in.init, in.sigma2);
    double worst = 0.0;
    for (int n = 0; n < in.init.size(); ++n) {
        VectorXd up = in.init.theta();
        VectorXd dn = in.init.theta();
        up[n] += h;
        dn[n] -= h;
        const VectorXd fu = post_bf_sinr(in.chan, PhaseVector::from_angles(up, in.init.alpha()), in.power, in.sigma2).per_user;
        const VectorXd fl = post_bf_sinr(in.chan, PhaseVector::from_angles(dn, in.init.alpha()), in.power, in.sigma2).per_user;
        const VectorXd fd = (fu - fl) / (2.0 * h);
        for (Eigen::Index k = 0; k < fd.size(); ++k) {
            // Floor at a fraction of the user's own scale so vanishing coordinates are not divided by ~0.
            const double scale = std::max({std::abs(fd[k]), std::abs(analytic(k, n)),
                                           1e-3 * analytic.row(k).cwiseAbs().maxCoeff(), 1e-300});
            worst = std::max(worst, std::abs(fd[k] - analytic(k, n)) / scale);
        }
    }
    return worst;
}

}  // namespace fixture
