// SPDX-License-Identifier: Apache-2.0
#include "risopt/beamforming.hpp"

#include "risopt/errors.hpp"

#include <Eigen/Cholesky>

namespace risopt {

InterferenceSolver::InterferenceSolver(const MatrixXcd& G, const VectorXd& p, double sigma2) {
    if (!(sigma2 > 0.0)) throw ConfigError("noise power sigma2 must be > 0");
    if (p.size() != G.cols()) throw ConfigError("power vector length does not match user count");
    if (!G.allFinite() || !p.allFinite()) throw NumericError("non-finite effective channel or power");

    const Eigen::Index K = G.cols();
    const MatrixXcd total = G * p.cast<cd>().asDiagonal() * G.adjoint();

    solved_.reserve(static_cast<std::size_t>(K));
    rho_.resize(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        MatrixXcd cov = total - p[k] * G.col(k) * G.col(k).adjoint();
        cov.diagonal().array() += sigma2;
        cov = 0.5 * (cov + cov.adjoint()).eval();
        Eigen::LLT<MatrixXcd> llt(cov);
        if (llt.info() != Eigen::Success) {
            throw NumericError("Cholesky of interference covariance failed for user " +
                               std::to_string(k));
        }
        VectorXcd x = llt.solve(G.col(k));
        rho_[k] = std::max(0.0, p[k] * G.col(k).dot(x).real());
        solved_.push_back(std::move(x));
    }
}

Beamformer optimal_beamformers_from_gains(const MatrixXcd& G, const PowerAllocation& power,
                                          double sigma2) {
    const InterferenceSolver solver(G, power.p, sigma2);
    Beamformer bf;
    bf.beta.resize(G.rows(), G.cols());
    for (Eigen::Index k = 0; k < G.cols(); ++k) {
        const VectorXcd& x = solver.whitened(static_cast<int>(k));
        const double norm = x.norm();
        if (norm > 0.0) {
            bf.beta.col(k) = x / norm;
        } else {
            bf.beta.col(k) = VectorXcd::Unit(G.rows(), 0);
        }
    }
    return bf;
}

Beamformer optimal_beamformers(const ChannelRealization& chan, const PhaseVector& phase,
                               const PowerAllocation& power, double sigma2) {
    return optimal_beamformers_from_gains(effective_channel(chan, phase), power, sigma2);
}

SinrReport post_bf_sinr_from_gains(const MatrixXcd& G, const PowerAllocation& power,
                                   double sigma2) {
    const InterferenceSolver solver(G, power.p, sigma2);
    return SinrReport::from_values(solver.rho());
}

SinrReport post_bf_sinr(const ChannelRealization& chan, const PhaseVector& phase,
                        const PowerAllocation& power, double sigma2) {
    return post_bf_sinr_from_gains(effective_channel(chan, phase), power, sigma2);
}

}  // namespace risopt
