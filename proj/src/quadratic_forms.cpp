// SPDX-License-Identifier: Apache-2.0
#include "risopt/errors.hpp"
#include "risopt/phase_opt.hpp"

namespace risopt {

MatrixXcd QuadraticFormSet::R(int k, int i) const {
    const auto b = cross[static_cast<std::size_t>(k)].col(i);
    return b * b.adjoint();
}

VectorXd QuadraticFormSet::sinr(const VectorXcd& phi_vec) const {
    const int K = users();
    VectorXd out(K);
    for (int k = 0; k < K; ++k) {
        const VectorXd s = (cross[static_cast<std::size_t>(k)].adjoint() * phi_vec).cwiseAbs2();
        const double interference = p.dot(s) - p[k] * s[k];
        const double denom = interference + sigma_tilde2[k];
        out[k] = denom > 0.0 ? p[k] * s[k] / denom : 0.0;
    }
    return out;
}

VectorXd QuadraticFormSet::lifted_ratios(const MatrixXcd& V) const {
    const int K = users();
    VectorXd out(K);
    for (int k = 0; k < K; ++k) {
        const MatrixXcd& B = cross[static_cast<std::size_t>(k)];
        // Tr(b b^H V) = b^H V b for every column at once
        const VectorXd t = (B.adjoint() * V * B).diagonal().real();
        const double interference = p.dot(t) - p[k] * t[k];
        const double denom = interference + sigma_tilde2[k];
        out[k] = denom > 0.0 ? p[k] * t[k] / denom : 0.0;
    }
    return out;
}

QuadraticFormSet build_quadratic_forms(const ChannelRealization& chan, const Beamformer& bf,
                                       const PowerAllocation& power, double sigma2) {
    chan.check_dimensions();
    const int K = chan.users();
    if (bf.beta.cols() != K || bf.beta.rows() != chan.antennas() || power.p.size() != K) {
        throw ConfigError("build_quadratic_forms: beamformer/power shapes do not match the channel");
    }
    const MatrixXcd A = chan.cascade();
    QuadraticFormSet q;
    q.p = power.p;
    q.sigma_tilde2 = sigma2 * bf.beta.colwise().squaredNorm().transpose();
    q.cross.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        const VectorXcd a = A.adjoint() * bf.beta.col(k);
        // b_{k,i} = conj(h_{2,i}) .* (A^H beta_k)
        MatrixXcd B = chan.H2.conjugate();
        B.array().colwise() *= a.array();
        q.cross.push_back(std::move(B));
    }
    return q;
}

}  // namespace risopt
