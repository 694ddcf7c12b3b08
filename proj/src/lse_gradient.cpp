// SPDX-License-Identifier: Apache-2.0
#include "risopt/beamforming.hpp"
#include "risopt/errors.hpp"
#include "risopt/phase_opt.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace risopt {

double lse_objective(const VectorXd& rho) {
    if (rho.size() == 0) throw DomainError("lse_objective: empty SINR vector");
    for (Eigen::Index k = 0; k < rho.size(); ++k) {
        if (!(rho[k] > 0.0) || !std::isfinite(rho[k])) {
            throw DomainError("lse_objective: rho_" + std::to_string(k) + " must be > 0");
        }
    }
    const VectorXd x = rho.cwiseInverse();
    const double shift = x.maxCoeff();
    return shift + std::log((x.array() - shift).exp().sum());
}

cd rho_derivative(const ChannelRealization& chan, const PowerAllocation& power,
                  const PhaseVector& phase, double sigma2, int k, int n) {
    if (!(sigma2 > 0.0)) throw ConfigError("noise power sigma2 must be > 0");
    const int K = chan.users();
    const int M = chan.antennas();
    if (k < 0 || k >= K || n < 0 || n >= chan.elements()) {
        throw ConfigError("rho_derivative: index out of range");
    }
    if (power.p[k] == 0.0) return {0.0, 0.0};

    const MatrixXcd A = chan.cascade();  // H1 R^{1/2}
    const MatrixXcd G = effective_channel(chan, phase);

    // T2 = (sum_{i != k} p_i g_i g_i^H + sigma2 I)^{-1}, applied through its Cholesky factor.
    MatrixXcd cov = sigma2 * MatrixXcd::Identity(M, M);
    for (int i = 0; i < K; ++i) {
        if (i != k) cov += power.p[i] * G.col(i) * G.col(i).adjoint();
    }
    Eigen::LLT<MatrixXcd> T2(cov);
    if (T2.info() != Eigen::Success) throw NumericError("rho_derivative: Cholesky failed");

    // First trace term: [(H1 R^{1/2})^H T2 H1 R^{1/2} Phi V_k]_{n,n}, V_k = h_{2,k} h_{2,k}^H.
    const MatrixXcd reflect = phase.stacked().asDiagonal();
    const VectorXcd hk = chan.H2.col(k);
    const VectorXcd PhiVk_col = reflect * hk * std::conj(hk[n]);
    const Eigen::RowVectorXcd AhT2A_row = A.adjoint().row(n) * T2.solve(A);
    const cd direct = (AhT2A_row * PhiVk_col).value();

    // Second term: sum_{i != k} p_i [T3^{2,i} T2 T1 T2 T3^{1,i}]_{n,n}, T1 = g_k g_k^H,
    // T3^{1,i} = column n of H1 R^{1/2} Phi V_i, T3^{2,i} = row n of (H1 R^{1/2})^H.
    const VectorXcd gk = G.col(k);
    const VectorXcd T2gk = T2.solve(gk);
    cd coupled{0.0, 0.0};
    for (int i = 0; i < K; ++i) {
        if (i == k) continue;
        const VectorXcd hi = chan.H2.col(i);
        const VectorXcd T3_1 = A * (reflect * hi * std::conj(hi[n]));
        const cd inner = gk.dot(T2.solve(T3_1));  // g_k^H T2 T3^{1,i}
        const cd outer = (A.adjoint().row(n) * T2gk).value();
        coupled += power.p[i] * outer * inner;
    }
    // d(Phi^H)/d conj(phi_n) contributes alpha.
    return phase.alpha() * power.p[k] * (direct - coupled);
}

MatrixXd rho_tangent_gradients(const ChannelRealization& chan, const PowerAllocation& power,
                               const PhaseVector& phase, double sigma2) {
    const int K = chan.users();
    const int N = chan.elements();
    const MatrixXcd A = chan.cascade();
    const MatrixXcd G = A * (phase.stacked().asDiagonal() * chan.H2);
    const InterferenceSolver solver(G, power.p, sigma2);
    const MatrixXcd H2c = chan.H2.conjugate();
    const double alpha = phase.alpha();

    MatrixXd out(K, N);
    for (int k = 0; k < K; ++k) {
        const VectorXcd& u = solver.whitened(k);  // T2_k g_k
        const VectorXcd w = A.adjoint() * u;
        // s(i) = g_i^H T2_k g_k
        const VectorXcd s = G.adjoint() * u;
        VectorXcd mix = VectorXcd::Zero(K);
        for (int i = 0; i < K; ++i) mix[i] = i == k ? cd(1.0) : -power.p[i] * std::conj(s[i]);
        const VectorXcd bracket = H2c * mix;
        for (int n = 0; n < N; ++n) {
            const cd D = alpha * power.p[k] * w[n] * bracket[n];
            out(k, n) = tangent_from_wirtinger(phase.phi()[n], D);
        }
    }
    return out;
}

namespace {

struct SurrogateEval {
    VectorXd rho;
    double value = std::numeric_limits<double>::infinity();
    bool valid = false;
};

SurrogateEval evaluate(const ChannelRealization& chan, const PowerAllocation& power,
                       const PhaseVector& phase, double sigma2) {
    SurrogateEval e;
    e.rho = post_bf_sinr(chan, phase, power, sigma2).per_user;
    if ((e.rho.array() > 0.0).all()) {
        e.value = lse_objective(e.rho);
        e.valid = std::isfinite(e.value);
    }
    return e;
}

VectorXd gradient_from(const VectorXd& rho, const MatrixXd& tangents) {
    const VectorXd x = rho.cwiseInverse();
    VectorXd weights = (x.array() - x.maxCoeff()).exp();
    weights /= weights.sum();
    // d OB / d rho_k = -softmax_k(1/rho) / rho_k^2
    const VectorXd coeff = -(weights.array() * x.array().square()).matrix();
    return tangents.transpose() * coeff;
}

}  // namespace

VectorXd lse_gradient(const ChannelRealization& chan, const PowerAllocation& power,
                      const PhaseVector& phase, double sigma2) {
    const VectorXd rho = post_bf_sinr(chan, phase, power, sigma2).per_user;
    if (!((rho.array() > 0.0).all())) throw DomainError("lse_gradient: some rho_k is zero");
    return gradient_from(rho, rho_tangent_gradients(chan, power, phase, sigma2));
}

LseResult lse_gradient_phase(const ChannelRealization& chan, const PowerAllocation& power,
                             const PhaseVector& init, double sigma2, const LseParams& params) {
    LseResult result;
    result.phase = init;
    const double alpha = init.alpha();
    SurrogateEval current = evaluate(chan, power, init, sigma2);
    result.min_sinr = current.rho.minCoeff();
    if (!current.valid) return result;

    PhaseVector theta = init;
    for (int it = 0;; ++it) {
        const VectorXd grad =
            gradient_from(current.rho, rho_tangent_gradients(chan, power, theta, sigma2));
        const double gnorm = grad.cwiseAbs().maxCoeff();
        result.gradient_norm = gnorm;
        result.iterations = it;

        if (it == 0 && params.verify_gradient) {
            const double h = 1e-6;
            double worst = 0.0;
            for (int n = 0; n < theta.size(); ++n) {
                VectorXd up = theta.theta();
                VectorXd dn = theta.theta();
                up[n] += h;
                dn[n] -= h;
                const double fd = (evaluate(chan, power, PhaseVector::from_angles(up, alpha), sigma2).value -
                                   evaluate(chan, power, PhaseVector::from_angles(dn, alpha), sigma2).value) /
                                  (2.0 * h);
                const double denom = std::max(std::abs(fd), 1e-3 * gnorm);
                if (denom > 0.0) worst = std::max(worst, std::abs(grad[n] - fd) / denom);
            }
            result.gradient_check_error = worst;
        }

        if (!std::isfinite(gnorm) || gnorm < params.gradient_tolerance) break;
        if (it >= params.max_iterations) {
            result.hit_iteration_cap = true;
            break;
        }

        const VectorXd direction = -grad / gnorm;
        const double slope = grad.dot(direction);
        double t = params.initial_step;
        bool moved = false;
        for (int bt = 0; bt < params.max_backtracks; ++bt, t *= params.shrink) {
            const PhaseVector trial =
                PhaseVector::from_angles(theta.theta() + t * direction, alpha);
            SurrogateEval e = evaluate(chan, power, trial, sigma2);
            if (e.valid && e.value <= current.value + params.armijo * t * slope) {
                theta = trial;
                current = std::move(e);
                moved = true;
                break;
            }
        }
        if (!moved) {
            result.stalled = true;
            break;
        }
        const double m = current.rho.minCoeff();
        if (m > result.min_sinr) {
            result.min_sinr = m;
            result.phase = theta;
        }
    }
    return result;
}

}  // namespace risopt
