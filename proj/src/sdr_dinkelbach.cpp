// SPDX-License-Identifier: Apache-2.0
#include "risopt/linalg.hpp"
#include "risopt/phase_opt.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace risopt {

namespace {

/// Smoothed minimum of the per-user margins
///   l_k = (p_k e_kk - lambda (sum_{i != k} p_i e_ki + s_k)) / d_k,  e_ki = |b_ki^H Y|^2,
/// i.e. the Dinkelbach subproblem at V = Y Y^H, each user scaled by its denominator
/// d_k at the previous outer iterate (this scaling makes the outer loop superlinear).
struct Smoothed {
    double value = 0.0;
    VectorXd margin;
    MatrixXcd grad;  // Euclidean ascent direction in Y
};

Smoothed smoothed_min(const QuadraticFormSet& q, const VectorXd& d, double lambda, double mu,
                      const MatrixXcd& Y, bool with_grad) {
    const int K = q.users();
    std::vector<MatrixXcd> P(static_cast<std::size_t>(K));
    Smoothed out;
    out.margin.resize(K);
    for (int k = 0; k < K; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        P[ks] = q.cross[ks].adjoint() * Y;
        const VectorXd e = P[ks].rowwise().squaredNorm();
        const double interference = q.p.dot(e) - q.p[k] * e[k];
        const double s = q.sigma_tilde2[k];
        out.margin[k] = (q.p[k] * e[k] - lambda * (interference + s)) / d[k];
    }
    const double lo = out.margin.minCoeff();
    VectorXd w = (-mu * (out.margin.array() - lo)).exp();
    const double z = w.sum();
    w /= z;
    out.value = lo - std::log(z) / mu;
    if (!with_grad) return out;

    out.grad = MatrixXcd::Zero(Y.rows(), Y.cols());
    for (int k = 0; k < K; ++k) {
        if (w[k] < 1e-300) continue;
        const auto ks = static_cast<std::size_t>(k);
        VectorXd c = -lambda * q.p;
        c[k] = q.p[k];
        out.grad += (2.0 * w[k] / d[k]) * q.cross[ks] * (c.cast<cd>().asDiagonal() * P[ks]);
    }
    return out;
}

/// Project each row of G onto the tangent space of the sphere through the row of Y.
MatrixXcd tangent(const MatrixXcd& Y, MatrixXcd G, double a2) {
    for (Eigen::Index n = 0; n < Y.rows(); ++n) {
        const double ip = (Y.row(n).conjugate().cwiseProduct(G.row(n))).sum().real();
        G.row(n) -= (ip / a2) * Y.row(n);
    }
    return G;
}

MatrixXcd retract(MatrixXcd Y, double alpha) {
    for (Eigen::Index n = 0; n < Y.rows(); ++n) {
        const double norm = Y.row(n).norm();
        if (norm > 0.0) Y.row(n) *= alpha / norm;
    }
    return Y;
}

double real_inner(const MatrixXcd& A, const MatrixXcd& B) {
    return (A.conjugate().cwiseProduct(B)).sum().real();
}

/// Riemannian gradient ascent with Barzilai-Borwein steps and an Armijo guard.
void ascend(const QuadraticFormSet& q, const VectorXd& d, double lambda, double mu, double alpha, int max_iterations,
            double tolerance, MatrixXcd& Y) {
    const double a2 = alpha * alpha;
    Smoothed cur = smoothed_min(q, d, lambda, mu, Y, true);
    MatrixXcd G = tangent(Y, cur.grad, a2);
    const double g0 = G.norm();
    if (!(g0 > 0.0)) return;
    double t = alpha / g0;
    for (int it = 0; it < max_iterations; ++it) {
        const double gn2 = G.squaredNorm();
        if (std::sqrt(gn2) <= tolerance * g0) return;
        MatrixXcd next;
        Smoothed trial;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
            next = retract(Y + t * G, alpha);
            trial = smoothed_min(q, d, lambda, mu, next, false);
            if (trial.value >= cur.value + 1e-4 * t * gn2) {
                accepted = true;
                break;
            }
        }
        if (!accepted || trial.value - cur.value <= 1e-15 * std::abs(cur.value)) return;
        trial = smoothed_min(q, d, lambda, mu, next, true);
        const MatrixXcd Gn = tangent(next, trial.grad, a2);
        const MatrixXcd s = next - Y;
        const double sy = real_inner(s, Gn - G);
        t = sy < 0.0 ? s.squaredNorm() / -sy : 2.0 * t;
        Y = std::move(next);
        cur = std::move(trial);
        G = Gn;
    }
}

/// Denominators sum_{i != k} p_i Tr(R_ki V) + sigma_tilde2_k at V = Y Y^H.
VectorXd denominators(const QuadraticFormSet& q, const MatrixXcd& Y) {
    const int K = q.users();
    VectorXd d(K);
    for (int k = 0; k < K; ++k) {
        const VectorXd e = (q.cross[static_cast<std::size_t>(k)].adjoint() * Y).rowwise().squaredNorm();
        d[k] = q.p.dot(e) - q.p[k] * e[k] + q.sigma_tilde2[k];
    }
    return d;
}

/// Solves the subproblem at `lambda`, sharpening the smoothed minimum in stages.
void solve_subproblem(const QuadraticFormSet& q, double lambda, double alpha, const SdrParams& params,
                      MatrixXcd& Y) {
    const VectorXd d = denominators(q, Y);
    const VectorXd ratio = q.lifted_ratios(Y * Y.adjoint());
    const double scale = std::max(ratio.maxCoeff(), 1e-12);
    constexpr int kStages = 5;
    for (int stage = 1; stage <= kStages; ++stage) {
        const double mu = std::pow(10.0, stage) / scale;
        const bool last = stage == kStages;
        const int budget = std::max(1, params.inner_iterations / kStages);
        ascend(q, d, lambda, mu, alpha, budget, last ? params.inner_tolerance : 1e-3, Y);
    }
}

}  // namespace

SdrResult sdr_dinkelbach_phase(const QuadraticFormSet& q, const PhaseVector& init,
                               const SdrParams& params, Rng& rng) {
    const int N = init.size();
    const int K = q.users();
    const double alpha = init.alpha();

    SdrResult result;
    result.phase = init;
    result.min_sinr = q.min_sinr(init);
    const VectorXcd x0 = init.stacked();
    result.lifted = x0 * x0.adjoint();
    result.relaxed_value = q.lifted_ratios(result.lifted).minCoeff();
    result.kept_input = true;
    result.rank_one = true;
    if (N <= 1 || K < 1) return result;

    // Factor V = Y Y^H, starting next to the incoming rank-one point.
    const int rank = std::clamp(params.rank > 0 ? params.rank
                                                : static_cast<int>(std::ceil(std::sqrt(2.0 * N))) + 1,
                                1, N);
    MatrixXcd Y = 1e-2 * alpha * complex_normal(N, rank, rng);
    Y.col(0) += x0;
    Y = retract(Y, alpha);

    // Generalized Dinkelbach: lambda <- min_k ratio_k(V) at the subproblem optimum.
    double lambda = std::max(0.0, result.relaxed_value);
    MatrixXcd V = result.lifted;
    bool settled = false;
    for (int outer = 1; outer <= params.max_outer; ++outer) {
        result.outer_iterations = outer;
        solve_subproblem(q, lambda, alpha, params, Y);
        const MatrixXcd candidate = Y * Y.adjoint();
        const double value = q.lifted_ratios(candidate).minCoeff();
        if (!(value > lambda)) {
            settled = true;
            break;
        }
        const double gain = value - lambda;
        V = candidate;
        lambda = value;
        if (gain <= params.outer_tolerance * lambda) {
            settled = true;
            break;
        }
    }
    result.warning = !settled;
    result.lifted = linalg::hermitian_part(V);
    result.relaxed_value = lambda;

    // Rank-one extraction.
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(result.lifted);
    const VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
    const MatrixXcd& U = eig.eigenvectors();
    const double trace = lam.sum();
    result.rank_one = trace > 0.0 && lam[N - 1] >= params.rank_one_fraction * trace;

    PhaseVector best = init;
    double best_value = result.min_sinr;
    auto consider = [&](const VectorXcd& z) {
        const PhaseVector cand = PhaseVector::from_complex(z, alpha);
        const double v = q.min_sinr(cand);
        if (v > best_value) {
            best_value = v;
            best = cand;
        }
    };
    consider(U.col(N - 1));
    if (!result.rank_one) {
        const MatrixXcd root = U * lam.cwiseSqrt().cast<cd>().asDiagonal();
        for (int r = 0; r < params.randomizations; ++r) {
            consider(root * complex_normal(N, 1, rng));
        }
    }
    result.kept_input = best_value <= result.min_sinr;
    result.phase = best;
    result.min_sinr = best_value;
    return result;
}

}  // namespace risopt
