// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "risopt/channel_gen.hpp"
#include "risopt/core_model.hpp"

#include <functional>
#include <vector>

namespace risopt {

/// Per-receiver quadratic forms in the stacked RIS vector Phi_vec = alpha * phi.
///
/// cross[k] is N x K with column i equal to b_{k,i}, chosen so that
/// b_{k,i}^H Phi_vec = beta_k^H g_i. The direct form of user k is b_{k,k}; the
/// interference seen at receiver k uses b_{k,i} for i != k, so
///   SINR_k = p_k |b_{k,k}^H x|^2 / (sum_{i != k} p_i |b_{k,i}^H x|^2 + sigma_tilde2_k).
struct QuadraticFormSet {
    std::vector<MatrixXcd> cross;
    VectorXd sigma_tilde2;
    VectorXd p;

    [[nodiscard]] int users() const { return static_cast<int>(p.size()); }
    [[nodiscard]] int elements() const { return cross.empty() ? 0 : static_cast<int>(cross[0].rows()); }
    [[nodiscard]] VectorXcd b(int k) const { return cross[static_cast<std::size_t>(k)].col(k); }
    /// R_{k,i} = b_{k,i} b_{k,i}^H
    [[nodiscard]] MatrixXcd R(int k, int i) const;

    [[nodiscard]] VectorXd sinr(const VectorXcd& phi_vec) const;
    [[nodiscard]] double min_sinr(const PhaseVector& phase) const { return sinr(phase.stacked()).minCoeff(); }
    /// Lifted ratios p_k Tr(R_kk V) / (sum_{i != k} p_i Tr(R_ki V) + sigma_tilde2_k).
    [[nodiscard]] VectorXd lifted_ratios(const MatrixXcd& V) const;
};

QuadraticFormSet build_quadratic_forms(const ChannelRealization& chan, const Beamformer& bf,
                                       const PowerAllocation& power, double sigma2);

// ---------------------------------------------------------------------------
// Semidefinite relaxation with a Dinkelbach outer loop.
//
// The relaxed matrix is kept factored, V = Y Y^H with every row of Y scaled to
// norm alpha, so V is PSD with diag(V) = alpha^2 at every iterate. Each
// parametric subproblem max_V min_k [p_k Tr(R_kk V) - lambda (...)] is solved by
// Riemannian gradient ascent on a smoothed minimum with increasing sharpness.

struct SdrParams {
    int max_outer = 30;
    double outer_tolerance = 1e-4;  // relative improvement of lambda
    int inner_iterations = 1000;    // ascent steps per subproblem
    double inner_tolerance = 1e-6;  // relative Riemannian gradient norm, last stage
    int rank = 0;                   // columns of Y; 0 picks ceil(sqrt(2N)) + 1
    int randomizations = 200;
    double rank_one_fraction = 1.0 - 1e-3;

    bool operator==(const SdrParams&) const = default;
};

struct SdrResult {
    PhaseVector phase;
    double min_sinr = 0.0;        // of `phase` under the quadratic forms
    double relaxed_value = 0.0;   // Dinkelbach lambda of the relaxed problem
    MatrixXcd lifted;             // final V, diag = alpha^2
    int outer_iterations = 0;
    bool rank_one = false;
    bool kept_input = false;
    bool warning = false;         // lambda still moving when max_outer was reached
};

SdrResult sdr_dinkelbach_phase(const QuadraticFormSet& q, const PhaseVector& init,
                               const SdrParams& params, Rng& rng);

// ---------------------------------------------------------------------------
// Smooth-min (log-sum-exp) surrogate with projected gradient descent.

/// log sum_k exp(1/rho_k), overflow-safe. Throws DomainError if any rho_k <= 0.
double lse_objective(const VectorXd& rho);

/// Conjugate Wirtinger derivative d rho_k / d conj(phi_n), evaluated through the
/// trace factorisation with T2 = (Sigma_k + sigma2 I)^{-1} applied by Cholesky solves.
/// The real derivative along the unit circle is tangent_from_wirtinger(phi_n, value).
cd rho_derivative(const ChannelRealization& chan, const PowerAllocation& power,
                  const PhaseVector& phase, double sigma2, int k, int n);

/// d rho / d theta_n = 2 Im(conj(phi_n) * D) for D = d rho / d conj(phi_n).
inline double tangent_from_wirtinger(cd phi_n, cd wirtinger) {
    return 2.0 * (std::conj(phi_n) * wirtinger).imag();
}

/// K x N matrix of d rho_k / d theta_n, all users at once.
MatrixXd rho_tangent_gradients(const ChannelRealization& chan, const PowerAllocation& power,
                               const PhaseVector& phase, double sigma2);

/// Gradient of the surrogate objective with respect to the phase angles.
VectorXd lse_gradient(const ChannelRealization& chan, const PowerAllocation& power,
                      const PhaseVector& phase, double sigma2);

struct LseParams {
    int max_iterations = 200;
    double gradient_tolerance = 1e-6;  // infinity norm
    double initial_step = 1.0;         // radians on the largest coordinate
    double shrink = 0.5;
    double armijo = 1e-4;
    int max_backtracks = 50;
    // Compare the analytic gradient with central differences at the first iterate.
    bool verify_gradient = false;

    bool operator==(const LseParams&) const = default;
};

struct LseResult {
    PhaseVector phase;
    double min_sinr = 0.0;
    int iterations = 0;
    bool hit_iteration_cap = false;
    bool stalled = false;               // line search found no decrease
    double gradient_norm = 0.0;         // at the last iterate
    double gradient_check_error = 0.0;  // filled when verify_gradient is set
};

LseResult lse_gradient_phase(const ChannelRealization& chan, const PowerAllocation& power,
                             const PhaseVector& init, double sigma2, const LseParams& params);

// ---------------------------------------------------------------------------
// Randomized coordinate search on a B-bit phase grid.

using PhaseEvaluator = std::function<double(const PhaseVector&)>;

struct QuantParams {
    int bits = 3;
    int window = 50;         // L
    double epsilon = 1e-6;   // relative to the current objective
    int max_evaluations = 1'000'000;

    bool operator==(const QuantParams&) const = default;
};

struct QuantResult {
    PhaseVector phase;
    double min_sinr = 0.0;
    std::vector<double> history;  // objective after every evaluation, starts with init
    int evaluations = 0;
};

/// Uniformly random grid phase vector, theta_n in {2 pi l / 2^B}.
PhaseVector random_grid_phase(int N, int bits, double alpha, Rng& rng);
/// Uniformly random continuous phases.
PhaseVector random_phase(int N, double alpha, Rng& rng);
bool on_grid(const PhaseVector& phase, int bits);

/// Throws ConfigError if bits/window are < 1 or `init` is off the grid.
QuantResult quantized_heuristic_phase(const PhaseEvaluator& evaluate, const PhaseVector& init,
                                      const QuantParams& params, Rng& rng);

}  // namespace risopt
