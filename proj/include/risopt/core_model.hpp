// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace risopt {

using cd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2&) const = default;
};

/// Antenna gains in dBi per node class.
struct AntennaGains {
    double bs_dbi = 5.0;
    double ris_dbi = 0.0;
    double user_dbi = 0.0;

    bool operator==(const AntennaGains&) const = default;
};

/// Scenario constants. All powers in watts, all distances in metres.
struct SystemConfig {
    int M = 12;  // BS antennas
    int N = 24;  // RIS elements
    int K = 6;   // users
    double alpha = 1.0;
    double bandwidth_hz = 1e8;
    // -174 dBm/Hz over 100 MHz
    double sigma2 = 1e-3 * 3.9810717055349725e-10;
    double kappa = 10.0;
    double p_max = 0.5;
    bool emf_constraint = true;
    std::vector<double> sar_ref = std::vector<double>(6, 63e-4);
    std::vector<double> emf_max = std::vector<double>(6, 0.0029);
    AntennaGains gains;
    Point2 ris_position{0.5, 0.5};
    double r_min = 10.0;
    double r_max = 70.0;
    double d_bs_over_lambda = 0.5;
    double d_ris_over_lambda = 0.5;
    // Exponential RIS correlation coefficient; 0 gives R_RIS = I.
    double ris_correlation = 0.0;

    /// Throws ConfigError naming the first violated constraint.
    void validate() const;

    /// Copy with K users; per-user SAR/EMF vectors are broadcast from their first entry
    /// when they are uniform, otherwise their length must already match.
    [[nodiscard]] SystemConfig with_users(int users) const;

    bool operator==(const SystemConfig&) const = default;
};

/// One random draw of the propagation environment.
struct ChannelRealization {
    MatrixXcd H1;          // M x N, BS <- RIS
    MatrixXcd R_ris_sqrt;  // N x N
    MatrixXcd H2;          // N x K, column k is h_{2,k} with path loss applied
    std::vector<Point2> user_positions;

    [[nodiscard]] int antennas() const { return static_cast<int>(H1.rows()); }
    [[nodiscard]] int elements() const { return static_cast<int>(H1.cols()); }
    [[nodiscard]] int users() const { return static_cast<int>(H2.cols()); }

    /// H1 * R_RIS^{1/2}, the part of every effective channel that does not depend on k.
    [[nodiscard]] MatrixXcd cascade() const { return H1 * R_ris_sqrt; }

    /// Throws ConfigError on inconsistent shapes.
    void check_dimensions() const;
};

/// RIS reflection coefficients alpha * exp(j theta_n).
class PhaseVector {
public:
    PhaseVector() = default;

    /// Angles are wrapped into [0, 2pi).
    static PhaseVector from_angles(const VectorXd& theta, double alpha);
    /// Each entry is normalized to unit modulus; zero entries map to phase 0.
    static PhaseVector from_complex(const VectorXcd& phi, double alpha);
    static PhaseVector zeros(int n, double alpha);

    [[nodiscard]] const VectorXd& theta() const { return theta_; }
    [[nodiscard]] const VectorXcd& phi() const { return phi_; }
    [[nodiscard]] double alpha() const { return alpha_; }
    [[nodiscard]] int size() const { return static_cast<int>(theta_.size()); }

    /// alpha * [phi_1, ..., phi_N]^T
    [[nodiscard]] VectorXcd stacked() const { return alpha_ * phi_; }

private:
    VectorXd theta_;
    VectorXcd phi_;
    double alpha_ = 1.0;
};

struct PowerAllocation {
    VectorXd p;  // watts
};

/// Receive combiners, column k is beta_k.
struct Beamformer {
    MatrixXcd beta;  // M x K
};

struct StageMark {
    std::string label;
    double minimum = 0.0;
};

struct SinrReport {
    VectorXd per_user;  // linear
    double minimum = 0.0;
    std::vector<StageMark> stage_trace;

    static SinrReport from_values(VectorXd values);
};

/// Column k is H1 * R^{1/2} * diag(alpha*phi) * h_{2,k}.
MatrixXcd effective_channel(const ChannelRealization& chan, const PhaseVector& phase);

/// SINR of every user for explicit combiners, noise sigma2 * ||beta_k||^2.
SinrReport sinr_per_user(const ChannelRealization& chan, const PhaseVector& phase,
                         const PowerAllocation& power, const Beamformer& bf, double sigma2);

/// Same as above for a precomputed effective channel matrix.
SinrReport sinr_from_gains(const MatrixXcd& G, const PowerAllocation& power,
                           const Beamformer& bf, double sigma2);

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace risopt
