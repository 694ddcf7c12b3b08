// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "risopt/core_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace risopt {

/// Every sampling routine draws from an explicit stream; trials never share one.
using Rng = std::mt19937_64;

enum class LinkKind { Los, Nlos };

/// 3GPP UMi distance law with antenna gains folded into the intercept.
struct PathLossModel {
    LinkKind kind = LinkKind::Nlos;
    double gt_dbi = 0.0;
    double gr_dbi = 0.0;
};

/// Linear power gain at distance d (metres). Throws DomainError for d <= 0.
double path_loss(double d, const PathLossModel& model);

/// Angles of the deterministic BS-RIS component. theta* in [0, pi], phi* in [0, 2pi).
struct LosAngleSet {
    VectorXd theta_los1;  // N, per RIS element
    VectorXd phi_los1;    // N
    VectorXd theta_los2;  // M, per BS antenna
    VectorXd phi_los2;    // M

    static LosAngleSet draw(int M, int N, Rng& rng);
};

/// Unit-modulus LOS matrix; only the spacing-to-wavelength ratios matter.
MatrixXcd los_steering_matrix(int M, int N, const LosAngleSet& angles, double d_bs_over_lambda,
                              double d_ris_over_lambda);

/// `count` points uniform over the first-quadrant annulus r_min <= |x| <= r_max
/// centred on the BS.
std::vector<Point2> sample_user_positions(const SystemConfig& config, Rng& rng, int count);

/// R[a,b] = rho^|a-b|; rho = 0 gives the identity.
MatrixXcd exponential_correlation(int N, double rho);

/// Standard circularly-symmetric complex normal entries, E|x|^2 = 1.
MatrixXcd complex_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

ChannelRealization sample_channel(const SystemConfig& config, Rng& rng);

/// Text record: header lines, then row-major complex pairs at 17 significant digits.
void write_channel(std::ostream& os, const ChannelRealization& chan);
ChannelRealization read_channel(std::istream& is);

/// FNV-1a over the raw IEEE bytes of every channel coefficient.
std::uint64_t channel_hash(const ChannelRealization& chan);

}  // namespace risopt
