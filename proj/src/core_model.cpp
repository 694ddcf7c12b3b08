// SPDX-License-Identifier: Apache-2.0
#include "risopt/core_model.hpp"

#include "risopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace risopt {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

bool uniform(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

void SystemConfig::validate() const {
    require(M >= 1, "M must be >= 1");
    require(N >= 1, "N must be >= 1");
    require(K >= 1, "K must be >= 1");
    require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0,1]");
    require(sigma2 > 0.0 && std::isfinite(sigma2), "sigma2 must be > 0");
    require(bandwidth_hz > 0.0, "bandwidth_hz must be > 0");
    require(kappa >= 0.0, "kappa must be >= 0");
    require(p_max > 0.0, "p_max must be > 0");
    require(r_min >= 0.0 && r_min < r_max, "r_min must satisfy 0 <= r_min < r_max");
    require(d_bs_over_lambda > 0.0 && d_ris_over_lambda > 0.0, "element spacings must be > 0");
    require(ris_correlation >= 0.0 && ris_correlation < 1.0, "ris_correlation must lie in [0,1)");
    require(static_cast<int>(sar_ref.size()) == K, "sar_ref must have K entries");
    require(static_cast<int>(emf_max.size()) == K, "emf_max must have K entries");
    for (double s : sar_ref) require(s > 0.0, "sar_ref entries must be > 0");
    for (double e : emf_max) require(e > 0.0, "emf_max entries must be > 0");
}

SystemConfig SystemConfig::with_users(int users) const {
    SystemConfig out = *this;
    out.K = users;
    auto resize = [&](std::vector<double>& v, const char* name) {
        if (static_cast<int>(v.size()) == users) return;
        if (v.empty() || !uniform(v)) {
            throw ConfigError(std::string(name) + " is not uniform and has " +
                              std::to_string(v.size()) + " entries, cannot resize to K=" +
                              std::to_string(users));
        }
        v.assign(static_cast<std::size_t>(users), v.front());
    };
    resize(out.sar_ref, "sar_ref");
    resize(out.emf_max, "emf_max");
    return out;
}

void ChannelRealization::check_dimensions() const {
    std::ostringstream msg;
    if (H1.rows() < 1 || H1.cols() < 1) {
        msg << "H1 is empty";
    } else if (R_ris_sqrt.rows() != H1.cols() || R_ris_sqrt.cols() != H1.cols()) {
        msg << "R_ris_sqrt is " << R_ris_sqrt.rows() << "x" << R_ris_sqrt.cols() << ", expected "
            << H1.cols() << "x" << H1.cols();
    } else if (H2.rows() != H1.cols()) {
        msg << "user channels have length " << H2.rows() << ", expected " << H1.cols();
    }
    if (!msg.str().empty()) throw ConfigError(msg.str());
}

PhaseVector PhaseVector::from_angles(const VectorXd& theta, double alpha) {
    PhaseVector out;
    out.alpha_ = alpha;
    out.theta_.resize(theta.size());
    out.phi_.resize(theta.size());
    for (Eigen::Index n = 0; n < theta.size(); ++n) {
        double t = std::fmod(theta[n], kTwoPi);
        if (t < 0.0) t += kTwoPi;
        if (t >= kTwoPi) t = 0.0;
        out.theta_[n] = t;
        out.phi_[n] = std::polar(1.0, t);
    }
    return out;
}

PhaseVector PhaseVector::from_complex(const VectorXcd& phi, double alpha) {
    VectorXd theta(phi.size());
    for (Eigen::Index n = 0; n < phi.size(); ++n) {
        theta[n] = std::abs(phi[n]) > 0.0 ? std::arg(phi[n]) : 0.0;
    }
    return from_angles(theta, alpha);
}

PhaseVector PhaseVector::zeros(int n, double alpha) {
    return from_angles(VectorXd::Zero(n), alpha);
}

SinrReport SinrReport::from_values(VectorXd values) {
    SinrReport r;
    r.per_user = std::move(values);
    r.minimum = r.per_user.size() > 0 ? r.per_user.minCoeff() : 0.0;
    return r;
}

MatrixXcd effective_channel(const ChannelRealization& chan, const PhaseVector& phase) {
    chan.check_dimensions();
    if (phase.size() != chan.elements()) {
        throw ConfigError("phase vector has " + std::to_string(phase.size()) +
                          " entries, RIS has " + std::to_string(chan.elements()));
    }
    const VectorXcd reflect = phase.stacked();
    return chan.cascade() * (reflect.asDiagonal() * chan.H2);
}

SinrReport sinr_from_gains(const MatrixXcd& G, const PowerAllocation& power, const Beamformer& bf,
                           double sigma2) {
    if (!(sigma2 > 0.0)) throw ConfigError("noise power sigma2 must be > 0");
    const Eigen::Index K = G.cols();
    if (power.p.size() != K || bf.beta.cols() != K || bf.beta.rows() != G.rows()) {
        throw ConfigError("power/beamformer dimensions do not match the effective channel");
    }
    // F(k, i) = |beta_k^H g_i|^2
    const MatrixXd F = (bf.beta.adjoint() * G).cwiseAbs2();
    VectorXd sinr(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        double interference = 0.0;
        for (Eigen::Index i = 0; i < K; ++i) {
            if (i != k) interference += power.p[i] * F(k, i);
        }
        const double denom = interference + sigma2 * bf.beta.col(k).squaredNorm();
        const double signal = power.p[k] * F(k, k);
        sinr[k] = denom > 0.0 ? signal / denom : 0.0;
    }
    return SinrReport::from_values(std::move(sinr));
}

SinrReport sinr_per_user(const ChannelRealization& chan, const PhaseVector& phase,
                         const PowerAllocation& power, const Beamformer& bf, double sigma2) {
    return sinr_from_gains(effective_channel(chan, phase), power, bf, sigma2);
}

}  // namespace risopt
