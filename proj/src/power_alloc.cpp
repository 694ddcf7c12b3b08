// SPDX-License-Identifier: Apache-2.0
#include "risopt/power_alloc.hpp"

#include "risopt/errors.hpp"

#include <algorithm>
#include <cmath>

namespace risopt {

VectorXd GainTable::sinr(const VectorXd& p) const {
    const Eigen::Index K = n.size();
    VectorXd out(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const double interference = f.row(k).dot(p) - f(k, k) * p[k];
        const double denom = interference + n[k];
        out[k] = denom > 0.0 ? p[k] * f(k, k) / denom : 0.0;
    }
    return out;
}

GainTable gain_table_from_gains(const MatrixXcd& G, const Beamformer& bf, double sigma2) {
    if (bf.beta.rows() != G.rows() || bf.beta.cols() != G.cols()) {
        throw ConfigError("beamformer shape does not match the effective channel");
    }
    GainTable t;
    t.f = (bf.beta.adjoint() * G).cwiseAbs2();
    t.n = sigma2 * bf.beta.colwise().squaredNorm().transpose();
    return t;
}

GainTable gain_table(const ChannelRealization& chan, const PhaseVector& phase,
                     const Beamformer& bf, double sigma2) {
    return gain_table_from_gains(effective_channel(chan, phase), bf, sigma2);
}

FixedPointResult interference_fixed_point(const GainTable& table, const VectorXd& caps, double tau,
                                          const FixedPointOptions& options,
                                          std::vector<VectorXd>* iterates) {
    const Eigen::Index K = table.n.size();
    FixedPointResult r;
    r.p = VectorXd::Zero(K);
    if (iterates) iterates->push_back(r.p);

    VectorXd target(K);
    auto targets = [&](const VectorXd& p) {
        for (Eigen::Index k = 0; k < K; ++k) {
            const double interference = table.f.row(k).dot(p) - table.f(k, k) * p[k];
            target[k] = tau * (interference + table.n[k]) / table.f(k, k);
        }
    };

    for (r.iterations = 1; r.iterations <= options.max_iterations; ++r.iterations) {
        targets(r.p);
        const VectorXd next = target.cwiseMin(caps);
        const double step = (next - r.p).cwiseAbs().maxCoeff();
        r.p = next;
        if (iterates) iterates->push_back(r.p);
        if (step < options.tolerance) {
            r.converged = true;
            break;
        }
    }
    if (!r.converged) return r;

    targets(r.p);
    r.feasible = true;
    for (Eigen::Index k = 0; k < K; ++k) {
        if (target[k] > caps[k] * (1.0 + 1e-12)) r.feasible = false;
    }
    return r;
}

MaxMinPowerResult max_min_power(const GainTable& table, const VectorXd& caps,
                                const MaxMinPowerOptions& options) {
    const Eigen::Index K = table.n.size();
    if (caps.size() != K || table.f.rows() != K || table.f.cols() != K) {
        throw ConfigError("max_min_power: gain table and caps disagree on K");
    }
    if (!table.f.allFinite() || !table.n.allFinite() || !caps.allFinite()) {
        throw NumericError("max_min_power: non-finite gains");
    }

    MaxMinPowerResult out;
    if (K == 0) return out;
    if ((table.f.diagonal().array() <= 0.0).any() || (table.n.array() <= 0.0).any()) {
        out.power.p = caps;
        out.tau = 0.0;
        out.degenerate = true;
        return out;
    }

    double lo = 0.0;
    double hi = (caps.array() * table.f.diagonal().array() / table.n.array()).minCoeff();
    VectorXd best = VectorXd::Zero(K);

    const FixedPointResult at_hi = interference_fixed_point(table, caps, hi, options.fixed_point);
    if (at_hi.feasible) {
        lo = hi;
        best = at_hi.p;
    }
    while (hi - lo > options.relative_tolerance * hi) {
        const double mid = 0.5 * (lo + hi);
        const FixedPointResult fp = interference_fixed_point(table, caps, mid, options.fixed_point);
        if (fp.feasible) {
            lo = mid;
            best = fp.p;
        } else {
            hi = mid;
        }
        ++out.bisection_steps;
    }
    out.power.p = best;
    out.tau = table.sinr(best).minCoeff();
    return out;
}

VectorXd effective_power_cap(double p_max, const std::vector<double>& sar_ref,
                             const std::vector<double>& emf_max) {
    if (sar_ref.size() != emf_max.size()) {
        throw ConfigError("sar_ref and emf_max must have the same length");
    }
    VectorXd caps(static_cast<Eigen::Index>(sar_ref.size()));
    for (std::size_t k = 0; k < sar_ref.size(); ++k) {
        if (!(sar_ref[k] > 0.0)) {
            throw DomainError("sar_ref must be > 0 for user " + std::to_string(k));
        }
        caps[static_cast<Eigen::Index>(k)] = std::min(p_max, emf_max[k] / sar_ref[k]);
    }
    return caps;
}

VectorXd power_caps(const SystemConfig& config) {
    if (!config.emf_constraint) return VectorXd::Constant(config.K, config.p_max);
    return effective_power_cap(config.p_max, config.sar_ref, config.emf_max);
}

}  // namespace risopt
