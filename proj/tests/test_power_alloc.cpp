// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include "risopt/beamforming.hpp"
#include "risopt/errors.hpp"
#include "risopt/power_alloc.hpp"

#include <doctest.h>

using namespace risopt;

namespace {

GainTable random_table(std::mt19937_64& rng, int K, double cross = 0.3) {
    std::uniform_real_distribution<double> u(0.2, 1.0);
    GainTable t;
    t.f = MatrixXd(K, K);
    t.n = VectorXd(K);
    for (int k = 0; k < K; ++k) {
        t.n[k] = 0.05 * u(rng);
        for (int i = 0; i < K; ++i) t.f(k, i) = i == k ? u(rng) : cross * u(rng);
    }
    return t;
}

}  // namespace

TEST_CASE("gain table definitions") {
    std::mt19937_64 rng(1);
    const MatrixXcd G = oracle::gaussian(3, 3, rng);
    MatrixXcd beta = oracle::gaussian(3, 3, rng);
    beta.col(2) *= 2.0;
    const auto t = gain_table_from_gains(G, {beta}, 0.3);
    for (int k = 0; k < 3; ++k) {
        double bn = 0.0;
        for (int m = 0; m < 3; ++m) bn += std::norm(beta(m, k));
        CHECK(oracle::rel_err(t.n[k], 0.3 * bn) < 1e-12);
        for (int i = 0; i < 3; ++i) {
            cd inner = 0.0;
            for (int m = 0; m < 3; ++m) inner += std::conj(beta(m, k)) * G(m, i);
            CHECK(oracle::rel_err(t.f(k, i), std::norm(inner)) < 1e-12);
        }
    }
    // Orthogonal combiners remove the cross gains.
    const auto orth = gain_table_from_gains(MatrixXcd::Identity(2, 2), {MatrixXcd::Identity(2, 2)}, 1.0);
    CHECK(orth.f(0, 1) == 0.0);
    CHECK(orth.f(1, 0) == 0.0);
    const VectorXd p = (VectorXd(2) << 0.5, 0.25).finished();
    CHECK(orth.sinr(p)[0] == doctest::Approx(0.5));
}

TEST_CASE("single user takes its cap") {
    GainTable t;
    t.f = MatrixXd::Constant(1, 1, 2.0);
    t.n = VectorXd::Constant(1, 0.1);
    const auto r = max_min_power(t, VectorXd::Constant(1, 0.4));
    CHECK(r.power.p[0] == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(oracle::rel_err(r.tau, 0.4 * 2.0 / 0.1) < 1e-8);
    CHECK_FALSE(r.degenerate);
}

TEST_CASE("decoupled users all transmit at their caps") {
    GainTable t;
    t.f = MatrixXd::Zero(3, 3);
    t.f.diagonal() << 1.0, 3.0, 0.5;
    t.n = VectorXd::Constant(3, 0.2);
    const VectorXd caps = (VectorXd(3) << 0.3, 0.1, 0.9).finished();
    const auto r = max_min_power(t, caps);
    const double expect = std::min({0.3 * 1.0 / 0.2, 0.1 * 3.0 / 0.2, 0.9 * 0.5 / 0.2});
    CHECK(oracle::rel_err(r.tau, expect) < 1e-8);
    CHECK(r.power.p.maxCoeff() <= caps.maxCoeff() + 1e-15);
}

TEST_CASE("two-user optimum matches a dense grid search") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const auto t = random_table(rng, 2);
        const VectorXd caps = (VectorXd(2) << 0.5, 0.3 + 0.2 * trial / 10.0).finished();
        const auto r = max_min_power(t, caps);
        const double grid = oracle::grid_max_min_tau(t.f, t.n, caps, 2000);
        CHECK(oracle::rel_err(r.tau, grid) < 1e-3);
        CHECK(r.tau >= grid * (1.0 - 1e-9));
    }
}

TEST_CASE("returned tau is the minimum SINR at the returned power") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const int K = 1 + trial % 6;
        const auto t = random_table(rng, K);
        const VectorXd caps = VectorXd::Constant(K, 0.46);
        const auto r = max_min_power(t, caps);
        CHECK(oracle::rel_err(r.tau, t.sinr(r.power.p).minCoeff()) < 1e-8);
        CHECK((r.power.p.array() <= caps.array() * (1.0 + 1e-12)).all());
        CHECK((r.power.p.array() >= 0.0).all());
    }
}

TEST_CASE("no single-coordinate perturbation improves the optimum") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const int K = 2 + trial % 4;
        const auto t = random_table(rng, K);
        const VectorXd caps = VectorXd::Constant(K, 0.46);
        const auto r = max_min_power(t, caps);
        const double base = t.sinr(r.power.p).minCoeff();
        for (int k = 0; k < K; ++k) {
            for (double sign : {-1.0, 1.0}) {
                VectorXd p = r.power.p;
                p[k] = std::clamp(p[k] + sign * 1e-4 * caps[k], 0.0, caps[k]);
                CHECK(t.sinr(p).minCoeff() <= base * (1.0 + 1e-6));
            }
        }
    }
}

TEST_CASE("larger caps never lower the optimum") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const int K = 2 + trial % 4;
        const auto t = random_table(rng, K);
        VectorXd caps(K);
        for (int k = 0; k < K; ++k) caps[k] = u(rng);
        VectorXd bigger = caps;
        bigger[trial % K] *= 1.0 + u(rng);
        CHECK(max_min_power(t, bigger).tau >= max_min_power(t, caps).tau * (1.0 - 1e-7));
    }
}

TEST_CASE("interference fixed point rises monotonically from zero") {
    std::mt19937_64 rng(6);
    const auto t = random_table(rng, 4);
    const VectorXd caps = VectorXd::Constant(4, 0.46);
    const double tau = 0.5 * max_min_power(t, caps).tau;
    std::vector<VectorXd> iterates;
    const auto r = interference_fixed_point(t, caps, tau, {}, &iterates);
    CHECK(r.converged);
    CHECK(r.feasible);
    REQUIRE(iterates.size() >= 2);
    for (std::size_t i = 1; i < iterates.size(); ++i) {
        CHECK((iterates[i].array() >= iterates[i - 1].array() - 1e-15).all());
    }
    const auto infeasible = interference_fixed_point(t, caps, 4.0 * tau * 2.0);
    CHECK_FALSE(infeasible.feasible);
}

TEST_CASE("zero direct gain is flagged, not thrown") {
    GainTable t;
    t.f = MatrixXd::Ones(2, 2);
    t.f(1, 1) = 0.0;
    t.n = VectorXd::Constant(2, 0.1);
    const VectorXd caps = VectorXd::Constant(2, 0.3);
    const auto r = max_min_power(t, caps);
    CHECK(r.degenerate);
    CHECK(r.tau == 0.0);
    CHECK(r.power.p == caps);
}

TEST_CASE("non-finite gains are rejected") {
    GainTable t;
    t.f = MatrixXd::Ones(2, 2);
    t.f(0, 1) = std::numeric_limits<double>::infinity();
    t.n = VectorXd::Constant(2, 0.1);
    CHECK_THROWS_AS(max_min_power(t, VectorXd::Constant(2, 0.3)), NumericError);
}

TEST_CASE("EMF folding into the power cap") {
    const VectorXd cap = effective_power_cap(0.5, {63e-4}, {0.0029});
    CHECK(oracle::rel_err(cap[0], 0.0029 / 0.0063) < 1e-15);
    CHECK(cap[0] == doctest::Approx(0.4603).epsilon(1e-4));
    CHECK(effective_power_cap(0.5, {63e-4}, {1e300})[0] == 0.5);
    CHECK(effective_power_cap(0.5, {1e-3}, {1e-3})[0] == 0.5);
    CHECK_THROWS_AS(effective_power_cap(0.5, {0.0}, {0.0029}), DomainError);
    CHECK_THROWS_AS(effective_power_cap(0.5, {-1.0}, {0.0029}), DomainError);

    SystemConfig c;
    CHECK((power_caps(c).array() == cap[0]).all());
    c.emf_constraint = false;
    CHECK((power_caps(c).array() == 0.5).all());
}
