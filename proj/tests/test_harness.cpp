// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include "risopt/errors.hpp"
#include "risopt/harness.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace risopt;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "cfg.yaml");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

/// Every CSV line with the wall_time_seconds column (index 11) removed.
std::vector<std::string> without_wall_time(const std::vector<TrialRecord>& rows) {
    std::vector<std::string> out;
    for (auto r : rows) {
        r.wall_time_seconds = 0.0;
        out.push_back(csv_row(r));
    }
    return out;
}

const char* kSmall = "M: 3\nN: 4\nK: [1, 2]\nB: [1, 2]\ntrials: 3\nseed: 11\nmethods: [lse, quant, random]\n";

}  // namespace

TEST_CASE("thermal noise power") {
    CHECK(oracle::rel_err(noise_power(1.0), 3.981071705534972e-21) < 1e-12);
    CHECK(oracle::rel_err(noise_power(1e8), 3.981071705534972e-13) < 1e-12);
    CHECK(watts_to_dbm(noise_power(2e8)) - watts_to_dbm(noise_power(1e8)) ==
          doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(noise_power(0.0), DomainError);
    CHECK_THROWS_AS(noise_power(-5.0), DomainError);
    CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
}

TEST_CASE("minimal config takes the documented defaults") {
    const auto plan = parse_config("M: 12\nN: 24\nK: 6\n");
    CHECK(plan.system.M == 12);
    CHECK(plan.system.N == 24);
    CHECK(plan.system.K == 6);
    CHECK(plan.system.p_max == 0.5);
    CHECK(plan.system.kappa == 10.0);
    CHECK(plan.system.bandwidth_hz == 1e8);
    CHECK(oracle::rel_err(plan.system.sigma2, noise_power(1e8)) < 1e-15);
    CHECK(plan.solver.quant.window == 50);
    CHECK(plan.solver.quant.bits == 3);
    CHECK(plan.grid_B == std::vector<int>{3});
    CHECK(plan.system.sar_ref.size() == 6);
    CHECK(plan.trials == 1);
}

TEST_CASE("config errors name the line and key") {
    const std::string alpha = error_of("M: 12\nN: 24\nK: 6\nalpha: 1.5\n");
    CHECK(alpha.find("cfg.yaml:4: alpha:") != std::string::npos);
    CHECK(alpha.find("(0,1]") != std::string::npos);

    CHECK(error_of("M: 12\nN: 24\nK: 6\nbogus: 1\n").find("cfg.yaml:4: bogus: unknown key") != std::string::npos);
    CHECK(error_of("M: 12\nN: 24\nK: 6\nM: 4\n").find("duplicate key") != std::string::npos);
    CHECK(error_of("M: 12\nN: 24\n").find("missing required key 'K'") != std::string::npos);
    CHECK(error_of("M: 12\nN: 24\nK: 6\nmethods: [lse, magic]\n").find("methods") != std::string::npos);
    CHECK(error_of("M: 12\nN: 24\nK: 6\nr_min: 80\n").find("r_min") != std::string::npos);
    CHECK(error_of("M: 12\nN: 24\nK: 2\nsar_ref: [1e-3, 2e-3, 3e-3]\n").find("sar_ref") != std::string::npos);
    CHECK(error_of("M: 12\nN: 24\nK: 6\nkappa: abc\n").find("kappa") != std::string::npos);
    CHECK(error_of("M: [12\n") != "");
    CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("save and parse round trip") {
    ExperimentPlan plan = parse_config(
        "M: [4, 8]\nN: 16\nK: [2, 3]\nB: [1, 3]\nalpha: 0.3333333333333333\nkappa: 2.5\n"
        "ris_position: [10.25, -3]\nbandwidth_hz: 2e7\nemf_constraint: false\nris_correlation: 0.4\n"
        "methods: [sdr, random]\nseed: 18446744073709551615\ntrials: 7\nthreads: 2\n");
    const auto again = parse_config(save_config(plan));
    CHECK(again == plan);
    CHECK(save_config(again) == save_config(plan));

    const auto per_user = parse_config("M: 4\nN: 8\nK: 2\nsar_ref: [1e-3, 2e-3]\n");
    CHECK(parse_config(save_config(per_user)) == per_user);
}

TEST_CASE("seeds differ across trials and grid points") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t g = 0; g < 10; ++g) {
        for (std::uint64_t t = 0; t < 100; ++t) seen.insert(trial_seed(5, g, t));
    }
    CHECK(seen.size() == 1000);
    CHECK(trial_seed(5, 0, 0) != trial_seed(6, 0, 0));
}

TEST_CASE("experiment emits one row per trial, method and bit width") {
    ExperimentPlan plan = parse_config("M: 3\nN: 4\nK: [2, 3]\ntrials: 3\nmethods: [lse, random]\n");
    const auto rows = run_experiment(plan);
    REQUIRE(rows.size() == 12);
    for (std::size_t i = 0; i < rows.size(); i += 2) {
        CHECK(rows[i].method == PhaseMethod::Lse);
        CHECK(rows[i + 1].method == PhaseMethod::RandomBaseline);
        // Paired comparison: both methods see one channel.
        CHECK(rows[i].channel_hash == rows[i + 1].channel_hash);
        CHECK(rows[i].seed == rows[i + 1].seed);
        CHECK(rows[i].min_sinr_linear >= rows[i + 1].min_sinr_linear * 0.0);
    }
    CHECK(rows[0].K == 2);
    CHECK(rows[11].K == 3);
    CHECK(rows[0].channel_hash != rows[2].channel_hash);
    for (const auto& r : rows) {
        CHECK(r.per_user_sinrs.size() == static_cast<std::size_t>(r.K));
        CHECK(r.min_sinr_linear > 0.0);
        CHECK(oracle::rel_err(r.min_sinr_db, 10.0 * std::log10(r.min_sinr_linear)) < 1e-12);
        CHECK(r.stage_trace_monotone);
        CHECK(r.p_cap_used == doctest::Approx(0.0029 / 63e-4));
        CHECK_FALSE(r.degenerate);
    }
}

TEST_CASE("quantized rows are expanded over B") {
    const auto rows = run_experiment(parse_config(kSmall));
    REQUIRE(rows.size() == 2 * 3 * 4);
    CHECK(rows[1].method == PhaseMethod::Quantized);
    CHECK(rows[1].bits == 1);
    CHECK(rows[2].bits == 2);
    CHECK(rows[0].bits == 0);
}

TEST_CASE("results do not depend on the thread count") {
    ExperimentPlan plan = parse_config(kSmall);
    const auto one = without_wall_time(run_experiment(plan));
    plan.threads = 3;
    const auto three = without_wall_time(run_experiment(plan));
    CHECK(one == three);
    const auto again = without_wall_time(run_experiment(plan));
    CHECK(three == again);
}

TEST_CASE("trial channel is reproducible from its seed") {
    const auto plan = parse_config(kSmall);
    const auto rows = run_experiment(plan);
    const auto config = grid_config(plan, rows[0].K, rows[0].M, rows[0].N);
    CHECK(channel_hash(trial_channel(config, rows[0].seed)) == rows[0].channel_hash);
}

TEST_CASE("CSV layout") {
    TrialRecord r;
    r.trial = 2;
    r.seed = 99;
    r.K = 2;
    r.M = 3;
    r.N = 4;
    r.method = PhaseMethod::Quantized;
    r.bits = 2;
    r.min_sinr_linear = 0.5;
    r.min_sinr_db = to_db(0.5);
    r.per_user_sinrs = {0.5, 1.25};
    r.sweeps = 4;
    r.wall_time_seconds = 0.125;
    r.p_cap_used = 0.25;
    r.channel_hash = 0xab;
    r.diagnostics = "a, b";
    std::ostringstream os;
    write_csv(os, {r});
    std::istringstream lines(os.str());
    std::string header;
    std::string row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header == csv_header());
    CHECK(std::count(header.begin(), header.end(), ',') == 15);
    CHECK(std::count(row.begin(), row.end(), ',') == 15);
    CHECK(row.rfind("2,99,2,3,4,quant,2,0.5,", 0) == 0);
    CHECK(row.find(",0.5;1.25,4,0.125,0.25,0,00000000000000ab,a; b") != std::string::npos);
}
