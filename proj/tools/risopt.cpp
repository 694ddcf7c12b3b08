// SPDX-License-Identifier: Apache-2.0
// Batch driver: run a Monte Carlo plan, lint a config, or dump one channel.

#include "risopt/channel_gen.hpp"
#include "risopt/errors.hpp"
#include "risopt/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct RunArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> threads;
    bool quiet = false;
};

struct DumpArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int trial = 0;
};

int run(const RunArgs& args) {
    risopt::ExperimentPlan plan = risopt::load_config(args.config);
    if (args.seed) plan.seed = *args.seed;
    if (args.trials) plan.trials = *args.trials;
    if (args.threads) plan.threads = *args.threads;
    plan.validate();

    std::ofstream file;
    if (!args.out.empty()) {
        file.open(args.out);
        if (!file) throw std::runtime_error(args.out + ": cannot open for writing");
    }
    std::ostream& os = args.out.empty() ? std::cout : file;

    auto progress = [&](int done, int total) {
        if (!args.quiet) std::cerr << "\rtrials " << done << '/' << total << std::flush;
    };
    const auto rows = risopt::run_experiment(plan, progress);
    if (!args.quiet) std::cerr << '\n';
    risopt::write_csv(os, rows);
    os.flush();
    if (!os) throw std::runtime_error((args.out.empty() ? "<stdout>" : args.out) + ": write failed");
    return kOk;
}

int validate(const std::string& path) {
    const risopt::ExperimentPlan plan = risopt::load_config(path);
    std::cout << path << ": ok\n" << risopt::save_config(plan);
    return kOk;
}

int dump_channel(const DumpArgs& args) {
    risopt::ExperimentPlan plan = risopt::load_config(args.config);
    if (args.seed) plan.seed = *args.seed;
    if (args.trial < 0) throw risopt::ConfigError("--trial must be >= 0");
    const risopt::SystemConfig config =
        risopt::grid_config(plan, plan.grid_K.front(), plan.grid_M.front(), plan.grid_N.front());
    const auto seed = risopt::trial_seed(plan.seed, 0, static_cast<std::uint64_t>(args.trial));
    const risopt::ChannelRealization chan = risopt::trial_channel(config, seed);
    if (args.out.empty()) {
        risopt::write_channel(std::cout, chan);
        return kOk;
    }
    std::ofstream file(args.out);
    if (!file) throw std::runtime_error(args.out + ": cannot open for writing");
    risopt::write_channel(file, chan);
    if (!file) throw std::runtime_error(args.out + ": write failed");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIS-aided uplink max-min SINR optimizer"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Run every trial of a plan and write CSV");
    run_cmd->add_option("config", run_args.config, "Config file")->required();
    run_cmd->add_option("--out,-o", run_args.out, "CSV output path (default stdout)");
    run_cmd->add_option("--seed", run_args.seed, "Override the base seed");
    run_cmd->add_option("--trials", run_args.trials, "Override the trial count");
    run_cmd->add_option("--threads", run_args.threads, "Worker threads");
    run_cmd->add_flag("--quiet,-q", run_args.quiet, "No progress on stderr");

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "Check a config and print it normalized");
    validate_cmd->add_option("config", validate_path, "Config file")->required();

    DumpArgs dump_args;
    auto* dump_cmd = app.add_subcommand("dump-channel", "Write one channel realization as text");
    dump_cmd->add_option("config", dump_args.config, "Config file")->required();
    dump_cmd->add_option("--out,-o", dump_args.out, "Output path (default stdout)");
    dump_cmd->add_option("--seed", dump_args.seed, "Override the base seed");
    dump_cmd->add_option("--trial", dump_args.trial, "Trial index at the first grid point");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run_cmd) return run(run_args);
        if (*validate_cmd) return validate(validate_path);
        if (*dump_cmd) return dump_channel(dump_args);
    } catch (const risopt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}
