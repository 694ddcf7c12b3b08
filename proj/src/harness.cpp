// SPDX-License-Identifier: Apache-2.0
#include "risopt/harness.hpp"

#include "risopt/channel_gen.hpp"
#include "risopt/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace risopt {

double noise_power(double bandwidth_hz) {
    if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) {
        throw DomainError("noise_power: bandwidth must be > 0");
    }
    return dbm_to_watts(-174.0 + 10.0 * std::log10(bandwidth_hz));
}

void ExperimentPlan::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    require(trials >= 1, "trials must be >= 1");
    require(threads >= 1, "threads must be >= 1");
    require(!methods.empty(), "methods must not be empty");
    require(!grid_K.empty() && !grid_M.empty() && !grid_N.empty() && !grid_B.empty(),
            "sweep grids must not be empty");
    for (int b : grid_B) require(b >= 1 && b <= 16, "B entries must lie in [1,16]");
    require(solver.quant.window >= 1, "L must be >= 1");
    require(solver.max_sweeps >= 1, "alt_max_sweeps must be >= 1");
    require(solver.tolerance >= 0.0, "alt_tolerance must be >= 0");
    for (int K : grid_K) {
        for (int M : grid_M) {
            for (int N : grid_N) grid_config(*this, K, M, N).validate();
        }
    }
}

// ---------------------------------------------------------------------------
// Config file

namespace {

struct KeyError {
    std::string key;
    std::string message;
};

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
    if (!node.IsScalar()) throw KeyError{key, "expected a scalar value"};
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw KeyError{key, "cannot parse '" + node.Scalar() + "'"};
    }
}

template <typename T>
std::vector<T> list(const YAML::Node& node, const std::string& key) {
    std::vector<T> out;
    if (node.IsScalar()) {
        out.push_back(scalar<T>(node, key));
    } else if (node.IsSequence()) {
        for (const auto& item : node) out.push_back(scalar<T>(item, key));
    } else {
        throw KeyError{key, "expected a scalar or an array"};
    }
    if (out.empty()) throw KeyError{key, "array must not be empty"};
    return out;
}

double positive(double v, const std::string& key) {
    if (!(v > 0.0) || !std::isfinite(v)) throw KeyError{key, "must be > 0"};
    return v;
}

int at_least(int v, int lo, const std::string& key) {
    if (v < lo) throw KeyError{key, "must be >= " + std::to_string(lo)};
    return v;
}

using Setter = std::function<void(const YAML::Node&, ExperimentPlan&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"M", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.grid_M = list<int>(n, k);
             for (int v : p.grid_M) at_least(v, 1, k);
         }},
        {"N", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.grid_N = list<int>(n, k);
             for (int v : p.grid_N) at_least(v, 1, k);
         }},
        {"K", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.grid_K = list<int>(n, k);
             for (int v : p.grid_K) at_least(v, 1, k);
         }},
        {"B", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.grid_B = list<int>(n, k);
             for (int v : p.grid_B) {
                 if (v < 1 || v > 16) throw KeyError{k, "must lie in [1,16]"};
             }
         }},
        {"L", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.solver.quant.window = at_least(scalar<int>(n, k), 1, k);
         }},
        {"alpha", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             const double v = scalar<double>(n, k);
             if (!(v > 0.0 && v <= 1.0)) throw KeyError{k, "must lie in (0,1]"};
             p.system.alpha = v;
         }},
        {"kappa", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             const double v = scalar<double>(n, k);
             if (!(v >= 0.0)) throw KeyError{k, "must be >= 0"};
             p.system.kappa = v;
         }},
        {"p_max_w", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.system.p_max = positive(scalar<double>(n, k), k);
         }},
        {"bandwidth_hz", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.system.bandwidth_hz = positive(scalar<double>(n, k), k);
             p.system.sigma2 = noise_power(p.system.bandwidth_hz);
         }},
        {"emf_constraint", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.system.emf_constraint = scalar<bool>(n, k);
         }},
        {"sar_ref", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.system.sar_ref = list<double>(n, k);
             for (double v : p.system.sar_ref) positive(v, k);
         }},
        {"emf_max", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.system.emf_max = list<double>(n, k);
             for (double v : p.system.emf_max) positive(v, k);
         }},
        {"gain_bs_dbi", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.system.gains.bs_dbi = scalar<double>(n, k);
         }},
        {"gain_ris_dbi", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.system.gains.ris_dbi = scalar<double>(n, k);
         }},
        {"gain_user_dbi", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.system.gains.user_dbi = scalar<double>(n, k);
         }},
        {"ris_position", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             const auto v = list<double>(n, k);
             if (v.size() != 2) throw KeyError{k, "expected [x, y]"};
             p.system.ris_position = {v[0], v[1]};
         }},
        {"r_min", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             const double v = scalar<double>(n, k);
             if (!(v >= 0.0)) throw KeyError{k, "must be >= 0"};
             p.system.r_min = v;
         }},
        {"r_max", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.system.r_max = positive(scalar<double>(n, k), k);
         }},
        {"d_bs_over_lambda", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.system.d_bs_over_lambda = positive(scalar<double>(n, k), k);
         }},
        {"d_ris_over_lambda", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.system.d_ris_over_lambda = positive(scalar<double>(n, k), k);
         }},
        {"ris_correlation", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             const double v = scalar<double>(n, k);
             if (!(v >= 0.0 && v < 1.0)) throw KeyError{k, "must lie in [0,1)"};
             p.system.ris_correlation = v;
         }},
        {"quant_epsilon", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.solver.quant.epsilon = positive(scalar<double>(n, k), k);
         }},
        {"alt_tolerance", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             const double v = scalar<double>(n, k);
             if (!(v >= 0.0)) throw KeyError{k, "must be >= 0"};
             p.solver.tolerance = v;
         }},
        {"alt_max_sweeps", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.solver.max_sweeps = at_least(scalar<int>(n, k), 1, k);
         }},
        {"sdr_max_outer", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.solver.sdr.max_outer = at_least(scalar<int>(n, k), 1, k);
         }},
        {"sdr_inner_iterations", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.solver.sdr.inner_iterations = at_least(scalar<int>(n, k), 1, k);
         }},
        {"sdr_randomizations", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.solver.sdr.randomizations = at_least(scalar<int>(n, k), 0, k);
         }},
        {"lse_max_iterations", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.solver.lse.max_iterations = at_least(scalar<int>(n, k), 1, k);
         }},
        {"trials", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.trials = at_least(scalar<int>(n, k), 1, k);
         }},
        {"seed", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.seed = scalar<std::uint64_t>(n, k);
         }},
        {"threads", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.threads = at_least(scalar<int>(n, k), 1, k);
         }},
        {"methods", [](const YAML::Node& n, ExperimentPlan& p, const std::string& k) {
             p.methods.clear();
             for (const auto& name : list<std::string>(n, k)) {
                 const auto m = parse_method(name);
                 if (!m) throw KeyError{k, "unknown method '" + name + "' (sdr, lse, quant, random)"};
                 p.methods.push_back(*m);
             }
         }},
    };
    return table;
}

const std::set<std::string> kRequired = {"M", "N", "K"};

std::string located(const std::string& source, int line, const std::string& key,
                    const std::string& message) {
    std::ostringstream os;
    os << source << ':' << line << ": " << key << ": " << message;
    return os.str();
}

}  // namespace

ExperimentPlan parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    ExperimentPlan plan;
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError(source + ": expected 'key: value' lines");

    std::map<std::string, int> lines;
    for (const auto& entry : root) {
        const std::string key = entry.first.as<std::string>();
        const int line = entry.first.Mark().line + 1;
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError(located(source, line, key, "unknown key"));
        if (lines.contains(key)) throw ConfigError(located(source, line, key, "duplicate key"));
        lines[key] = line;
        try {
            it->second(entry.second, plan, key);
        } catch (const KeyError& e) {
            throw ConfigError(located(source, line, e.key, e.message));
        }
    }
    for (const auto& key : kRequired) {
        if (!lines.contains(key)) throw ConfigError(source + ": missing required key '" + key + "'");
    }

    plan.system.M = plan.grid_M.front();
    plan.system.N = plan.grid_N.front();
    plan.system.K = plan.grid_K.front();
    plan.solver.quant.bits = plan.grid_B.front();
    plan.system.sigma2 = noise_power(plan.system.bandwidth_hz);

    // Cross-key checks, reported against the key most likely at fault.
    auto line_of = [&](const std::string& key) { return lines.contains(key) ? lines[key] : 0; };
    if (!(plan.system.r_min < plan.system.r_max)) {
        throw ConfigError(located(source, line_of("r_min"), "r_min", "must be < r_max"));
    }
    for (const char* key : {"sar_ref", "emf_max"}) {
        const auto& v = std::string(key) == "sar_ref" ? plan.system.sar_ref : plan.system.emf_max;
        const bool uniform = std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
        if (uniform) continue;
        for (int K : plan.grid_K) {
            if (static_cast<int>(v.size()) != K) {
                throw ConfigError(located(source, line_of(key), key,
                                          "per-user values need exactly K=" + std::to_string(K) + " entries"));
            }
        }
    }
    plan.system = plan.system.with_users(plan.system.K);
    try {
        plan.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return plan;
}

ExperimentPlan load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

namespace {

template <typename T>
std::string format_list(const std::vector<T>& v) {
    std::ostringstream os;
    os.precision(17);
    if (v.size() == 1) {
        os << v.front();
        return os.str();
    }
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << ']';
    return os.str();
}

std::vector<double> compact(const std::vector<double>& v) {
    const bool uniform = std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
    return uniform && !v.empty() ? std::vector<double>{v.front()} : v;
}

}  // namespace

std::string save_config(const ExperimentPlan& plan) {
    std::ostringstream os;
    os.precision(17);
    const SystemConfig& s = plan.system;
    os << "M: " << format_list(plan.grid_M) << '\n';
    os << "N: " << format_list(plan.grid_N) << '\n';
    os << "K: " << format_list(plan.grid_K) << '\n';
    os << "B: " << format_list(plan.grid_B) << '\n';
    os << "L: " << plan.solver.quant.window << '\n';
    os << "alpha: " << s.alpha << '\n';
    os << "kappa: " << s.kappa << '\n';
    os << "p_max_w: " << s.p_max << '\n';
    os << "bandwidth_hz: " << s.bandwidth_hz << '\n';
    os << "emf_constraint: " << (s.emf_constraint ? "true" : "false") << '\n';
    os << "sar_ref: " << format_list(compact(s.sar_ref)) << '\n';
    os << "emf_max: " << format_list(compact(s.emf_max)) << '\n';
    os << "gain_bs_dbi: " << s.gains.bs_dbi << '\n';
    os << "gain_ris_dbi: " << s.gains.ris_dbi << '\n';
    os << "gain_user_dbi: " << s.gains.user_dbi << '\n';
    os << "ris_position: [" << s.ris_position.x << ", " << s.ris_position.y << "]\n";
    os << "r_min: " << s.r_min << '\n';
    os << "r_max: " << s.r_max << '\n';
    os << "d_bs_over_lambda: " << s.d_bs_over_lambda << '\n';
    os << "d_ris_over_lambda: " << s.d_ris_over_lambda << '\n';
    os << "ris_correlation: " << s.ris_correlation << '\n';
    os << "quant_epsilon: " << plan.solver.quant.epsilon << '\n';
    os << "alt_tolerance: " << plan.solver.tolerance << '\n';
    os << "alt_max_sweeps: " << plan.solver.max_sweeps << '\n';
    os << "sdr_max_outer: " << plan.solver.sdr.max_outer << '\n';
    os << "sdr_inner_iterations: " << plan.solver.sdr.inner_iterations << '\n';
    os << "sdr_randomizations: " << plan.solver.sdr.randomizations << '\n';
    os << "lse_max_iterations: " << plan.solver.lse.max_iterations << '\n';
    os << "trials: " << plan.trials << '\n';
    os << "seed: " << plan.seed << '\n';
    os << "threads: " << plan.threads << '\n';
    os << "methods: [";
    for (std::size_t i = 0; i < plan.methods.size(); ++i) {
        os << (i ? ", " : "") << method_name(plan.methods[i]);
    }
    os << "]\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Trials

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t grid_index, std::uint64_t trial) {
    return mix_seed(base ^ mix_seed((grid_index << 32) ^ trial));
}

SystemConfig grid_config(const ExperimentPlan& plan, int K, int M, int N) {
    SystemConfig c = plan.system.with_users(K);
    c.M = M;
    c.N = N;
    return c;
}

ChannelRealization trial_channel(const SystemConfig& config, std::uint64_t seed) {
    Rng rng(seed);
    return sample_channel(config, rng);
}

namespace {

// Stream tags for the generators derived from one trial seed.
constexpr std::uint64_t kInitStream = 0x1000;
constexpr std::uint64_t kGridInitStream = 0x2000;
constexpr std::uint64_t kMethodStream = 0x3000;

bool monotone(const std::vector<StageMark>& trace) {
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i].minimum < trace[i - 1].minimum) return false;
    }
    return true;
}

std::string summarize(const std::vector<std::string>& warnings) {
    std::map<std::string, int> counts;
    for (const auto& w : warnings) ++counts[w];
    std::string out;
    for (const auto& [w, n] : counts) {
        if (!out.empty()) out += " | ";
        out += w;
        if (n > 1) out += " x" + std::to_string(n);
    }
    return out;
}

}  // namespace

std::vector<TrialRecord> run_trial(const ExperimentPlan& plan, const SystemConfig& config,
                                   int trial, std::uint64_t seed) {
    std::vector<TrialRecord> rows;
    const ChannelRealization chan = trial_channel(config, seed);
    const std::uint64_t hash = channel_hash(chan);

    Rng init_rng(mix_seed(seed ^ kInitStream));
    const PhaseVector continuous_init = random_phase(config.N, config.alpha, init_rng);

    auto run_one = [&](PhaseMethod method, int bits, const PhaseVector& init, std::uint64_t stream) {
        TrialRecord r;
        r.trial = trial;
        r.seed = seed;
        r.K = config.K;
        r.M = config.M;
        r.N = config.N;
        r.method = method;
        r.bits = bits;
        r.channel_hash = hash;
        AlternatingParams params = plan.solver;
        if (method == PhaseMethod::Quantized) params.quant.bits = bits;
        try {
            Rng rng(mix_seed(seed ^ stream));
            const Solution sol = alternating_optimize(config, chan, method, params, rng, init);
            r.min_sinr_linear = sol.report.minimum;
            r.per_user_sinrs.assign(sol.report.per_user.data(),
                                    sol.report.per_user.data() + sol.report.per_user.size());
            r.sweeps = sol.iterations;
            r.wall_time_seconds = sol.wall_time;
            r.p_cap_used = sol.caps.minCoeff();
            r.degenerate = sol.degenerate;
            r.diagnostics = summarize(sol.warnings);
            r.stage_trace_monotone = monotone(sol.report.stage_trace);
            if (!r.stage_trace_monotone) {
                r.diagnostics += (r.diagnostics.empty() ? "" : " | ") + std::string("non-monotone stage trace");
            }
        } catch (const std::exception& e) {
            r.degenerate = true;
            r.diagnostics = std::string("error: ") + e.what();
        }
        r.min_sinr_db = to_db(r.min_sinr_linear);
        rows.push_back(std::move(r));
    };

    for (std::size_t m = 0; m < plan.methods.size(); ++m) {
        const PhaseMethod method = plan.methods[m];
        if (method == PhaseMethod::Quantized) {
            for (int bits : plan.grid_B) {
                Rng grid_rng(mix_seed(seed ^ (kGridInitStream + static_cast<std::uint64_t>(bits))));
                const PhaseVector init = random_grid_phase(config.N, bits, config.alpha, grid_rng);
                run_one(method, bits, init, kMethodStream + 64 * m + static_cast<std::uint64_t>(bits));
            }
        } else {
            run_one(method, 0, continuous_init, kMethodStream + 64 * m);
        }
    }
    return rows;
}

std::vector<TrialRecord> run_experiment(const ExperimentPlan& plan,
                                        const std::function<void(int, int)>& progress) {
    plan.validate();
    struct Job {
        SystemConfig config;
        int trial;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    std::uint64_t grid_index = 0;
    for (int K : plan.grid_K) {
        for (int M : plan.grid_M) {
            for (int N : plan.grid_N) {
                const SystemConfig config = grid_config(plan, K, M, N);
                for (int t = 0; t < plan.trials; ++t) {
                    jobs.push_back({config, t, trial_seed(plan.seed, grid_index, static_cast<std::uint64_t>(t))});
                }
                ++grid_index;
            }
        }
    }

    std::vector<std::vector<TrialRecord>> results(jobs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<int> done{0};
    std::mutex progress_mutex;
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            results[j] = run_trial(plan, jobs[j].config, jobs[j].trial, jobs[j].seed);
            const int finished = ++done;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(finished, static_cast<int>(jobs.size()));
            }
        }
    };
    const int workers = std::max(1, std::min<int>(plan.threads, static_cast<int>(jobs.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    std::vector<TrialRecord> rows;
    for (auto& chunk : results) {
        for (auto& r : chunk) rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// CSV

std::string csv_header() {
    return "trial,seed,K,M,N,method,bits,min_sinr_linear,min_sinr_db,per_user_sinrs,sweeps,"
           "wall_time_seconds,p_cap_used,degenerate,channel_hash,diagnostics";
}

std::string csv_row(const TrialRecord& r) {
    std::ostringstream os;
    os.precision(17);
    os << r.trial << ',' << r.seed << ',' << r.K << ',' << r.M << ',' << r.N << ','
       << method_name(r.method) << ',' << r.bits << ',' << r.min_sinr_linear << ',' << r.min_sinr_db
       << ',';
    for (std::size_t i = 0; i < r.per_user_sinrs.size(); ++i) {
        os << (i ? ";" : "") << r.per_user_sinrs[i];
    }
    std::string diag = r.diagnostics;
    std::replace(diag.begin(), diag.end(), ',', ';');
    std::replace(diag.begin(), diag.end(), '\n', ' ');
    os << ',' << r.sweeps << ',' << r.wall_time_seconds << ',' << r.p_cap_used << ','
       << (r.degenerate ? 1 : 0) << ',' << std::hex << std::setw(16) << std::setfill('0')
       << r.channel_hash << std::dec << ',' << diag;
    return os.str();
}

void write_csv(std::ostream& os, const std::vector<TrialRecord>& rows) {
    os << csv_header() << '\n';
    for (const auto& r : rows) os << csv_row(r) << '\n';
}

}  // namespace risopt
