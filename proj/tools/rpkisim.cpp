// rpkisim command line: run, analyze, montecarlo, probe.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "rpkisim/analysis.hpp"
#include "rpkisim/config.hpp"
#include "rpkisim/dns.hpp"
#include "rpkisim/publication_point.hpp"
#include "rpkisim/simulation.hpp"

namespace {

using namespace rpkisim;

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_runtime = 2;
constexpr const char* log_dir_env = "RPKISIM_LOG_DIR";

struct RuntimeFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::optional<std::filesystem::path> default_log_path(const config::ScenarioConfig& c)
{
    const char* dir = std::getenv(log_dir_env);
    if (dir == nullptr || *dir == '\0') return std::nullopt;
    return std::filesystem::path(dir) / (c.name + "-seed" + std::to_string(c.seed) + ".jsonl");
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::string> log_path,
            std::optional<std::string> bursts_csv)
{
    auto cfg = config::load_scenario(path);
    if (seed) cfg.seed = *seed;
    std::optional<std::filesystem::path> log_file = log_path ? std::optional<std::filesystem::path>(*log_path) : default_log_path(cfg);

    sim::Simulation simulation(cfg);
    std::ofstream log_out;
    if (log_file) {
        if (log_file->has_parent_path()) std::filesystem::create_directories(log_file->parent_path());
        log_out.open(*log_file);
        if (!log_out) throw RuntimeFailure("cannot write log '" + log_file->string() + "'");
        simulation.engine().log().write_to(log_out);
    }
    const auto summary = simulation.run();
    std::cout << summary.to_json().dump(2) << '\n';
    if (bursts_csv) {
        std::ofstream out(*bursts_csv);
        if (!out) throw RuntimeFailure("cannot write '" + *bursts_csv + "'");
        out << (simulation.campaign() ? simulation.campaign()->report().bursts_csv() : std::string("burst\n"));
    }
    return exit_ok;
}

// key=value pairs for a single closed-form evaluation
int cmd_analyze_params(const std::vector<std::string>& params)
{
    std::map<std::string, std::string> kv;
    for (const auto& p : params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos) throw config::ConfigError("params", "expected key=value, got '" + p + "'");
        kv[p.substr(0, eq)] = p.substr(eq + 1);
    }
    static const std::vector<std::string> known{"t_attack", "t_sleep", "n_retries", "n", "p", "r_limit", "window"};
    for (const auto& [k, v] : kv) {
        if (std::find(known.begin(), known.end(), k) == known.end()) throw config::ConfigError("params." + k, "unknown parameter");
    }
    auto number = [&](const std::string& key) {
        try {
            std::size_t used = 0;
            const double v = std::stod(kv.at(key), &used);
            if (used != kv.at(key).size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw config::ConfigError("params." + key, "not a number: '" + kv.at(key) + "'");
        }
    };
    auto duration = [&](const std::string& key) {
        try {
            return parse_duration(kv.at(key));
        } catch (const std::exception& e) {
            throw config::ConfigError("params." + key, e.what());
        }
    };

    const double p = kv.count("p") ? number("p") : 0.5;
    if (!(p > 0 && p < 1)) throw config::ConfigError("params.p", "must lie strictly between 0 and 1");
    std::uint64_t n = 0;
    if (kv.count("n")) {
        const double v = number("n");
        if (v < 1 || v != std::floor(v)) throw config::ConfigError("params.n", "must be a positive integer");
        n = static_cast<std::uint64_t>(v);
    } else {
        for (const char* k : {"t_attack", "t_sleep", "n_retries"}) {
            if (!kv.count(k)) throw config::ConfigError(std::string("params.") + k, "required unless n is given");
        }
        const double retries = number("n_retries");
        if (retries < 1 || retries != std::floor(retries)) throw config::ConfigError("params.n_retries", "must be a positive integer");
        const Duration t_attack = duration("t_attack");
        const Duration t_sleep = duration("t_sleep");
        if (t_attack <= Duration{}) throw config::ConfigError("params.t_attack", "must be positive");
        if (t_sleep <= Duration{}) throw config::ConfigError("params.t_sleep", "must be positive");
        n = analysis::n_attempts(t_attack, t_sleep, static_cast<unsigned>(retries));
        if (n == 0) throw config::ConfigError("params.t_attack", "yields zero attempts");
    }
    const double o = analysis::overwhelming_factor(n, p);
    std::cout << "n_attempts,p,o,o_rounded";
    const bool with_rate = kv.count("r_limit") > 0;
    if (with_rate) std::cout << ",r_limit,r_attacker,total_per_update,required_rate";
    std::cout << '\n' << n << ',' << p << ',' << std::setprecision(10) << o << ',' << std::llround(o);
    if (with_rate) {
        const double limit = number("r_limit");
        if (limit <= 0) throw config::ConfigError("params.r_limit", "must be positive");
        const Duration window = kv.count("window") ? duration("window") : Duration::seconds(30);
        const auto v = analysis::packet_volume(o, limit, window);
        std::cout << ',' << limit << ',' << v.r_attacker << ',' << v.total_per_update << ','
                  << analysis::required_rate(limit, n, p);
    }
    std::cout << '\n';
    return exit_ok;
}

int cmd_montecarlo(const std::string& path, std::uint64_t trials, unsigned parallel, std::uint64_t seed_base,
                   std::optional<double> rate)
{
    auto cfg = config::load_scenario(path);
    if (!cfg.attacker) throw config::ConfigError("attacker", "montecarlo needs an attacker section");
    if (trials == 0) throw config::ConfigError("trials", "must be at least 1");
    if (rate) {
        if (*rate < 0) throw config::ConfigError("rate", "must be non-negative");
        cfg.attacker->rate = *rate;
    }
    const double r_attacker = sim::Simulation::planned_rate(cfg);

    std::vector<char> success(trials, 0);
    std::vector<std::string> errors(trials);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&]() {
        for (std::uint64_t i = next++; i < trials; i = next++) {
            auto trial = cfg;
            trial.seed = seed_base + i;
            try {
                sim::Simulation s(trial);
                success[i] = s.run().downgrade_achieved ? 1 : 0;
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(parallel, static_cast<unsigned>(trials)));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (!e.empty()) throw RuntimeFailure("trial failed: " + e);
    }

    const auto wins = static_cast<std::uint64_t>(std::count(success.begin(), success.end(), 1));
    const auto ci = analysis::wilson_interval(wins, trials);
    std::cout << "scenario,trials,successes,r_attacker,success_rate,wilson_low,wilson_high\n"
              << cfg.name << ',' << trials << ',' << wins << ',' << r_attacker << ',' << static_cast<double>(wins) / trials
              << ',' << ci.low << ',' << ci.high << '\n';
    return exit_ok;
}

int cmd_probe(const std::string& path, const std::string& target, const std::string& kind, Duration duration, std::uint64_t seed)
{
    const auto cfg = config::load_scenario(path);
    const auto rates = dns::default_probe_rates();
    std::ostringstream out;
    if (kind == "dns") {
        auto it = std::find_if(cfg.nameservers.begin(), cfg.nameservers.end(), [&](const auto& n) { return n.name == target; });
        if (it == cfg.nameservers.end()) throw config::ConfigError("target", "no nameserver named '" + target + "'");
        dns::NameserverConfig nc{it->records, it->limits};
        const auto r = dns::probe_rate_limit(nc, rates, duration, seed);
        out << "rate,responses_per_s,answers_per_s\n";
        for (const auto& row : r.rows) out << row.rate << ',' << row.responses_per_s << ',' << row.answers_per_s << '\n';
        out << "# slip_limit," << (r.slip_limit ? std::to_string(*r.slip_limit) : "none") << '\n'
            << "# drop_limit," << (r.drop_limit ? std::to_string(*r.drop_limit) : "none") << '\n';
    } else if (kind == "syn") {
        auto it = std::find_if(cfg.publication_points.begin(), cfg.publication_points.end(), [&](const auto& p) { return p.name == target; });
        if (it == cfg.publication_points.end()) throw config::ConfigError("target", "no publication point named '" + target + "'");
        pp::PpConfig pc;
        pc.domains = it->domains;
        pc.syn_rate_limit = it->syn_rate_limit;
        pc.syn_bucket_window = it->syn_bucket_window;
        const auto r = pp::probe_syn_limit(pc, rates, duration, seed);
        out << "rate,synacks_per_s\n";
        for (const auto& row : r.rows) out << row.rate << ',' << row.synacks_per_s << '\n';
        out << "# syn_limit," << (r.limit ? std::to_string(*r.limit) : "none") << '\n';
    } else {
        throw config::ConfigError("kind", "expected dns or syn, got '" + kind + "'");
    }
    std::cout << out.str();
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discrete-event simulator for RPKI downgrade attacks"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run one scenario and print its summary");
    std::string run_path;
    std::optional<std::uint64_t> run_seed;
    std::optional<std::string> run_log;
    std::optional<std::string> run_bursts;
    run->add_option("scenario", run_path, "Scenario YAML")->required();
    run->add_option("--seed", run_seed, "Override the scenario seed");
    run->add_option("--log", run_log, std::string("JSONL event log path (default: $") + log_dir_env + "/<name>-seed<seed>.jsonl)");
    run->add_option("--bursts-csv", run_bursts, "Write per-burst statistics");

    auto* analyze = app.add_subcommand("analyze", "Closed-form cost model");
    bool tables = false;
    std::vector<std::string> params;
    analyze->add_flag("--tables", tables, "Print both reproduced tables as CSV");
    analyze->add_option("--params", params, "key=value: t_attack t_sleep n_retries | n, p, r_limit, window");

    auto* mc = app.add_subcommand("montecarlo", "Repeat a scenario over seeds and estimate the success rate");
    std::string mc_path;
    std::uint64_t trials = 100;
    unsigned parallel = std::max(1u, std::thread::hardware_concurrency());
    std::uint64_t seed_base = 1;
    std::optional<double> mc_rate;
    mc->add_option("scenario", mc_path, "Scenario YAML")->required();
    mc->add_option("--trials", trials, "Number of seeded runs");
    mc->add_option("--parallel", parallel, "Worker threads (default: all cores)");
    mc->add_option("--seed-base", seed_base, "Seed of the first trial");
    mc->add_option("--rate", mc_rate, "Override the attacker rate (packets/s)");

    auto* probe = app.add_subcommand("probe", "Measure a server's rate limit by probing it");
    std::string probe_path;
    std::string probe_target;
    std::string probe_kind = "dns";
    std::string probe_duration = "";
    std::uint64_t probe_seed = 1;
    probe->add_option("scenario", probe_path, "Scenario YAML")->required();
    probe->add_option("--target", probe_target, "Nameserver or publication point name")->required();
    probe->add_option("--kind", probe_kind, "dns or syn");
    probe->add_option("--duration", probe_duration, "Probe length per rate (default 10s dns, 6s syn)");
    probe->add_option("--seed", probe_seed, "Seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    try {
        if (run->parsed()) return cmd_run(run_path, run_seed, run_log, run_bursts);
        if (analyze->parsed()) {
            if (tables && !params.empty()) throw config::ConfigError("analyze", "use either --tables or --params");
            if (!params.empty()) return cmd_analyze_params(params);
            std::cout << analysis::table4_csv() << '\n' << analysis::table5_csv();
            return exit_ok;
        }
        if (mc->parsed()) return cmd_montecarlo(mc_path, trials, parallel, seed_base, mc_rate);
        if (probe->parsed()) {
            Duration d = probe_kind == "syn" ? Duration::seconds(6) : Duration::seconds(10);
            if (!probe_duration.empty()) {
                try {
                    d = parse_duration(probe_duration);
                } catch (const std::exception& e) {
                    throw config::ConfigError("duration", e.what());
                }
            }
            return cmd_probe(probe_path, probe_target, probe_kind, d, probe_seed);
        }
    } catch (const config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_ok;
}
