// Prints one PASS/FAIL line per acceptance criterion; exit status is the number of failures.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rpkisim/analysis.hpp"
#include "rpkisim/dns.hpp"
#include "rpkisim/publication_point.hpp"
#include "rpkisim/simulation.hpp"
#include "rpkisim/victim_id.hpp"
#include "support.hpp"

using namespace rpkisim;

namespace {

struct Finding {
    bool pass = false;
    std::string detail;
};

bool near(double got, double want, double tolerance) { return std::abs(got - want) <= tolerance; }
bool near_rel(double got, double want, double fraction) { return std::abs(got - want) <= fraction * std::abs(want); }

std::string fmt(double v, int digits = 1)
{
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

Finding attempts_table()
{
    const std::uint64_t n[] = {24, 864, 23040, 55};
    const double o[] = {35, 1247, 33240, 80};
    const auto rows = analysis::table4();
    bool ok = rows.size() == 4;
    std::string got;
    for (std::size_t i = 0; ok && i < rows.size(); ++i) {
        ok = ok && rows[i].n_attempts == n[i] && near(std::round(rows[i].o), o[i], 1);
        got += (i ? " " : "") + std::to_string(rows[i].n_attempts) + "/" + std::to_string(std::llround(rows[i].o));
    }
    return {ok, "n/o " + got};
}

Finding volume_table()
{
    const double r_attacker[] = {105, 2100, 45080, 3741, 74820, 1606136, 99720, 1994400, 42813120, 240, 4800, 103040};
    const double total[] = {3150, 63000, 1352400, 112230, 2244600, 48184080, 2991600, 59832000, 1284393600, 7200, 103040, 3091200};
    const auto rows = analysis::table5();
    if (rows.size() != 12) return {false, "expected 12 rows"};
    bool ok = true;
    std::string odd;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        ok = ok && near(static_cast<double>(r.computed.r_attacker), r_attacker[i], 1);
        const bool inconsistent_row = r.scenario == "S" && r.r_limit == 60;
        if (inconsistent_row) {
            ok = ok && r.computed.total_per_update == 144000 && r.flag == "reference-inconsistent";
            odd = "S/60 total " + std::to_string(r.computed.total_per_update) + " flagged " + r.flag;
        } else {
            ok = ok && near(static_cast<double>(r.computed.total_per_update), total[i], 1) && r.flag.empty();
        }
    }
    return {ok, "12 rates within 1; " + odd};
}

Finding healthy_timing()
{
    const auto c = testing::load("healthy-baseline");
    sim::Simulation s(c);
    const auto summary = s.run();
    const auto t = testing::refresh_timing(s.relying_party(c.relying_parties.front().name).history());
    const bool ok = near(t.mean_inter_start_s, 625, 3) && t.shortest_s >= 15 && t.longest_s <= 45 &&
                    !summary.downgrade_achieved && summary.hijack_outcome == bgp::HijackOutcome::filtered;
    return {ok, std::to_string(t.refreshes) + " refreshes, mean inter-start " + fmt(t.mean_inter_start_s, 2) +
                    " s, durations " + fmt(t.shortest_s) + ".." + fmt(t.longest_s) + " s"};
}

Finding stall_bound()
{
    using rp::Implementation;
    const auto routinator = testing::measure_stall(testing::stall_config(Implementation::routinator, 32, Duration::hours(12)));
    const auto fort = testing::measure_stall(testing::stall_config(Implementation::fort, 31, Duration::hours(20)));
    const auto octo = testing::measure_stall(testing::stall_config(Implementation::octorpki, 30, Duration::hours(12)));
    const auto ripe = testing::measure_stall(
        testing::stall_config(Implementation::ripe_validator, rp::unbounded_depth_guard + 2, Duration::days(8)));
    const double r = routinator.longest_refresh.to_seconds();
    const double f = fort.longest_refresh.to_seconds();
    const double o = octo.longest_refresh.to_seconds();
    const bool ok = near_rel(r, 300.0 * 32, 0.02) && near_rel(f, 9.1 * 3600, 0.02) && near_rel(o, 60.0 * 30, 0.02) &&
                    ripe.guard_tripped;
    return {ok, "routinator " + fmt(r / 3600, 3) + " h, fort " + fmt(f / 3600, 3) + " h, octorpki " + fmt(o / 60, 2) +
                    " min, ripe guard " + (ripe.guard_tripped ? "tripped" : "not tripped")};
}

Finding monte_carlo()
{
    constexpr std::uint64_t trials = 400;
    auto c = testing::load("table4-scenario2");
    const double rate = sim::Simulation::planned_rate(c);
    std::vector<char> won(trials, 0);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (std::uint64_t i = next++; i < trials; i = next++) {
            auto trial = c;
            trial.seed = 1 + i;
            sim::Simulation s(trial);
            won[i] = s.run().downgrade_achieved ? 1 : 0;
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::max(1u, std::thread::hardware_concurrency()); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    const auto wins = std::count(won.begin(), won.end(), 1);
    const double share = static_cast<double>(wins) / trials;
    const auto ci = analysis::wilson_interval(static_cast<std::uint64_t>(wins), trials);
    return {near(share, 0.5, 0.10) && near(rate, 1247.0 * 60, 0.5),
            std::to_string(wins) + "/" + std::to_string(trials) + " = " + fmt(100 * share) + "% at " + fmt(rate, 0) +
                " pps (95% CI " + fmt(100 * ci.low) + ".." + fmt(100 * ci.high) + ")"};
}

Finding end_to_end()
{
    auto c = testing::load("table4-scenario2");
    const double period = c.relying_parties.front().profile().t_sleep.to_seconds() + 25;
    // the attack succeeds half the time; take the first seed where it does
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        c.seed = seed;
        sim::Simulation lax_run(c);
        const auto lax = lax_run.run();
        if (!lax.downgrade_achieved) continue;
        auto strict_cfg = c;
        strict_cfg.relying_parties.front().mitigations.strict_invalid_on_missing = true;
        sim::Simulation strict_run(strict_cfg);
        const auto strict = strict_run.run();
        const double ttu = lax.time_to_unknown ? lax.time_to_unknown->to_seconds() : -1;
        const bool ok = near(ttu, 86400, period) && lax.hijack_outcome == bgp::HijackOutcome::hijacked &&
                        strict.hijack_outcome == bgp::HijackOutcome::filtered && strict.victim_reachable == false;
        return {ok, "seed " + std::to_string(seed) + ": unknown after " + fmt(ttu / 3600, 3) + " h, lax " +
                        bgp::to_string(*lax.hijack_outcome) + ", strict " +
                        (strict.hijack_outcome ? bgp::to_string(*strict.hijack_outcome) : std::string("none")) +
                        ", victim reachable under strict: " + (strict.victim_reachable.value_or(true) ? "yes" : "no")};
    }
    return {false, "no downgrade in seeds 1..20"};
}

Finding stalled_scenario()
{
    const auto c = testing::load("table4-scenarioS");
    sim::Simulation s(c);
    const auto summary = s.run();
    std::size_t fired = 0;
    if (s.campaign()) {
        for (const auto& b : s.campaign()->report().bursts) fired += b.packets > 0 ? 1 : 0;
    }
    const bool stalled = summary.longest_refresh.to_seconds() > 300.0 * 32;
    const bool ok = summary.downgrade_achieved && fired == 1 && stalled && summary.packets_injected <= 7200;
    return {ok, std::to_string(fired) + " burst, " + std::to_string(summary.packets_injected) + " packets, longest refresh " +
                    fmt(summary.longest_refresh.to_hours(), 2) + " h, downgrade " + (summary.downgrade_achieved ? "yes" : "no")};
}

Finding victim_identification()
{
    int correct = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        std::mt19937_64 pick(seed);
        const std::size_t truth = pick() % 5;
        victim_id::WorldOptions o;
        o.seed = seed;
        o.target_rp = truth;
        victim_id::SimulatedWorld world(o);
        auto state = world.initial_state();
        const auto a = attack::identify_victim_rp(state, world.target_address(), world);
        if (a.kind == attack::Attribution::Kind::match && a.rp == world.rp_addresses()[truth]) ++correct;
    }
    victim_id::WorldOptions none;
    none.seed = 51;
    victim_id::SimulatedWorld world(none);
    auto state = world.initial_state();
    const auto a = attack::identify_victim_rp(state, world.target_address(), world);
    return {correct == 50 && a.kind == attack::Attribution::Kind::no_match,
            std::to_string(correct) + "/50 identified, non-ROV target: " + attack::to_string(a.kind)};
}

Finding probes()
{
    bool ok = true;
    std::string got;
    for (double limit : {3.0, 60.0, 1288.0, 10.0, 4667.0}) {
        dns::NameserverConfig ns;
        ns.limits.drop_limit = limit;
        const auto d = dns::probe_rate_limit(ns, dns::default_probe_rates());
        pp::PpConfig pc;
        pc.domains = {"pp.example"};
        pc.syn_rate_limit = limit;
        const auto s = pp::probe_syn_limit(pc, dns::default_probe_rates());
        ok = ok && d.drop_limit && near_rel(*d.drop_limit, limit, 0.10) && s.limit && near_rel(*s.limit, limit, 0.10);
        got += " " + fmt(limit, 0) + ":" + fmt(d.drop_limit.value_or(-1)) + "/" + fmt(s.limit.value_or(-1));
    }
    return {ok, "limit:dns/syn" + got};
}

Finding determinism()
{
    auto once = [](const config::ScenarioConfig& c) {
        sim::Simulation s(c);
        s.engine().log().capture_in_memory();
        s.run();
        return s.engine().log().text();
    };
    bool ok = true;
    std::size_t bytes = 0;
    for (const char* name : {"table4-scenario2", "table4-scenarioS", "ixp"}) {
        const auto c = testing::load(name);
        const auto a = once(c);
        ok = ok && !a.empty() && a == once(c);
        bytes += a.size();
    }
    return {ok, "3 scenarios replayed, " + std::to_string(bytes) + " log bytes compared"};
}

} // namespace

int main()
{
    const std::pair<const char*, std::function<Finding()>> criteria[] = {
        {"attempts table", attempts_table},
        {"volume table", volume_table},
        {"healthy refresh timing", healthy_timing},
        {"stall bound per implementation", stall_bound},
        {"monte carlo success rate", monte_carlo},
        {"fresh-manifest downgrade end to end", end_to_end},
        {"stalled single-burst downgrade", stalled_scenario},
        {"victim relying party identification", victim_identification},
        {"rate-limit probes", probes},
        {"deterministic replay", determinism},
    };
    int failures = 0;
    int index = 0;
    for (const auto& [name, check] : criteria) {
        ++index;
        Finding v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        failures += v.pass ? 0 : 1;
        std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", index, name, v.detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}
