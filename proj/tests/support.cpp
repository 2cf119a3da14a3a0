#include "support.hpp"

#include <algorithm>

namespace rpkisim::testing {

std::string scenario_path(const std::string& name) { return std::string(RPKISIM_SCENARIO_DIR) + "/" + name + ".yaml"; }

config::ScenarioConfig load(const std::string& name) { return config::load_scenario(scenario_path(name)); }

RefreshTiming refresh_timing(const std::vector<rp::RefreshReport>& history)
{
    RefreshTiming t;
    t.refreshes = history.size();
    if (history.empty()) return t;
    if (history.size() > 1) {
        t.mean_inter_start_s = (history.back().started - history.front().started).to_seconds() / static_cast<double>(history.size() - 1);
    }
    t.shortest_s = t.longest_s = history.front().duration().to_seconds();
    for (const auto& r : history) {
        t.shortest_s = std::min(t.shortest_s, r.duration().to_seconds());
        t.longest_s = std::max(t.longest_s, r.duration().to_seconds());
    }
    return t;
}

config::ScenarioConfig stall_config(rp::Implementation impl, std::size_t depth, Duration horizon)
{
    auto c = load("table4-scenarioS");
    c.name = "stall-" + rp::to_string(impl);
    c.duration = horizon;
    for (auto& ns : c.nameservers) {
        if (ns.name == "ns-victim") ns.limits = RateLimits{};
    }
    c.relying_parties.front().implementation = impl;
    auto& a = *c.attacker;
    a.rate = 1;
    a.max_duration = horizon;
    a.stalloris = attack::StallorisPlan{depth, std::nullopt, std::nullopt, "stall.attacker.example"};
    return c;
}

StallOutcome measure_stall(const config::ScenarioConfig& c)
{
    sim::Simulation s(c);
    s.run();
    StallOutcome out;
    for (const auto& r : s.relying_party(c.relying_parties.front().name).history()) {
        out.longest_refresh = std::max(out.longest_refresh, r.duration());
        out.deepest = std::max(out.deepest, r.max_depth_reached);
        out.guard_tripped = out.guard_tripped || r.unbounded_guard_tripped;
    }
    return out;
}

bool ExactBucket::take(double t)
{
    tokens_ = std::min(depth_, tokens_ + (t - last_) * rate_);
    last_ = t;
    if (tokens_ < 1.0) return false;
    tokens_ -= 1.0;
    return true;
}

} // namespace rpkisim::testing
