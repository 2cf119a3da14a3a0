#include <catch_amalgamated.hpp>

#include "rpkisim/simulation.hpp"
#include "support.hpp"

using namespace rpkisim;
using Catch::Approx;

namespace {

// Routinator sleep plus the traced mean of fetch and validation
constexpr double traced_inter_start_s = 625;
constexpr double one_day_s = 86400;

sim::RunSummary run(config::ScenarioConfig c)
{
    sim::Simulation s(std::move(c));
    return s.run();
}

} // namespace

TEST_CASE("undisturbed Routinator keeps its traced cadence")
{
    const auto c = testing::load("healthy-baseline");
    sim::Simulation s(c);
    const auto summary = s.run();
    const auto t = testing::refresh_timing(s.relying_party(c.relying_parties.front().name).history());
    CHECK(t.refreshes > 900);
    CHECK(t.mean_inter_start_s == Approx(traced_inter_start_s).margin(3));
    CHECK(t.shortest_s >= 15);
    CHECK(t.longest_s <= 45);
    CHECK_FALSE(summary.attack_started);
    CHECK_FALSE(summary.downgrade_achieved);
    REQUIRE(summary.hijack_outcome);
    CHECK(*summary.hijack_outcome == bgp::HijackOutcome::filtered);
}

TEST_CASE("fresh-manifest downgrade lands one day after the attack starts")
{
    auto c = testing::load("table4-scenario2");
    c.seed = 3;
    const auto summary = run(c);
    REQUIRE(summary.downgrade_achieved);
    REQUIRE(summary.time_to_unknown);
    const double period = c.relying_parties.front().profile().t_sleep.to_seconds() + 25;
    CHECK(summary.time_to_unknown->to_seconds() == Approx(one_day_s).margin(period));
    REQUIRE(summary.hijack_outcome);
    CHECK(*summary.hijack_outcome == bgp::HijackOutcome::hijacked);
}

TEST_CASE("every successful seed respects the manifest lifetime")
{
    auto c = testing::load("table4-scenario2");
    const double period = c.relying_parties.front().profile().t_sleep.to_seconds() + 25;
    int successes = 0;
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        c.seed = seed;
        const auto summary = run(c);
        if (!summary.downgrade_achieved) {
            CHECK(summary.hijack_outcome == bgp::HijackOutcome::filtered);
            continue;
        }
        ++successes;
        INFO("seed " << seed);
        CHECK(summary.time_to_unknown->to_seconds() == Approx(one_day_s).margin(period));
        CHECK(summary.hijack_outcome == bgp::HijackOutcome::hijacked);
    }
    CHECK(successes > 0);
    CHECK(successes < 12);
}

TEST_CASE("strict validation turns a missing publication point into a filter")
{
    auto c = testing::load("table4-scenario2");
    c.seed = 3;
    const auto lax = run(c);
    REQUIRE(lax.downgrade_achieved);
    c.relying_parties.front().mitigations.strict_invalid_on_missing = true;
    const auto strict = run(c);
    REQUIRE(strict.downgrade_achieved);
    REQUIRE(strict.hijack_outcome);
    CHECK(*strict.hijack_outcome == bgp::HijackOutcome::filtered);
    REQUIRE(strict.victim_reachable);
    CHECK_FALSE(*strict.victim_reachable);
}

TEST_CASE("stalled refresh needs a single burst")
{
    const auto c = testing::load("table4-scenarioS");
    sim::Simulation s(c);
    const auto summary = s.run();
    REQUIRE(summary.downgrade_achieved);
    REQUIRE(s.campaign());
    std::size_t fired = 0;
    for (const auto& b : s.campaign()->report().bursts) fired += b.packets > 0 ? 1 : 0;
    CHECK(fired == 1);
    // 240/s over a 30 s window
    CHECK(summary.packets_injected <= 7200u);
    CHECK(summary.longest_refresh.to_seconds() > 3600);
    CHECK(*summary.hijack_outcome == bgp::HijackOutcome::hijacked);
}

TEST_CASE("SYN flood at the publication point downgrades the route server")
{
    auto c = testing::load("ixp");
    const auto summary = run(c);
    CHECK(summary.attack_started);
    if (summary.downgrade_achieved) {
        CHECK(*summary.hijack_outcome == bgp::HijackOutcome::hijacked);
    }
    c.attacker->rate = 0;
    const auto calm = run(c);
    CHECK_FALSE(calm.downgrade_achieved);
    CHECK(*calm.hijack_outcome == bgp::HijackOutcome::filtered);
}

TEST_CASE("old-manifest and long-validity scenarios run to a verdict")
{
    for (const char* name : {"table4-scenario1", "table4-scenario3"}) {
        INFO(name);
        const auto summary = run(testing::load(name));
        CHECK(summary.attack_started);
        CHECK(summary.bursts > 0);
        REQUIRE(summary.hijack_outcome);
        CHECK(*summary.hijack_outcome ==
              (summary.downgrade_achieved ? bgp::HijackOutcome::hijacked : bgp::HijackOutcome::filtered));
    }
}
