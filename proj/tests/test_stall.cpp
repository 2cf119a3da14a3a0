#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace rpkisim;
using Catch::Approx;

TEST_CASE("Routinator stalls for idle timeout times depth")
{
    const auto r = testing::measure_stall(testing::stall_config(rp::Implementation::routinator, 32, Duration::hours(12)));
    CHECK(r.longest_refresh.to_seconds() == Approx(300.0 * 32).epsilon(0.02));
    CHECK(r.deepest == 32);
}

TEST_CASE("a deeper chain is cut at the depth limit")
{
    const auto r = testing::measure_stall(testing::stall_config(rp::Implementation::routinator, 33, Duration::hours(12)));
    CHECK(r.longest_refresh.to_seconds() == Approx(300.0 * 32).epsilon(0.02));
    CHECK(r.deepest == 32);
}

TEST_CASE("Fort stalls on throttled transfers")
{
    const auto r = testing::measure_stall(testing::stall_config(rp::Implementation::fort, 31, Duration::hours(20)));
    CHECK(r.longest_refresh.to_hours() == Approx(9.1).epsilon(0.02));
}

TEST_CASE("OctoRPKI stalls in idle mode")
{
    const auto r = testing::measure_stall(testing::stall_config(rp::Implementation::octorpki, 30, Duration::hours(12)));
    CHECK(r.longest_refresh.to_seconds() == Approx(60.0 * 30).epsilon(0.02));
}

TEST_CASE("unbounded traversal hits the guard")
{
    const auto r = testing::measure_stall(
        testing::stall_config(rp::Implementation::ripe_validator, rp::unbounded_depth_guard + 2, Duration::days(8)));
    CHECK(r.guard_tripped);
    CHECK(r.deepest == rp::unbounded_depth_guard);
}

TEST_CASE("depth cap mitigation bounds the stall")
{
    auto c = testing::stall_config(rp::Implementation::routinator, 32, Duration::hours(12));
    c.relying_parties.front().mitigations.enforce_depth_cap = 4;
    const auto r = testing::measure_stall(c);
    CHECK(r.longest_refresh.to_seconds() < 300.0 * 5);
}
