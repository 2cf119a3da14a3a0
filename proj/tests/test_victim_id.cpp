#include <catch_amalgamated.hpp>

#include <random>

#include "rpkisim/victim_id.hpp"

using namespace rpkisim;

TEST_CASE("attribution finds the relying party behind the target")
{
    constexpr std::size_t candidates = 5;
    int correct = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        std::mt19937_64 pick(seed);
        const std::size_t truth = pick() % candidates;
        victim_id::WorldOptions o;
        o.seed = seed;
        o.relying_parties = candidates;
        o.target_rp = truth;
        victim_id::SimulatedWorld world(o);
        auto state = world.initial_state();
        const auto a = attack::identify_victim_rp(state, world.target_address(), world);
        INFO("seed " << seed << " truth rp-" << truth + 1);
        CHECK(a.kind == attack::Attribution::Kind::match);
        if (a.kind == attack::Attribution::Kind::match && a.rp == world.rp_addresses()[truth]) ++correct;
    }
    CHECK(correct == 50);
}

TEST_CASE("a target without route origin validation matches nobody")
{
    victim_id::WorldOptions o;
    o.seed = 3;
    victim_id::SimulatedWorld world(o);
    auto state = world.initial_state();
    const auto a = attack::identify_victim_rp(state, world.target_address(), world);
    CHECK(a.kind == attack::Attribution::Kind::no_match);
    CHECK_FALSE(a.rp);
}

TEST_CASE("world rejects an out-of-range target")
{
    victim_id::WorldOptions o;
    o.target_rp = 7;
    CHECK_THROWS(victim_id::world_scenario(o));
}
