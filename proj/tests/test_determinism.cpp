#include <catch_amalgamated.hpp>

#include "rpkisim/config.hpp"
#include "rpkisim/simulation.hpp"
#include "support.hpp"

using namespace rpkisim;

namespace {

std::string log_of(const config::ScenarioConfig& c)
{
    sim::Simulation s(c);
    s.engine().log().capture_in_memory();
    s.run();
    return s.engine().log().text();
}

} // namespace

TEST_CASE("same config and seed give byte-identical logs")
{
    for (const char* name : {"table4-scenario2", "table4-scenarioS", "ixp"}) {
        INFO(name);
        const auto c = testing::load(name);
        const auto first = log_of(c);
        CHECK_FALSE(first.empty());
        CHECK(log_of(c) == first);
    }
}

TEST_CASE("a reloaded config replays the same run")
{
    const auto c = testing::load("table4-scenario2");
    CHECK(log_of(config::parse_scenario(config::to_yaml(c))) == log_of(c));
}

TEST_CASE("another seed changes the run")
{
    auto c = testing::load("table4-scenario2");
    const auto first = log_of(c);
    c.seed += 1;
    CHECK(log_of(c) != first);
}
