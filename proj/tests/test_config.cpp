#include <catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "rpkisim/config.hpp"
#include "support.hpp"

using namespace rpkisim;

namespace {

const char* const shipped[] = {"healthy-baseline", "table4-scenario1", "table4-scenario2", "table4-scenario3",
                               "table4-scenarioS", "ixp"};

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string replace_once(std::string text, const std::string& from, const std::string& to)
{
    const auto at = text.find(from);
    REQUIRE(at != std::string::npos);
    return text.replace(at, from.size(), to);
}

std::string error_key(const std::string& yaml)
{
    try {
        config::parse_scenario(yaml);
    } catch (const config::ConfigError& e) {
        return e.path();
    }
    return "<accepted>";
}

} // namespace

TEST_CASE("shipped scenarios survive a save and reload")
{
    for (const char* name : shipped) {
        INFO(name);
        const auto first = testing::load(name);
        const auto text = config::to_yaml(first);
        const auto second = config::parse_scenario(text);
        CHECK(second == first);
        CHECK(config::to_yaml(second) == text);
    }
}

TEST_CASE("programmatic edits round-trip")
{
    auto c = testing::load("table4-scenario2");
    c.relying_parties.front().mitigations.strict_invalid_on_missing = true;
    c.relying_parties.front().mitigations.randomize_sleep = Duration::seconds(45);
    c.resolvers.front().blocking = false;
    c.attacker->attacker_pp = "pp-attacker";
    c.attacker->stalloris = attack::StallorisPlan{40, 8, Duration::seconds(120), "s.example"};
    CHECK(config::parse_scenario(config::to_yaml(c)) == c);
}

TEST_CASE("errors name the offending key")
{
    const auto base = read_file(testing::scenario_path("table4-scenario2"));
    REQUIRE(error_key(base) == "<accepted>");

    CHECK(error_key(replace_once(base, "p_target: 0.5", "p_target: 1.5")) == "attacker.p_target");
    CHECK(error_key(replace_once(base, "p_target: 0.5", "p_target: half")) == "attacker.p_target");
    CHECK(error_key(replace_once(base, "window: 30s", "window: 30 parsecs")) == "attacker.window");
    CHECK(error_key(replace_once(base, "implementation: routinator", "implementation: bogus")) ==
          "relying_parties[0].implementation");
    CHECK(error_key(replace_once(base, "resolver: resolver,", "resolver: nowhere,")) == "relying_parties[0].resolver");
    CHECK(error_key(replace_once(base, "drop_limit: 60", "drop_limit: -4")) == "nameservers[1].drop_limit");
    CHECK(error_key(replace_once(base, "max_len: 22", "max_len: 40")) == "rpki.roas[0].max_len");
    CHECK(error_key(replace_once(base, "issuer: ta, domain: pp.victim", "issuer: nobody, domain: pp.victim")) ==
          "rpki.cas[0].issuer");
    CHECK(error_key(replace_once(base, "kind: uniform", "kind: gamma")) == "latency.kind");
    CHECK(error_key(replace_once(base, "seed: 7", "seed: 7\nsurprise: 1")) == "surprise");
}

TEST_CASE("duplicate names are rejected")
{
    const auto base = read_file(testing::scenario_path("table4-scenario2"));
    const auto doubled = replace_once(base, "name: pp-attacker", "name: pp-victim");
    CHECK(error_key(doubled).find("publication_points") == 0);
}
