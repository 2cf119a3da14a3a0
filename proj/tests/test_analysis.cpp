#include <catch_amalgamated.hpp>

#include <cmath>

#include "rpkisim/analysis.hpp"

using namespace rpkisim;
using Catch::Approx;

namespace {

// straight from the definition, no cancellation guard
double naive_o(double n, double p) { return 1.0 / (1.0 - std::pow(p, 1.0 / n)); }

struct Row {
    const char* label;
    std::uint64_t n;
    std::uint64_t o;
};

const Row printed_attempts[] = {{"1", 24, 35}, {"2", 864, 1247}, {"3", 23040, 33240}, {"S", 55, 80}};

struct VolumeCell {
    const char* label;
    double r_limit;
    std::uint64_t r_attacker;
    std::uint64_t total;
};

const VolumeCell printed_volumes[] = {
    {"1", 3, 105, 3150},        {"1", 60, 2100, 63000},        {"1", 1288, 45080, 1352400},
    {"2", 3, 3741, 112230},     {"2", 60, 74820, 2244600},     {"2", 1288, 1606136, 48184080},
    {"3", 3, 99720, 2991600},   {"3", 60, 1994400, 59832000},  {"3", 1288, 42813120, 1284393600},
    {"S", 3, 240, 7200},        {"S", 60, 4800, 103040},       {"S", 1288, 103040, 3091200},
};

} // namespace

TEST_CASE("attempt counts follow attack span over sleep times retries")
{
    CHECK(analysis::n_attempts(Duration::hours(6), Duration::seconds(900), 1) == 24);
    CHECK(analysis::n_attempts(Duration::days(1), Duration::seconds(600), 6) == 864);
    CHECK(analysis::n_attempts(Duration::days(2), Duration::seconds(120), 16) == 23040);
    CHECK(analysis::n_attempts(Duration::days(1), Duration::hours(2.6), 6) == 55);
}

TEST_CASE("attempt table matches the printed counts and factors")
{
    const auto rows = analysis::table4();
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& want = printed_attempts[i];
        INFO("scenario " << want.label);
        CHECK(rows[i].scenario == want.label);
        CHECK(rows[i].n_attempts == want.n);
        CHECK(std::abs(static_cast<double>(std::llround(rows[i].o)) - static_cast<double>(want.o)) <= 1.0);
        CHECK(rows[i].o == Approx(naive_o(static_cast<double>(want.n), 0.5)).epsilon(1e-9));
    }
}

TEST_CASE("one attempt at even odds needs twice the limit")
{
    CHECK(analysis::overwhelming_factor(1, 0.5) == Approx(2.0).epsilon(1e-12));
}

TEST_CASE("factor inverts the success probability")
{
    for (std::uint64_t n : {1u, 24u, 55u, 864u, 23040u}) {
        for (double p : {0.1, 0.5, 0.9}) {
            for (double limit : {3.0, 60.0, 1288.0}) {
                const double rate = analysis::required_rate(limit, n, p);
                INFO("n=" << n << " p=" << p << " limit=" << limit);
                CHECK(analysis::p_success(limit, rate, n) == Approx(p).margin(1e-6));
            }
        }
    }
}

TEST_CASE("single-attempt service probability")
{
    CHECK(analysis::p_connectonce(60, 2100) == Approx(60.0 / 2101.0));
    CHECK(analysis::p_connectonce(60, 0) == 1.0);
    CHECK(analysis::p_success(60, 2100, 6) == Approx(std::pow(1 - 60.0 / 2101.0, 6)));
}

TEST_CASE("volume table matches the printed rates and totals")
{
    const auto rows = analysis::table5();
    REQUIRE(rows.size() == 12);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& want = printed_volumes[i];
        const auto& got = rows[i];
        INFO("scenario " << want.label << " r_limit " << want.r_limit);
        CHECK(got.scenario == want.label);
        CHECK(got.r_limit == want.r_limit);
        CHECK(std::llabs(static_cast<long long>(got.computed.r_attacker) - static_cast<long long>(want.r_attacker)) <= 1);
        CHECK(got.reference.total_per_update == want.total);
        const bool odd_one = std::string(want.label) == "S" && want.r_limit == 60;
        if (odd_one) {
            CHECK(got.computed.total_per_update == 4800u * 30u);
            CHECK(got.flag == "reference-inconsistent");
        } else {
            CHECK(std::llabs(static_cast<long long>(got.computed.total_per_update) - static_cast<long long>(want.total)) <= 1);
            CHECK(got.flag.empty());
        }
    }
}

TEST_CASE("packet volume uses the rounded factor")
{
    const auto v = analysis::packet_volume(1246.8, 60, Duration::seconds(30));
    CHECK(v.r_attacker == 74820u);
    CHECK(v.total_per_update == 2244600u);
}

TEST_CASE("Wilson interval brackets the estimate")
{
    const auto ci = analysis::wilson_interval(200, 400);
    CHECK(ci.low < 0.5);
    CHECK(ci.high > 0.5);
    // reference value for 200/400 at 95 %
    CHECK(ci.low == Approx(0.4511).margin(1e-3));
    CHECK(ci.high == Approx(0.5489).margin(1e-3));
    const auto none = analysis::wilson_interval(0, 10);
    CHECK(none.low == Approx(0.0).margin(1e-12));
}

TEST_CASE("scenario parameters are validated")
{
    analysis::ScenarioParams p{"x", Duration::hours(1), Duration::seconds(0), 1, 0.5, Duration::seconds(30)};
    CHECK_THROWS(p.validate());
    p.t_sleep = Duration::seconds(60);
    p.p_target = 1.0;
    CHECK_THROWS(p.validate());
}
