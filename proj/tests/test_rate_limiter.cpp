#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "rpkisim/rate_limiter.hpp"
#include "support.hpp"

using namespace rpkisim;
using Catch::Approx;

namespace {

const Address spoofed{0x0A000001};

RateLimits drop_at(double limit)
{
    RateLimits l;
    l.drop_limit = limit;
    return l;
}

double bucket_depth(double limit) { return std::max(2.0, limit * RateLimits{}.burst_seconds); }

} // namespace

TEST_CASE("lazy flood matches a packet-by-packet bucket")
{
    constexpr double limit = 10;
    constexpr double flood_rate = 90;
    constexpr double span = 30;
    constexpr int trials = 4000;
    const auto flood_count = static_cast<std::uint64_t>(flood_rate * span);

    Rng rng(11);
    std::uniform_real_distribution<double> when(5, 25);
    std::uniform_real_distribution<double> anywhere(0, span);

    int lazy_served = 0;
    int exact_served = 0;
    std::vector<double> arrivals(flood_count);
    for (int i = 0; i < trials; ++i) {
        RateLimiter lazy(drop_at(limit));
        lazy.add_flood(spoofed, 0, span, flood_count, rng);
        if (lazy.admit(spoofed, when(rng), rng) == Verdict::answer) ++lazy_served;

        for (auto& a : arrivals) a = anywhere(rng);
        std::sort(arrivals.begin(), arrivals.end());
        const double probe = when(rng);
        testing::ExactBucket bucket(limit, bucket_depth(limit));
        for (double a : arrivals) {
            if (a >= probe) break;
            bucket.take(a);
        }
        if (bucket.take(probe)) ++exact_served;
    }
    const double lazy_p = lazy_served / static_cast<double>(trials);
    const double exact_p = exact_served / static_cast<double>(trials);
    CHECK(lazy_p == Approx(exact_p).margin(0.025));
    CHECK(lazy_p == Approx(limit / (1 + flood_rate)).margin(0.025));
}

TEST_CASE("jittered six-query train matches independent attempts")
{
    // 2100 spoofed queries per second against a 60/s drop limit
    constexpr double limit = 60;
    constexpr double flood_rate = 2100;
    constexpr double span = 30;
    constexpr int trials = 10000;
    const double offsets[] = {0.0, 0.8, 1.6, 2.4, 4.0, 7.2};

    Rng rng(23);
    std::uniform_real_distribution<double> start(2, 20);
    std::uniform_real_distribution<double> jitter(0.005, 0.045);
    int trains_served = 0;
    for (int i = 0; i < trials; ++i) {
        RateLimiter limiter(drop_at(limit));
        limiter.add_flood(spoofed, 0, span, static_cast<std::uint64_t>(flood_rate * span), rng);
        const double t0 = start(rng);
        bool served = false;
        for (double o : offsets) {
            if (limiter.admit(spoofed, t0 + o + jitter(rng), rng) == Verdict::answer) served = true;
        }
        if (served) ++trains_served;
    }
    const double p = limit / (1 + flood_rate);
    const double independent = 1 - std::pow(1 - p, 6);
    CHECK(trains_served / static_cast<double>(trials) == Approx(independent).margin(0.02));
}

TEST_CASE("slow bucket keeps fractional credit when polled fast")
{
    RateLimiter limiter(drop_at(3));
    Rng rng(1);
    int answered = 0;
    for (int i = 0; i < 100; ++i) {
        if (limiter.admit(spoofed, 0.2 * i, rng) == Verdict::answer) ++answered;
    }
    // 20 s at 3/s plus the initial depth
    CHECK(answered >= 60);
    CHECK(answered <= 63);
}

TEST_CASE("slip tier truncates instead of dropping")
{
    RateLimits l;
    l.slip_limit = 10;
    RateLimiter limiter(l);
    Rng rng(1);
    int answers = 0;
    int truncated = 0;
    for (int i = 0; i < 50; ++i) {
        const auto v = limiter.admit(spoofed, 1.0 + i * 1e-4, rng);
        REQUIRE(v != Verdict::drop);
        (v == Verdict::answer ? answers : truncated)++;
    }
    CHECK(answers == static_cast<int>(bucket_depth(10)));
    CHECK(truncated == 50 - answers);
}

TEST_CASE("flood tally accounts for every packet")
{
    RateLimiter limiter(drop_at(60));
    Rng rng(5);
    limiter.add_flood(spoofed, 0, 30, 100000, rng);
    const auto tally = limiter.settle(spoofed, 31, rng);
    REQUIRE(tally);
    CHECK(tally->total() == 100000u);
    // refill over the span plus the starting depth
    CHECK(static_cast<double>(tally->answered) == Approx(60 * 30 + bucket_depth(60)).margin(3));
}

TEST_CASE("unlimited limiter answers everything")
{
    RateLimiter limiter;
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) CHECK(limiter.admit(spoofed, i * 1e-6, rng) == Verdict::answer);
}
