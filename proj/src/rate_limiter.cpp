#include "rpkisim/rate_limiter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rpkisim {

void TokenBucket::refill(double t)
{
    if (t > last) {
        tokens = std::min(burst, tokens + rate * (t - last));
        last = t;
    }
}

bool TokenBucket::try_take(double t)
{
    refill(t);
    if (!has_token()) return false;
    tokens = std::max(0.0, tokens - 1.0);
    return true;
}

double TokenBucket::next_token_at(double t)
{
    refill(t);
    if (has_token()) return t;
    return t + (1.0 - tokens) / rate;
}

RateLimiter::Client& RateLimiter::client(Address a, double t)
{
    auto [it, inserted] = clients_.try_emplace(a);
    if (inserted) {
        auto make = [&](double rate) { return TokenBucket::full(rate, std::max(2.0, rate * limits_.burst_seconds), t); };
        if (limits_.slip_limit) it->second.answers = make(*limits_.slip_limit);
        if (limits_.drop_limit) it->second.responses = make(*limits_.drop_limit);
    }
    return it->second;
}

Verdict RateLimiter::judge(Client& c, double t)
{
    if (c.responses) {
        if (!c.responses->try_take(t)) return Verdict::drop;
        if (c.answers && !c.answers->try_take(t)) return Verdict::truncate;
        return Verdict::answer;
    }
    if (c.answers) return c.answers->try_take(t) ? Verdict::answer : Verdict::truncate;
    return Verdict::answer;
}

namespace {

void count(FloodTally& tally, Verdict v, std::uint64_t n)
{
    switch (v) {
    case Verdict::answer: tally.answered += n; break;
    case Verdict::truncate: tally.truncated += n; break;
    case Verdict::drop: tally.dropped += n; break;
    }
}

} // namespace

void RateLimiter::advance(Client& c, double t, Rng& rng)
{
    if (!c.flood || c.flood->remaining == 0) return;
    Flood& f = *c.flood;
    const double until = std::min(t, f.end);
    if (until <= f.at && t < f.end) return;

    if (limits_.unlimited()) {
        // Arrivals in (at, until] out of the remaining ones, uniform over (at, end].
        std::uint64_t n = f.remaining;
        if (until < f.end) n = std::binomial_distribution<std::uint64_t>(f.remaining, (until - f.at) / (f.end - f.at))(rng);
        f.tally.answered += n;
        f.remaining -= n;
        f.at = until;
        return;
    }

    TokenBucket& gate = c.responses ? *c.responses : *c.answers;
    const Verdict refused = c.responses ? Verdict::drop : Verdict::truncate;

    if (f.end <= f.at) {
        // Zero-length window: everything arrives at once.
        while (f.remaining > 0 && gate.next_token_at(f.at) <= f.at) {
            count(f.tally, judge(c, f.at), 1);
            --f.remaining;
        }
        count(f.tally, refused, f.remaining);
        f.remaining = 0;
        return;
    }

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    while (f.remaining > 0) {
        const double token_at = gate.next_token_at(f.at);
        if (token_at > f.at) {
            // Arrivals while the gate is empty are refused in bulk.
            const double stop = std::min(token_at, until);
            const double p = std::clamp((stop - f.at) / (f.end - f.at), 0.0, 1.0);
            const std::uint64_t refused_n = std::binomial_distribution<std::uint64_t>(f.remaining, p)(rng);
            count(f.tally, refused, refused_n);
            f.remaining -= refused_n;
            f.at = stop;
            if (token_at >= until) break;
            if (f.remaining == 0) break;
        }
        // Earliest of the remaining arrivals.
        const double u = 1.0 - unit(rng);
        const double next = f.at + (f.end - f.at) * -std::expm1(std::log(u) / static_cast<double>(f.remaining));
        if (next > until) {
            f.at = until;
            break;
        }
        f.at = next;
        --f.remaining;
        count(f.tally, judge(c, next), 1);
    }
    if (t >= f.end && f.remaining > 0) {
        // Numerical leftovers at the window end.
        while (f.remaining > 0) {
            count(f.tally, judge(c, f.end), 1);
            --f.remaining;
        }
    }
}

Verdict RateLimiter::admit(Address a, double t, Rng& rng)
{
    if (limits_.unlimited()) return Verdict::answer;
    Client& c = client(a, t);
    advance(c, t, rng);
    return judge(c, t);
}

void RateLimiter::add_flood(Address a, double start, double end, std::uint64_t count_, Rng& rng)
{
    if (end < start) throw std::invalid_argument("flood window ends before it starts");
    Client& c = client(a, start);
    if (c.flood) {
        advance(c, start, rng);
        if (c.flood->remaining > 0) throw std::logic_error("overlapping floods for " + a.str());
        // Unsettled tally carries over.
        c.flood->at = start;
        c.flood->end = end;
        c.flood->remaining = count_;
        return;
    }
    c.flood = Flood{start, end, count_, {}};
}

std::optional<FloodTally> RateLimiter::settle(Address a, double t, Rng& rng)
{
    auto it = clients_.find(a);
    if (it == clients_.end() || !it->second.flood) return std::nullopt;
    Client& c = it->second;
    advance(c, t, rng);
    if (c.flood->remaining > 0 || t < c.flood->end) return std::nullopt;
    FloodTally tally = c.flood->tally;
    c.flood.reset();
    return tally;
}

} // namespace rpkisim
