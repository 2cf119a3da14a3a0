// Per-client token-bucket rate limiting with an optional slip tier.

#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>

#include "rpkisim/engine.hpp"
#include "rpkisim/net.hpp"

namespace rpkisim {

/// Linear-refill token bucket. Times are seconds since simulation start.
struct TokenBucket {
    double rate = 0.0;
    double burst = 1.0;
    double tokens = 1.0;
    double last = 0.0;

    static TokenBucket full(double rate, double burst, double now) { return {rate, burst, burst, now}; }

    void refill(double t);
    bool has_token() const { return tokens >= 1.0 - 1e-9; }
    bool try_take(double t);
    /// Earliest time >= t at which a token is available, assuming no consumption meanwhile.
    double next_token_at(double t);
};

/// Limits in packets per second. Queries within the drop limit are responded
/// to; those responses carry answers only while the slip limit also has
/// tokens, otherwise they are truncated. Absent limits are unlimited.
struct RateLimits {
    std::optional<double> slip_limit;
    std::optional<double> drop_limit;
    /// Bucket depth expressed in seconds of rate. Two tokens at least, or a slow
    /// bucket polled faster than it refills loses its fractional credit.
    double burst_seconds = 0.1;

    bool unlimited() const { return !slip_limit && !drop_limit; }
    bool operator==(const RateLimits&) const = default;
};

enum class Verdict { answer, truncate, drop };

struct FloodTally {
    std::uint64_t answered = 0;
    std::uint64_t truncated = 0;
    std::uint64_t dropped = 0;

    std::uint64_t total() const { return answered + truncated + dropped; }
};

/// Rate limiter keyed by exact client address.
///
/// Flood streams registered for a key are advanced lazily: before each real
/// packet is judged, the stream's arrivals up to that instant are consumed
/// against the same buckets. Arrivals that find the gate bucket empty are
/// counted in bulk with a binomial draw; only admitted arrivals are visited
/// individually, so cost is proportional to the limit rather than the flood rate.
class RateLimiter {
public:
    RateLimiter() = default;
    explicit RateLimiter(RateLimits limits) : limits_(limits) {}

    const RateLimits& limits() const { return limits_; }

    Verdict admit(Address client, double t, Rng& rng);

    /// Registers `count` arrivals uniform over [start, end). A stream already
    /// active for this client is advanced to `start` and must have ended.
    void add_flood(Address client, double start, double end, std::uint64_t count, Rng& rng);

    /// Advances the client's stream to t; returns and clears the outcome tally
    /// of a stream that has finished by t.
    std::optional<FloodTally> settle(Address client, double t, Rng& rng);

private:
    struct Flood {
        double at;
        double end;
        std::uint64_t remaining;
        FloodTally tally;
    };
    struct Client {
        std::optional<TokenBucket> answers;
        std::optional<TokenBucket> responses;
        std::optional<Flood> flood;
    };

    Client& client(Address a, double t);
    void advance(Client& c, double t, Rng& rng);
    Verdict judge(Client& c, double t);

    RateLimits limits_;
    std::unordered_map<Address, Client> clients_;
};

} // namespace rpkisim
