// Authoritative nameservers with response-rate limiting, caching resolvers
// with per-implementation retry behaviour, and a stub client.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rpkisim/engine.hpp"
#include "rpkisim/rate_limiter.hpp"

namespace rpkisim::dns {

struct ZoneRecord {
    std::string name;
    Address value;
    Duration ttl = Duration::seconds(300);

    bool operator==(const ZoneRecord&) const = default;
};

struct NameserverConfig {
    std::vector<ZoneRecord> zone;
    RateLimits limits; // limits.burst_seconds is the bucket window

    void validate() const;
    bool operator==(const NameserverConfig&) const = default;
};

/// Sees every query arriving at an adversary-operated server.
using QueryObserver = std::function<void(SimTime at, const std::string& qname, Address src)>;

class Nameserver : public Node {
public:
    Nameserver(std::string name, Address address, NameserverConfig config);

    void on_packet(const Packet& packet) override;
    void on_flood(const FloodStream& flood) override;

    void set_observer(QueryObserver observer) { observer_ = std::move(observer); }
    void set_record(const ZoneRecord& record);
    const NameserverConfig& config() const { return config_; }

    struct Stats {
        std::uint64_t answered = 0;
        std::uint64_t truncated = 0;
        std::uint64_t dropped = 0;
    };
    const Stats& stats() const { return stats_; }
    /// Real (non-flood) queries from `src` that were dropped.
    std::uint64_t refused_from(Address src) const;

private:
    NameserverConfig config_;
    std::unordered_map<Address, std::uint64_t> refused_;
    RateLimiter limiter_;
    QueryObserver observer_;
    Stats stats_;
};

enum class ResolverKind { bind9, unbound, google, cloudflare };

std::string to_string(ResolverKind k);
ResolverKind parse_resolver_kind(const std::string& s);

struct BlockedState {
    unsigned threshold = 16;
    Duration block_duration = Duration::minutes(15);

    bool operator==(const BlockedState&) const = default;
};

struct ResolverProfile {
    ResolverKind kind = ResolverKind::bind9;
    std::vector<Duration> retry_schedule;
    Duration overall_timeout;
    std::optional<BlockedState> blocked_state;
    Duration cache_max_ttl = Duration::hours(8);
    RateLimits client_limits;
    bool tcp_fallback = true;

    static ResolverProfile defaults(ResolverKind kind);
    void validate() const;
    bool operator==(const ResolverProfile&) const = default;
};

/// Expiry of a cached record; nullopt when it must not be cached at all.
std::optional<SimTime> cache_store(Duration ttl, SimTime now, const ResolverProfile& profile);

class Resolver : public Node {
public:
    Resolver(std::string name, Address address, ResolverProfile profile);

    /// Names equal to or below `suffix` are resolved at `nameserver`.
    void add_authority(const std::string& suffix, Address nameserver);

    void on_packet(const Packet& packet) override;
    void on_flood(const FloodStream& flood) override;

    const ResolverProfile& profile() const { return profile_; }
    bool is_blocked(Address nameserver) const;
    void flush_cache() { cache_.clear(); }

    struct Stats {
        std::uint64_t client_queries = 0;
        std::uint64_t upstream_queries = 0;
        std::uint64_t cache_hits = 0;
        std::uint64_t servfails = 0;
    };
    const Stats& stats() const { return stats_; }
    /// Real client queries from `src` turned away by the client limiter.
    std::uint64_t refused_from(Address src) const;

private:
    std::unordered_map<Address, std::uint64_t> refused_;
    struct Waiter {
        Address client;
        std::uint64_t id;
        bool tcp;
    };
    struct Resolution {
        std::string name;
        Address nameserver;
        std::vector<Waiter> waiters;
        unsigned sent = 0;
        bool done = false;
    };
    struct CacheEntry {
        Address value;
        SimTime expiry;
    };
    struct Block {
        unsigned consecutive_timeouts = 0;
        bool blocked = false;
        SimTime last_probe;
        SimTime last_client;
    };

    void handle_client(const Packet& p, const DnsQuery& q);
    void handle_upstream(const DnsResponse& r);
    void start(const std::string& name, Address ns, Waiter w, bool probe_only);
    void send_upstream(const std::shared_ptr<Resolution>& res, bool tcp);
    void finish(const std::shared_ptr<Resolution>& res, DnsRcode rcode, Address value, Duration ttl);
    void reply(const Waiter& w, const std::string& name, DnsRcode rcode, Address value, Duration ttl);
    std::optional<Address> authority_for(const std::string& name) const;

    ResolverProfile profile_;
    RateLimiter client_limiter_;
    std::map<std::string, Address> authorities_;
    std::unordered_map<std::string, CacheEntry> cache_;
    std::unordered_map<std::string, std::shared_ptr<Resolution>> inflight_;
    std::unordered_map<std::uint64_t, std::shared_ptr<Resolution>> by_upstream_id_;
    std::unordered_map<Address, Block> blocks_;
    std::uint64_t next_id_ = 1;
    Stats stats_;
};

struct DnsOutcome {
    enum class Result { answer, truncated, servfail, timeout };
    Result result = Result::timeout;
    Address address;
    SimTime resolved_at;
    unsigned queries_sent = 0;
};

std::string to_string(DnsOutcome::Result r);

struct StubConfig {
    std::vector<Duration> attempts{Duration::seconds(0), Duration::seconds(5)};
    Duration give_up = Duration::seconds(12);
    bool tcp_fallback = true;

    bool operator==(const StubConfig&) const = default;
};

/// Client-side resolver library embedded in a host node. The host forwards
/// every dns_response it receives to on_response().
class StubResolver {
public:
    using Callback = std::function<void(const DnsOutcome&)>;

    StubResolver(Engine& engine, const Node& host, Address resolver, StubConfig config = {});

    void resolve(const std::string& name, Callback done);
    void on_response(const DnsResponse& r);

private:
    struct Pending {
        std::string name;
        Callback done;
        unsigned sent = 0;
        bool finished = false;
    };
    void send(std::uint64_t id, const std::shared_ptr<Pending>& p, bool tcp);
    void complete(const std::shared_ptr<Pending>& p, DnsOutcome::Result result, Address value);

    Engine& engine_;
    const Node& host_;
    Address resolver_;
    StubConfig config_;
    std::uint64_t next_id_ = 1;
    std::unordered_map<std::uint64_t, std::shared_ptr<Pending>> pending_;
};

struct ProbeRow {
    double rate = 0;
    double responses_per_s = 0;
    double answers_per_s = 0;
};

struct ProbeResult {
    std::vector<ProbeRow> rows;
    std::optional<double> slip_limit;
    std::optional<double> drop_limit;
};

std::vector<double> default_probe_rates();

/// Sends evenly spaced queries at each rate against a fresh instance of the
/// configured server and reports observed response and answer rates.
ProbeResult probe_rate_limit(const NameserverConfig& target, const std::vector<double>& rates,
                             Duration probe_duration = Duration::seconds(10), std::uint64_t seed = 1);

} // namespace rpkisim::dns
