// Publication-point servers: handshake with SYN limiting, then one logical
// fetch per connection, served normally, stalled, throttled or per client.

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
#include "rpkisim/rpki.hpp"

namespace rpkisim::pp {

struct Behavior {
    enum class Kind { normal, stall_idle, throttle };

    Kind kind = Kind::normal;
    Duration hold;               // stall_idle
    double bandwidth = 0;        // throttle, bytes/s
    std::uint64_t inflate_to = 0; // throttle, bytes

    static Behavior normal() { return {}; }
    static Behavior stall_idle(Duration hold) { return {Kind::stall_idle, hold, 0, 0}; }
    static Behavior throttle(double bandwidth, std::uint64_t inflate_to) { return {Kind::throttle, {}, bandwidth, inflate_to}; }

    bool operator==(const Behavior&) const = default;
};

std::string to_string(Behavior::Kind k);

/// What a client gets: content (null means the shared repository) and how it is served.
struct ServeRule {
    Behavior behavior;
    std::shared_ptr<const rpki::RepositoryTree> content;

    bool operator==(const ServeRule&) const = default;
};

enum class TransportSet { rrdp, rsync, both };

struct PpConfig {
    std::vector<std::string> domains;
    std::optional<double> syn_rate_limit;
    double syn_bucket_window = 0.1;
    ServeRule default_rule;
    std::map<Address, ServeRule> per_client; // selective serving
    TransportSet transport = TransportSet::both;
    double bandwidth = 10e6; // bytes/s for benign serving
    /// Interval of the background manifest check; zero disables it.
    Duration maintenance_interval = Duration::hours(1);

    bool selective() const { return !per_client.empty(); }
    void validate() const;
};

struct FetchSession {
    enum class State { handshake, serving, done, timed_out };

    std::uint64_t conn = 0;
    Address client;
    std::string domain;
    SimTime started_at;
    std::uint64_t bytes_total = 0;
    std::uint64_t bytes_sent = 0;
    State state = State::handshake;
    Behavior behavior;
};

std::string to_string(FetchSession::State s);

/// Observes SYN arrivals at an adversary-operated server.
using ConnectObserver = std::function<void(SimTime at, Address src)>;

class PublicationPoint : public Node {
public:
    PublicationPoint(std::string name, Address address, PpConfig config, std::shared_ptr<rpki::RepositoryTree> repo);

    void on_packet(const Packet& packet) override;
    void on_flood(const FloodStream& flood) override;

    /// Starts periodic manifest maintenance for the hosted domains.
    void start_maintenance();

    void set_observer(ConnectObserver observer) { observer_ = std::move(observer); }
    void set_rule(Address client, ServeRule rule) { config_.per_client[client] = std::move(rule); }
    void set_default_rule(ServeRule rule) { config_.default_rule = std::move(rule); }
    void host_domain(const std::string& domain);

    const PpConfig& config() const { return config_; }
    const std::map<std::uint64_t, FetchSession>& sessions() const { return sessions_; }
    bool hosts(const std::string& domain) const;

    struct Stats {
        std::uint64_t synacks = 0;
        std::uint64_t syn_dropped = 0;
        std::uint64_t fetches_done = 0;
        std::uint64_t fetches_aborted = 0;
    };
    const Stats& stats() const { return stats_; }
    std::uint64_t refused_from(Address src) const;
    /// True while `client` has a transfer in progress.
    bool serving(Address client) const;

private:
    std::unordered_map<Address, std::uint64_t> refused_;
    struct Key {
        Address client;
        std::uint64_t conn;
        auto operator<=>(const Key&) const = default;
    };

    void handle_syn(const Packet& p, const TcpSyn& syn);
    void serve_fetch(const Packet& p, const AppRequest& req);
    void abort_fetch(const Packet& p, const AppRequest& req);
    const ServeRule& rule_for(Address client) const;
    void maintain_tick();

    PpConfig config_;
    std::shared_ptr<rpki::RepositoryTree> repo_;
    RateLimiter syn_limiter_;
    ConnectObserver observer_;
    std::map<std::uint64_t, FetchSession> sessions_;
    std::map<Key, std::uint64_t> session_of_;
    std::uint64_t next_session_ = 1;
    Stats stats_;
};

struct SynProbeRow {
    double rate = 0;
    double synacks_per_s = 0;
};

struct SynProbeResult {
    std::vector<SynProbeRow> rows;
    std::optional<double> limit;
};

/// Evenly spaced SYNs at each rate against a fresh instance of the configured server.
SynProbeResult probe_syn_limit(const PpConfig& target, const std::vector<double>& rates,
                               Duration duration = Duration::seconds(6), std::uint64_t seed = 1);

struct DomainSynAssessment {
    std::vector<SynProbeResult> servers;
    /// A domain is exposed only when every server behind it is limited.
    bool vulnerable = false;
};

DomainSynAssessment assess_domain(const std::vector<PpConfig>& servers, const std::vector<double>& rates,
                                  Duration duration = Duration::seconds(6), std::uint64_t seed = 1);

} // namespace rpkisim::pp
