// Relying-party refresh loop: bulk DNS, sequential breadth-first fetching with
// per-PP timers, cache retention on failure, validation and VRP export.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rpkisim/dns.hpp"
#include "rpkisim/engine.hpp"
#include "rpkisim/rpki.hpp"
#include "rpkisim/vrp.hpp"

namespace rpkisim::rp {

enum class Implementation { routinator, fort, octorpki, ripe_validator };

std::string to_string(Implementation i);
Implementation parse_implementation(const std::string& s);

struct Mitigations {
    std::optional<Duration> randomize_sleep; // uniform jitter of +/- this much
    std::optional<std::size_t> enforce_depth_cap;
    bool strict_invalid_on_missing = false;

    bool operator==(const Mitigations&) const = default;
};

struct RelyingPartyProfile {
    Implementation name = Implementation::routinator;
    Duration t_sleep;
    Duration per_pp_timeout_idle;
    /// Bound on a whole transfer. Infinite when unbounded; zero when the
    /// implementation has no separate transfer bound beyond the idle timer.
    Duration per_pp_timeout_throttled;
    std::optional<Duration> rsync_timeout_throttled;
    std::optional<std::size_t> max_depth; // nullopt: unbounded
    Duration local_scan_time = Duration::seconds(5);
    std::vector<Duration> syn_schedule{Duration::seconds(0), Duration::seconds(1),  Duration::seconds(3),
                                       Duration::seconds(7), Duration::seconds(15), Duration::seconds(31)};
    Duration syn_give_up = Duration::seconds(63);
    Duration validation_mean = Duration::seconds(19.8);
    Duration validation_sd = Duration::seconds(2.5);
    Duration validation_min = Duration::seconds(10);
    Duration validation_max = Duration::seconds(39);
    Duration vrp_export_delay = Duration::seconds(1);
    Mitigations mitigations;

    static RelyingPartyProfile defaults(Implementation name);
    std::optional<std::size_t> effective_max_depth() const;
    std::size_t tcp_syn_retries() const { return syn_schedule.size(); }
    void validate() const;
    bool operator==(const RelyingPartyProfile&) const = default;
};

/// Traversal stops here for implementations without a depth limit.
inline constexpr std::size_t unbounded_depth_guard = 10000;

enum class PpOutcome { ok, dns_timeout, dns_servfail, connect_timeout, fetch_timeout, no_content };

std::string to_string(PpOutcome o);

struct PpFetchRecord {
    std::string domain;
    std::size_t depth = 0;
    PpOutcome outcome = PpOutcome::ok;
    SimTime started;
    Duration duration;
};

struct RefreshReport {
    std::string rp;
    std::uint64_t index = 0;
    SimTime started;
    SimTime ended;
    Duration traversal_time;
    std::vector<PpFetchRecord> pps;
    std::uint64_t vrp_version = 0;
    std::size_t max_depth_reached = 0;
    bool depth_limited = false;
    bool unbounded_guard_tripped = false;

    Duration duration() const { return ended - started; }
};

/// Cached content of one publication point.
struct CachedPp {
    std::shared_ptr<const rpki::Snapshot> content;
    SimTime fetched_at;
};

struct RpCache {
    std::map<std::string, CachedPp> pps;
    std::map<std::string, SimTime> last_successful_fetch;
};

class RelyingParty : public Node {
public:
    using VrpSubscriber = std::function<void(const VrpSnapshot&)>;
    using RefreshListener = std::function<void(const RefreshReport&)>;

    RelyingParty(std::string name, Address address, RelyingPartyProfile profile, rpki::Certificate trust_anchor,
                 Address resolver, dns::StubConfig stub = {});

    void on_packet(const Packet& packet) override;

    /// Schedules the first refresh.
    void start(SimTime first_refresh);

    void subscribe(VrpSubscriber s) { subscribers_.push_back(std::move(s)); }
    void on_refresh(RefreshListener l) { listeners_.push_back(std::move(l)); }

    const RelyingPartyProfile& profile() const { return profile_; }
    const RpCache& cache() const { return cache_; }
    const VrpSnapshot& vrps() const { return vrps_; }
    const std::vector<RefreshReport>& history() const { return history_; }
    bool refreshing() const { return refresh_.has_value(); }
    std::uint64_t refresh_count() const { return next_index_; }

    /// Validates the cache as of `now`; publishes and returns the new set if it changed.
    VrpSnapshot recompute_states(SimTime now);

private:
    struct Item {
        rpki::Certificate cert;
        std::size_t depth;
    };
    struct Refresh {
        RefreshReport report;
        std::vector<Item> queue;
        std::size_t next = 0;
        std::map<std::string, std::optional<dns::DnsOutcome>> dns;
        std::set<std::string> fetched;
        SimTime traversal_start;
        std::string waiting_dns;
        // current PP
        std::uint64_t generation = 0;
        std::uint64_t conn = 0;
        PpFetchRecord current;
        Item current_item;
        Address pp_address;
        bool connected = false;
        bool first_byte = false;
    };

    void begin_refresh();
    void begin_traversal();
    void step();
    void visit(const Item& item);
    void fetch_domain(const std::string& domain, std::size_t depth);
    void with_dns(const std::string& domain);
    void connect();
    void on_synack(const TcpSynAck& ack);
    void on_app(const AppResponse& r);
    void pp_done(PpOutcome outcome, std::shared_ptr<const rpki::Snapshot> content);
    void expand(const Item& item);
    void finish_traversal();
    void end_refresh();
    Duration throttled_timeout_for(rpki::Transport t) const;

    RelyingPartyProfile profile_;
    rpki::Certificate trust_anchor_;
    Address resolver_;
    dns::StubConfig stub_config_;
    std::optional<dns::StubResolver> stub_;
    RpCache cache_;
    std::set<std::string> known_domains_;
    std::optional<Refresh> refresh_;
    std::uint64_t next_index_ = 0;
    std::uint64_t next_conn_ = 1;
    VrpSnapshot vrps_;
    std::vector<VrpSubscriber> subscribers_;
    std::vector<RefreshListener> listeners_;
    std::vector<RefreshReport> history_;
};

} // namespace rpkisim::rp
