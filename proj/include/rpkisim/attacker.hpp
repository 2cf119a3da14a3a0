// Adversary: refresh prediction, synchronised spoofed bursts, delegation-chain
// stalling and relying-party attribution.

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rpkisim/bgp.hpp"
#include "rpkisim/engine.hpp"
#include "rpkisim/publication_point.hpp"
#include "rpkisim/relying_party.hpp"
#include "rpkisim/rpki.hpp"

namespace rpkisim::attack {

struct Window {
    SimTime start;
    SimTime end;

    Duration length() const { return end - start; }
    bool contains(SimTime t) const { return start <= t && t < end; }
};

/// Learns a relying party's refresh period from query arrivals at an
/// adversary-operated server. Arrivals closer than `cluster_gap` to the
/// previous one belong to the same refresh and are ignored.
class IntervalPredictor {
public:
    explicit IntervalPredictor(Duration halfwidth = Duration::seconds(15), Duration offset = {}, std::size_t history = 10,
                               Duration cluster_gap = Duration::seconds(60));

    /// Records an arrival; returns the next window when a prediction is available.
    /// `flooded` says whether the refresh starting at `arrival` is being attacked,
    /// since denied attempts stretch that refresh and the gap after it.
    std::optional<Window> observe(SimTime arrival, bool flooded = false);
    bool same_refresh(SimTime arrival) const;
    /// Trimmed mean of recent gaps following refreshes of the given kind,
    /// falling back to the other kind when none has been seen yet.
    std::optional<Duration> estimated_period(bool after_flooded = false) const;
    std::optional<Window> window_after(SimTime refresh_start, bool flooded = false) const;
    const std::vector<SimTime>& observations() const { return observations_; }
    /// Assumed stretch of a flooded refresh until one has been measured.
    void set_flood_extension(Duration d) { flood_extension_ = d; }

private:
    Duration halfwidth_;
    Duration offset_;
    std::size_t history_;
    Duration cluster_gap_;
    std::vector<SimTime> observations_;
    bool last_flooded_ = false;
    Duration flood_extension_;
    std::deque<Duration> gaps_[2]; // indexed by whether the gap followed a flooded refresh
};

enum class TargetKind { pp_syn, ns_dns, public_resolver };
enum class StartCondition { immediate, fresh_manifest, expiring_manifest };
enum class StopCondition { manifest_expired, max_duration };

std::string to_string(TargetKind k);
TargetKind parse_target_kind(const std::string& s);
std::string to_string(StartCondition c);
StartCondition parse_start_condition(const std::string& s);

struct StallorisPlan {
    std::size_t depth = 1;                     // total stalled levels
    std::optional<std::size_t> split_at_depth; // spread levels over parallel chains within this depth
    std::optional<Duration> per_level_hold;    // derived from the victim profile when unset
    std::string base_domain;

    bool operator==(const StallorisPlan&) const = default;
};

struct AttackPlan {
    TargetKind target = TargetKind::ns_dns;
    double r_attacker = 0;
    Duration window = Duration::seconds(30);
    Duration window_offset;
    std::vector<Window> bursts;
    std::optional<StallorisPlan> stalloris;
    StartCondition start = StartCondition::fresh_manifest;
    StopCondition stop = StopCondition::manifest_expired;
    Duration max_duration = Duration::hours(30);
    std::size_t warmup_observations = 3;
    Duration flood_extension; // how much longer a refresh runs when every attempt is denied
};

/// Spoofed stream at r_attacker over `window`; returns the number of packets.
std::uint64_t execute_burst(Engine& engine, const Node& attacker, const AttackPlan& plan, const Window& window,
                            Address spoofed_src, Address target, PacketKind kind, const std::string& qname = {});

struct StallorisDeployment {
    std::shared_ptr<rpki::RepositoryTree> victim_view;
    std::vector<std::string> chain_domains;
    pp::Behavior behavior;
    std::vector<std::size_t> chain_lengths;
};

/// Per-level behaviour that keeps a victim of this profile connected as long as possible.
pp::Behavior stall_behavior(const rp::RelyingPartyProfile& victim, std::optional<Duration> hold);

/// Grafts chains below `attacker_ca` in a copy of `repo`, all hosted at `host`.
StallorisDeployment deploy_stalloris(const rpki::RepositoryTree& repo, const rpki::ObjectId& attacker_ca, Address host,
                                     const StallorisPlan& plan, const rp::RelyingPartyProfile& victim, SimTime now);

struct BurstRecord {
    Window window;
    std::uint64_t packets = 0;
    std::uint64_t victim_attempts_denied = 0;
};

struct AttackReport {
    bool started = false;
    bool downgraded = false;
    bool gave_up = false;
    SimTime attack_start;
    SimTime t_unknown;
    std::uint64_t packets_sent = 0;
    std::vector<BurstRecord> bursts;
    std::size_t refreshes_observed = 0;
    std::optional<bgp::HijackOutcome> hijack;
    std::optional<bool> victim_reachable;

    std::uint64_t iterations() const { return bursts.size(); }
    std::string bursts_csv() const;
};

/// The spoofing host. It only ever emits flood streams.
class Attacker : public Node {
public:
    Attacker(std::string name, Address address) : Node(std::move(name), address, true) {}
    void on_packet(const Packet&) override {}
};

struct CampaignTarget {
    Address address;
    Address spoofed_src;
    PacketKind kind = PacketKind::dns_query;
    std::string qname;
    /// Real victim packets refused so far by the target's limiter.
    std::function<std::uint64_t()> denied_so_far;
};

struct CampaignHooks {
    /// Remaining validity of the victim's manifest at the hosting PP.
    std::function<Duration()> manifest_remaining;
    /// Expiring start waits until remaining validity drops below this.
    Duration expiring_threshold = Duration::hours(7);
    /// True while the victim is being held inside the adversarial chain.
    std::function<bool()> victim_stalled;
    /// Installs the chain for the victim; called once, at the first burst.
    std::function<void()> deploy_stall;
    /// Called once the victim's ROA has left its VRP set.
    std::function<void(AttackReport&)> on_downgrade;
};

/// Drives the low-rate downgrade against one relying party.
class DowngradeCampaign {
public:
    DowngradeCampaign(Engine& engine, Attacker& attacker, rp::RelyingParty& victim, Vrp victim_vrp, AttackPlan plan,
                      CampaignTarget target, CampaignHooks hooks);

    /// Feed of refresh-start observations, e.g. queries at the adversary's nameserver.
    void observe(SimTime arrival);
    /// Without an observation channel bursts follow the last prediction.
    void set_blind(bool blind) { blind_ = blind; }

    const AttackReport& report() const { return report_; }
    const AttackPlan& plan() const { return plan_; }
    bool finished() const { return report_.downgraded || report_.gave_up; }

private:
    void maybe_start(SimTime arrival);
    void schedule_burst(const Window& w);
    void fire_burst(const Window& w);
    void on_refresh(const rp::RefreshReport& r);
    bool victim_vrp_present() const;

    Engine& engine_;
    Attacker& attacker_;
    rp::RelyingParty& victim_;
    Vrp victim_vrp_;
    AttackPlan plan_;
    CampaignTarget target_;
    CampaignHooks hooks_;
    IntervalPredictor predictor_;
    AttackReport report_;
    bool blind_ = false;
    bool stall_deployed_ = false;
    std::optional<SimTime> last_scheduled_;
    std::optional<Window> last_fired_;
};

// Relying-party attribution.

enum class Measurement { match, no_match, invalid };

std::string to_string(Measurement m);

/// The world as the adversary can act on and observe it.
class VictimIdEnvironment {
public:
    virtual ~VictimIdEnvironment() = default;
    /// Serve the inverse ROA pair to `candidate` only, the agreeing pair to everyone else.
    virtual void serve_inverse_to(Address candidate) = 0;
    virtual void wait(Duration d) = 0;
    virtual bool reachable(Address from, Address to) = 0;
    /// False if some AS between the two addresses filters on its own.
    virtual bool path_free_of_rov(Address from, Address to) = 0;
};

struct VictimIdState {
    std::vector<Address> candidate_rps;
    Address a1; // inside the prefix whose ROA is inverted
    Address a2; // inside the control prefix
    Duration round_wait = Duration::minutes(30);
    std::map<Address, Measurement> results;
    std::size_t rounds = 0;
};

struct Attribution {
    enum class Kind { match, no_match, indeterminate };
    Kind kind = Kind::indeterminate;
    std::optional<Address> rp;
};

std::string to_string(Attribution::Kind k);

Attribution identify_victim_rp(VictimIdState& state, Address target, VictimIdEnvironment& env);

} // namespace rpkisim::attack
