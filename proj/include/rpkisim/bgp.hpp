// Static inter-domain routing with route-origin validation and an IXP route server.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rpkisim/event_log.hpp"
#include "rpkisim/vrp.hpp"

namespace rpkisim::bgp {

using rpki::Asn;

enum class RouteState { valid, invalid, unknown };
enum class LearnedFrom { local, route_server, direct_peer, customer, upstream };

std::string to_string(RouteState s);
std::string to_string(LearnedFrom l);

struct Announcement {
    Prefix prefix;
    Asn origin_asn = 0;
    std::vector<Asn> as_path; // nearest first; back() is the origin
    LearnedFrom learned_from = LearnedFrom::local;
    int local_pref = 100;
    Asn next_hop = 0; // neighbour the route was learned from; 0 for local

    bool operator==(const Announcement&) const = default;
};

RouteState classify(const Announcement& a, const VrpSet& vrps);

/// Longest prefix, then highest local_pref, then shortest path, then lowest origin.
const Announcement& best_path(const std::vector<Announcement>& candidates);

enum class Relation { upstream, peer, customer };

std::string to_string(Relation r);
Relation parse_relation(const std::string& s);

int local_pref_for(LearnedFrom l);

struct RouteServerConfig {
    Asn asn = 0; // not inserted into paths
    std::vector<Asn> members;
    std::string vrp_source;
};

enum class HijackOutcome { hijacked, filtered, not_preferred };

std::string to_string(HijackOutcome h);

class Network {
public:
    void add_as(Asn asn, std::optional<std::string> rov_source = std::nullopt);
    /// `b` is `rel` of `a`; the reverse relation is added to `b`.
    void add_link(Asn a, Asn b, Relation rel);
    void set_route_server(RouteServerConfig rs);
    /// Legitimate origination: the AS also owns the addresses.
    void originate(Asn asn, const Prefix& p);
    /// Origination without ownership.
    void announce_bogus(Asn asn, const Prefix& p);
    void withdraw(Asn asn, const Prefix& p);
    void set_rov(Asn asn, std::optional<std::string> rov_source);
    void set_vrps(const std::string& source, VrpSnapshot vrps);

    /// Runs path-vector propagation to a fixed point.
    void converge(EventLog* log = nullptr, SimTime now = {});

    std::optional<Announcement> route(Asn at, const Prefix& p) const;
    /// Longest-prefix match in `at`'s table.
    std::optional<Announcement> lookup(Asn at, Address dst) const;
    std::optional<Asn> owner_of(Address a) const;
    std::optional<Asn> as_of_host(Address a) const { return owner_of(a); }

    /// 1 iff packets get from s to d and back, each hop following longest-prefix match.
    bool reachability(Address s, Address d) const;

    RouteState state_at(Asn observer, const Announcement& a) const;
    HijackOutcome hijack_outcome(const Prefix& victim, const Announcement& adversary, Asn observer) const;

    const std::set<Asn>& ases() const { return asns_; }
    const VrpSet& vrps_of(const std::string& source) const;
    std::optional<std::string> rov_source(Asn asn) const;
    const std::optional<RouteServerConfig>& route_server() const { return rs_; }
    bool converged() const { return converged_; }

private:
    struct AsState {
        std::optional<std::string> rov;
        std::map<Asn, Relation> neighbours;
        std::set<Prefix> originated;
        std::map<Prefix, Announcement> rib;
    };

    bool forward(Address from, Address to) const;
    bool rs_member(Asn a) const;

    std::set<Asn> asns_;
    std::map<Asn, AsState> as_;
    std::map<Prefix, Asn> owners_;
    std::optional<RouteServerConfig> rs_;
    std::map<std::string, VrpSnapshot> vrps_;
    bool converged_ = false;
};

} // namespace rpkisim::bgp
