#include "rpkisim/bgp.hpp"

#include <algorithm>
#include <stdexcept>

namespace rpkisim::bgp {

using nlohmann::json;

std::string to_string(RouteState s)
{
    switch (s) {
    case RouteState::valid: return "valid";
    case RouteState::invalid: return "invalid";
    case RouteState::unknown: return "unknown";
    }
    return "?";
}

std::string to_string(LearnedFrom l)
{
    switch (l) {
    case LearnedFrom::local: return "local";
    case LearnedFrom::route_server: return "route-server";
    case LearnedFrom::direct_peer: return "direct-peer";
    case LearnedFrom::customer: return "customer";
    case LearnedFrom::upstream: return "upstream";
    }
    return "?";
}

std::string to_string(Relation r)
{
    switch (r) {
    case Relation::upstream: return "upstream";
    case Relation::peer: return "peer";
    case Relation::customer: return "customer";
    }
    return "?";
}

Relation parse_relation(const std::string& s)
{
    if (s == "upstream" || s == "provider") return Relation::upstream;
    if (s == "peer") return Relation::peer;
    if (s == "customer") return Relation::customer;
    throw std::invalid_argument("unknown relation '" + s + "'");
}

std::string to_string(HijackOutcome h)
{
    switch (h) {
    case HijackOutcome::hijacked: return "hijacked";
    case HijackOutcome::filtered: return "filtered";
    case HijackOutcome::not_preferred: return "not-preferred";
    }
    return "?";
}

int local_pref_for(LearnedFrom l)
{
    switch (l) {
    case LearnedFrom::local: return 1000;
    case LearnedFrom::route_server: return 200;
    case LearnedFrom::customer: return 150;
    case LearnedFrom::direct_peer: return 120;
    case LearnedFrom::upstream: return 100;
    }
    return 100;
}

RouteState classify(const Announcement& a, const VrpSet& vrps)
{
    bool covered = false;
    for (const auto& v : vrps.entries) {
        if (!v.prefix.covers(a.prefix)) continue;
        covered = true;
        if (v.asn == a.origin_asn && a.prefix.length <= v.max_len && v.asn != 0) return RouteState::valid;
    }
    return covered ? RouteState::invalid : RouteState::unknown;
}

namespace {

bool better(const Announcement& a, const Announcement& b)
{
    if (a.prefix.length != b.prefix.length) return a.prefix.length > b.prefix.length;
    if (a.local_pref != b.local_pref) return a.local_pref > b.local_pref;
    if (a.as_path.size() != b.as_path.size()) return a.as_path.size() < b.as_path.size();
    if (a.origin_asn != b.origin_asn) return a.origin_asn < b.origin_asn;
    return a.next_hop < b.next_hop;
}

LearnedFrom learned_via(Relation r)
{
    switch (r) {
    case Relation::upstream: return LearnedFrom::upstream;
    case Relation::peer: return LearnedFrom::direct_peer;
    case Relation::customer: return LearnedFrom::customer;
    }
    return LearnedFrom::upstream;
}

Relation reverse(Relation r)
{
    switch (r) {
    case Relation::upstream: return Relation::customer;
    case Relation::customer: return Relation::upstream;
    case Relation::peer: return Relation::peer;
    }
    return Relation::peer;
}

const VrpSet& empty_vrps()
{
    static const VrpSet empty;
    return empty;
}

} // namespace

const Announcement& best_path(const std::vector<Announcement>& candidates)
{
    if (candidates.empty()) throw std::invalid_argument("best_path needs at least one candidate");
    return *std::min_element(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) { return better(a, b); });
}

void Network::add_as(Asn asn, std::optional<std::string> rov_source)
{
    if (!asns_.insert(asn).second) throw std::invalid_argument("AS" + std::to_string(asn) + " declared twice");
    as_[asn].rov = std::move(rov_source);
    converged_ = false;
}

void Network::add_link(Asn a, Asn b, Relation rel)
{
    if (!as_.count(a) || !as_.count(b)) throw std::invalid_argument("link between undeclared ASes");
    if (a == b) throw std::invalid_argument("self link on AS" + std::to_string(a));
    as_[a].neighbours[b] = rel;
    as_[b].neighbours[a] = reverse(rel);
    converged_ = false;
}

void Network::set_route_server(RouteServerConfig rs)
{
    for (Asn m : rs.members) {
        if (!as_.count(m)) throw std::invalid_argument("route server member AS" + std::to_string(m) + " undeclared");
    }
    rs_ = std::move(rs);
    converged_ = false;
}

void Network::originate(Asn asn, const Prefix& p)
{
    as_.at(asn).originated.insert(p);
    owners_[p] = asn;
    converged_ = false;
}

void Network::announce_bogus(Asn asn, const Prefix& p)
{
    as_.at(asn).originated.insert(p);
    converged_ = false;
}

void Network::withdraw(Asn asn, const Prefix& p)
{
    as_.at(asn).originated.erase(p);
    converged_ = false;
}

void Network::set_rov(Asn asn, std::optional<std::string> rov_source)
{
    as_.at(asn).rov = std::move(rov_source);
    converged_ = false;
}

void Network::set_vrps(const std::string& source, VrpSnapshot vrps)
{
    vrps_[source] = std::move(vrps);
    converged_ = false;
}

const VrpSet& Network::vrps_of(const std::string& source) const
{
    auto it = vrps_.find(source);
    return it == vrps_.end() || !it->second ? empty_vrps() : *it->second;
}

std::optional<std::string> Network::rov_source(Asn asn) const { return as_.at(asn).rov; }

bool Network::rs_member(Asn a) const
{
    return rs_ && std::find(rs_->members.begin(), rs_->members.end(), a) != rs_->members.end();
}

void Network::converge(EventLog* log, SimTime now)
{
    auto exported = [](Asn from, const Announcement& ann) {
        std::vector<Asn> path = ann.as_path;
        if (ann.learned_from != LearnedFrom::local) path.insert(path.begin(), from);
        return path;
    };

    const std::size_t max_rounds = 2 * asns_.size() + 8;
    bool changed = true;
    for (std::size_t round = 0; changed && round < max_rounds; ++round) {
        changed = false;
        std::map<Asn, std::map<Prefix, Announcement>> next;
        for (auto& [asn, st] : as_) {
            std::map<Prefix, std::vector<Announcement>> cands;
            for (const auto& p : st.originated) {
                cands[p].push_back(Announcement{p, asn, {asn}, LearnedFrom::local, local_pref_for(LearnedFrom::local), 0});
            }
            auto offer = [&](Asn from, const Announcement& ann, LearnedFrom via) {
                std::vector<Asn> path = exported(from, ann);
                if (std::find(path.begin(), path.end(), asn) != path.end()) return;
                Announcement a{ann.prefix, ann.origin_asn, std::move(path), via, local_pref_for(via), from};
                if (via == LearnedFrom::route_server && classify(a, vrps_of(rs_->vrp_source)) == RouteState::invalid) return;
                if (st.rov && classify(a, vrps_of(*st.rov)) == RouteState::invalid) return;
                cands[a.prefix].push_back(std::move(a));
            };
            for (const auto& [n, rel] : st.neighbours) {
                for (const auto& [p, ann] : as_.at(n).rib) offer(n, ann, learned_via(rel));
            }
            if (rs_member(asn)) {
                for (Asn m : rs_->members) {
                    if (m == asn) continue;
                    for (const auto& [p, ann] : as_.at(m).rib) offer(m, ann, LearnedFrom::route_server);
                }
            }
            auto& rib = next[asn];
            for (auto& [p, list] : cands) rib[p] = best_path(list);
        }
        for (auto& [asn, st] : as_) {
            if (st.rib != next[asn]) {
                changed = true;
                st.rib = std::move(next[asn]);
            }
        }
    }
    converged_ = !changed;
    if (log && log->enabled()) {
        for (const auto& [asn, st] : as_) {
            for (const auto& [p, ann] : st.rib) {
                const RouteState s = st.rov ? classify(ann, vrps_of(*st.rov)) : RouteState::unknown;
                log->record(now, "AS" + std::to_string(asn), "route",
                            json{{"observer", asn}, {"prefix", p.str()}, {"origin", ann.origin_asn},
                                 {"learned_from", to_string(ann.learned_from)}, {"state", to_string(s)}});
            }
        }
    }
}

std::optional<Announcement> Network::route(Asn at, const Prefix& p) const
{
    const auto& rib = as_.at(at).rib;
    auto it = rib.find(p);
    if (it == rib.end()) return std::nullopt;
    return it->second;
}

std::optional<Announcement> Network::lookup(Asn at, Address dst) const
{
    const Announcement* best = nullptr;
    for (const auto& [p, ann] : as_.at(at).rib) {
        if (p.contains(dst) && (best == nullptr || p.length > best->prefix.length)) best = &ann;
    }
    if (best == nullptr) return std::nullopt;
    return *best;
}

std::optional<Asn> Network::owner_of(Address a) const
{
    std::optional<Asn> owner;
    int len = -1;
    for (const auto& [p, asn] : owners_) {
        if (p.contains(a) && p.length > len) {
            owner = asn;
            len = p.length;
        }
    }
    return owner;
}

bool Network::forward(Address from, Address to) const
{
    const auto src = owner_of(from);
    const auto dst = owner_of(to);
    if (!src || !dst) return false;
    Asn cur = *src;
    for (std::size_t hops = 0; hops <= asns_.size() + 1; ++hops) {
        const auto r = lookup(cur, to);
        if (!r) return false;
        if (r->learned_from == LearnedFrom::local) return cur == *dst;
        cur = r->next_hop;
    }
    return false;
}

bool Network::reachability(Address s, Address d) const { return forward(s, d) && forward(d, s); }

RouteState Network::state_at(Asn observer, const Announcement& a) const
{
    const auto& st = as_.at(observer);
    if (st.rov) return classify(a, vrps_of(*st.rov));
    if (rs_member(observer)) return classify(a, vrps_of(rs_->vrp_source));
    return RouteState::unknown;
}

HijackOutcome Network::hijack_outcome(const Prefix& victim, const Announcement& adversary, Asn observer) const
{
    if (!victim.covers(adversary.prefix) && !adversary.prefix.covers(victim)) {
        throw std::invalid_argument("adversary announcement does not overlap the victim prefix");
    }
    if (state_at(observer, adversary) == RouteState::invalid) return HijackOutcome::filtered;
    const auto chosen = route(observer, adversary.prefix);
    if (chosen && chosen->origin_asn == adversary.origin_asn) return HijackOutcome::hijacked;
    return HijackOutcome::not_preferred;
}

} // namespace rpkisim::bgp
