#include "rpkisim/relying_party.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace rpkisim::rp {

using nlohmann::json;

std::string to_string(Implementation i)
{
    switch (i) {
    case Implementation::routinator: return "routinator";
    case Implementation::fort: return "fort";
    case Implementation::octorpki: return "octorpki";
    case Implementation::ripe_validator: return "ripe-validator";
    }
    return "?";
}

Implementation parse_implementation(const std::string& s)
{
    if (s == "routinator") return Implementation::routinator;
    if (s == "fort") return Implementation::fort;
    if (s == "octorpki") return Implementation::octorpki;
    if (s == "ripe-validator" || s == "ripe_validator") return Implementation::ripe_validator;
    throw std::invalid_argument("unknown relying party implementation '" + s + "'");
}

std::string to_string(PpOutcome o)
{
    switch (o) {
    case PpOutcome::ok: return "ok";
    case PpOutcome::dns_timeout: return "dns_timeout";
    case PpOutcome::dns_servfail: return "dns_servfail";
    case PpOutcome::connect_timeout: return "connect_timeout";
    case PpOutcome::fetch_timeout: return "fetch_timeout";
    case PpOutcome::no_content: return "no_content";
    }
    return "?";
}

RelyingPartyProfile RelyingPartyProfile::defaults(Implementation name)
{
    RelyingPartyProfile p;
    p.name = name;
    switch (name) {
    case Implementation::routinator:
        p.t_sleep = Duration::seconds(600);
        p.per_pp_timeout_idle = Duration::seconds(300);
        p.per_pp_timeout_throttled = Duration::seconds(300);
        p.max_depth = 32;
        break;
    case Implementation::fort:
        p.t_sleep = Duration::seconds(3600);
        p.per_pp_timeout_idle = Duration::seconds(24);
        p.per_pp_timeout_throttled = Duration::infinite();
        p.max_depth = 31;
        break;
    case Implementation::octorpki:
        p.t_sleep = Duration::seconds(1200);
        p.per_pp_timeout_idle = Duration::seconds(60);
        p.per_pp_timeout_throttled = Duration::seconds(60);
        p.rsync_timeout_throttled = Duration::minutes(20);
        p.max_depth = 30;
        break;
    case Implementation::ripe_validator:
        p.t_sleep = Duration::seconds(120);
        p.per_pp_timeout_idle = Duration::seconds(60);
        p.per_pp_timeout_throttled = Duration{};
        break;
    }
    return p;
}

std::optional<std::size_t> RelyingPartyProfile::effective_max_depth() const
{
    if (mitigations.enforce_depth_cap) {
        return max_depth ? std::min(*max_depth, *mitigations.enforce_depth_cap) : *mitigations.enforce_depth_cap;
    }
    return max_depth;
}

void RelyingPartyProfile::validate() const
{
    if (t_sleep <= Duration{}) throw std::invalid_argument("relying_party.t_sleep must be positive");
    if (per_pp_timeout_idle <= Duration{}) throw std::invalid_argument("relying_party.per_pp_timeout_idle must be positive");
    if (per_pp_timeout_throttled < Duration{}) throw std::invalid_argument("relying_party.per_pp_timeout_throttled must not be negative");
    if (max_depth && *max_depth == 0) throw std::invalid_argument("relying_party.max_depth must be positive");
    if (syn_schedule.empty()) throw std::invalid_argument("relying_party.syn_schedule must not be empty");
    if (validation_min > validation_max) throw std::invalid_argument("relying_party.validation bounds are inverted");
    if (local_scan_time < Duration{}) throw std::invalid_argument("relying_party.local_scan_time must not be negative");
}

RelyingParty::RelyingParty(std::string name, Address address, RelyingPartyProfile profile, rpki::Certificate trust_anchor,
                           Address resolver, dns::StubConfig stub)
    : Node(std::move(name), address), profile_(std::move(profile)), trust_anchor_(std::move(trust_anchor)),
      resolver_(resolver), stub_config_(std::move(stub)), vrps_(std::make_shared<VrpSet>())
{
    profile_.validate();
    known_domains_.insert(trust_anchor_.domain);
}

void RelyingParty::start(SimTime first_refresh)
{
    if (!stub_) stub_.emplace(engine(), *this, resolver_, stub_config_);
    engine().schedule(first_refresh, id(), [this]() { begin_refresh(); });
}

void RelyingParty::on_packet(const Packet& packet)
{
    if (const auto* r = std::get_if<DnsResponse>(&packet.payload)) {
        if (stub_) stub_->on_response(*r);
    } else if (const auto* ack = std::get_if<TcpSynAck>(&packet.payload)) {
        on_synack(*ack);
    } else if (const auto* app = std::get_if<AppResponse>(&packet.payload)) {
        on_app(*app);
    }
}

void RelyingParty::begin_refresh()
{
    Engine& e = engine();
    refresh_.emplace();
    Refresh& r = *refresh_;
    r.report.rp = name();
    r.report.index = next_index_++;
    r.report.started = e.now();
    e.log().record(e.now(), name(), "refresh-start", json{{"refresh_index", r.report.index}});

    // One bulk of lookups for every repository known so far.
    const std::uint64_t index = r.report.index;
    for (const auto& domain : known_domains_) {
        r.dns[domain] = std::nullopt;
        stub_->resolve(domain, [this, index, domain](const dns::DnsOutcome& out) {
            if (!refresh_ || refresh_->report.index != index) return;
            refresh_->dns[domain] = out;
            if (refresh_->waiting_dns == domain) {
                refresh_->waiting_dns.clear();
                with_dns(domain);
            }
        });
    }
    e.schedule_in(profile_.local_scan_time, id(), [this]() { begin_traversal(); });
}

void RelyingParty::begin_traversal()
{
    Refresh& r = *refresh_;
    r.traversal_start = engine().now();
    r.queue.push_back(Item{trust_anchor_, 0});
    step();
}

void RelyingParty::step()
{
    Refresh& r = *refresh_;
    while (r.next < r.queue.size()) {
        const Item item = r.queue[r.next++];
        if (r.fetched.count(item.cert.domain)) {
            expand(item);
            continue;
        }
        visit(item);
        return;
    }
    finish_traversal();
}

void RelyingParty::visit(const Item& item)
{
    Refresh& r = *refresh_;
    r.current_item = item;
    fetch_domain(item.cert.domain, item.depth);
}

void RelyingParty::fetch_domain(const std::string& domain, std::size_t depth)
{
    Refresh& r = *refresh_;
    r.current = PpFetchRecord{domain, depth, PpOutcome::ok, engine().now(), {}};
    r.fetched.insert(domain);
    auto it = r.dns.find(domain);
    if (it == r.dns.end()) {
        // Discovered during this refresh: resolve now.
        r.dns[domain] = std::nullopt;
        r.waiting_dns = domain;
        const std::uint64_t index = r.report.index;
        stub_->resolve(domain, [this, index, domain](const dns::DnsOutcome& out) {
            if (!refresh_ || refresh_->report.index != index) return;
            refresh_->dns[domain] = out;
            if (refresh_->waiting_dns == domain) {
                refresh_->waiting_dns.clear();
                with_dns(domain);
            }
        });
        return;
    }
    if (!it->second) {
        r.waiting_dns = domain;
        return;
    }
    with_dns(domain);
}

void RelyingParty::with_dns(const std::string& domain)
{
    Refresh& r = *refresh_;
    const dns::DnsOutcome& out = *r.dns.at(domain);
    switch (out.result) {
    case dns::DnsOutcome::Result::answer:
        r.pp_address = out.address;
        connect();
        return;
    case dns::DnsOutcome::Result::timeout: pp_done(PpOutcome::dns_timeout, nullptr); return;
    default: pp_done(PpOutcome::dns_servfail, nullptr); return;
    }
}

void RelyingParty::connect()
{
    Engine& e = engine();
    Refresh& r = *refresh_;
    r.conn = next_conn_++;
    r.connected = false;
    const std::uint64_t gen = r.generation;
    for (const auto offset : profile_.syn_schedule) {
        e.schedule_in(offset, id(), [this, gen]() {
            if (!refresh_ || refresh_->generation != gen || refresh_->connected) return;
            engine().send(Packet{address(), id(), refresh_->pp_address, PacketKind::tcp_syn, TcpSyn{refresh_->conn}, 64});
        });
    }
    e.schedule_in(profile_.syn_give_up, id(), [this, gen]() {
        if (!refresh_ || refresh_->generation != gen || refresh_->connected) return;
        pp_done(PpOutcome::connect_timeout, nullptr);
    });
}

Duration RelyingParty::throttled_timeout_for(rpki::Transport t) const
{
    if (t == rpki::Transport::rsync && profile_.rsync_timeout_throttled) return *profile_.rsync_timeout_throttled;
    return profile_.per_pp_timeout_throttled;
}

void RelyingParty::on_synack(const TcpSynAck& ack)
{
    if (!refresh_ || refresh_->conn != ack.conn || refresh_->connected) return;
    Engine& e = engine();
    Refresh& r = *refresh_;
    r.connected = true;
    e.send(Packet{address(), id(), r.pp_address, PacketKind::app_request, AppRequest{r.conn, r.current.domain, false}, 200});

    const std::uint64_t gen = r.generation;
    auto abort_fetch = [this, gen](bool idle) {
        if (!refresh_ || refresh_->generation != gen) return;
        if (idle && refresh_->first_byte) return;
        engine().send(Packet{address(), id(), refresh_->pp_address, PacketKind::app_request,
                             AppRequest{refresh_->conn, refresh_->current.domain, true}, 64});
        pp_done(PpOutcome::fetch_timeout, nullptr);
    };
    e.schedule_in(profile_.per_pp_timeout_idle, id(), [abort_fetch]() { abort_fetch(true); });
    const Duration bound = throttled_timeout_for(r.current_item.cert.transport);
    if (Duration{} < bound && !bound.is_infinite()) {
        e.schedule_in(bound, id(), [abort_fetch]() { abort_fetch(false); });
    }
}

void RelyingParty::on_app(const AppResponse& resp)
{
    if (!refresh_ || refresh_->conn != resp.conn || !refresh_->connected) return;
    if (resp.first_byte) {
        refresh_->first_byte = true;
        return;
    }
    if (!resp.content) {
        pp_done(PpOutcome::no_content, nullptr);
        return;
    }
    pp_done(PpOutcome::ok, resp.content);
}

void RelyingParty::pp_done(PpOutcome outcome, std::shared_ptr<const rpki::Snapshot> content)
{
    Engine& e = engine();
    Refresh& r = *refresh_;
    r.current.outcome = outcome;
    r.current.duration = e.now() - r.current.started;
    r.report.pps.push_back(r.current);
    ++r.generation;
    r.conn = 0;
    r.connected = false;
    r.first_byte = false;
    if (outcome == PpOutcome::ok) {
        cache_.pps[r.current.domain] = CachedPp{content, e.now()};
        cache_.last_successful_fetch[r.current.domain] = e.now();
    }
    if (e.log().enabled()) {
        e.log().record(e.now(), name(), "pp-fetch",
                       json{{"domain", r.current.domain}, {"depth", r.current.depth}, {"outcome", to_string(outcome)},
                            {"duration", format_seconds(r.current.duration)}});
    }
    const Item item = r.current_item;
    // Continue from a fresh event so long chains do not nest calls.
    e.schedule_in(Duration{}, id(), [this, item]() {
        expand(item);
        step();
    });
}

void RelyingParty::expand(const Item& item)
{
    Refresh& r = *refresh_;
    auto it = cache_.pps.find(item.cert.domain);
    if (it == cache_.pps.end() || !it->second.content) return;
    const auto limit = profile_.effective_max_depth();
    for (const auto& child : it->second.content->certs) {
        if (child.issuer != item.cert.id) continue;
        known_domains_.insert(child.domain);
        const std::size_t depth = item.depth + 1;
        if (limit && depth > *limit) {
            if (!r.report.depth_limited) {
                engine().log().record(engine().now(), name(), "depth-limit", json{{"depth", depth}, {"cert", child.id}});
            }
            r.report.depth_limited = true;
            continue;
        }
        if (!limit && depth > unbounded_depth_guard) {
            if (!r.report.unbounded_guard_tripped) {
                engine().log().record(engine().now(), name(), "unbounded-traversal", json{{"depth", depth}, {"cert", child.id}});
            }
            r.report.unbounded_guard_tripped = true;
            continue;
        }
        r.report.max_depth_reached = std::max(r.report.max_depth_reached, depth);
        r.queue.push_back(Item{child, depth});
    }
}

void RelyingParty::finish_traversal()
{
    Engine& e = engine();
    Refresh& r = *refresh_;
    r.report.traversal_time = e.now() - r.traversal_start;
    Duration validation = profile_.validation_mean;
    if (profile_.validation_sd > Duration{}) {
        std::normal_distribution<double> dist(profile_.validation_mean.to_seconds(), profile_.validation_sd.to_seconds());
        double v = dist(e.rng());
        for (int tries = 0; (v < profile_.validation_min.to_seconds() || v > profile_.validation_max.to_seconds()) && tries < 1000; ++tries) {
            v = dist(e.rng());
        }
        validation = Duration::seconds(std::clamp(v, profile_.validation_min.to_seconds(), profile_.validation_max.to_seconds()));
    }
    e.schedule_in(validation, id(), [this]() { end_refresh(); });
}

void RelyingParty::end_refresh()
{
    Engine& e = engine();
    RefreshReport report = std::move(refresh_->report);
    refresh_.reset();
    report.ended = e.now();
    recompute_states(e.now());
    report.vrp_version = vrps_->version;

    if (e.log().enabled()) {
        json failures = json::array();
        std::size_t ok = 0;
        for (const auto& pp : report.pps) {
            if (pp.outcome == PpOutcome::ok) ++ok;
            else failures.push_back(json{{"domain", pp.domain}, {"outcome", to_string(pp.outcome)}});
        }
        e.log().record(e.now(), name(), "refresh",
                       json{{"rp", name()},
                            {"refresh_index", report.index},
                            {"started", format_seconds(report.started)},
                            {"ended", format_seconds(report.ended)},
                            {"pps_ok", ok},
                            {"pp_failures", failures},
                            {"max_depth", report.max_depth_reached},
                            {"vrp_version", report.vrp_version}});
    }
    history_.push_back(report);
    for (const auto& l : listeners_) l(history_.back());

    Duration sleep = profile_.t_sleep;
    if (profile_.mitigations.randomize_sleep) {
        const double j = profile_.mitigations.randomize_sleep->to_seconds();
        std::uniform_real_distribution<double> jitter(-j, j);
        sleep = std::max(Duration{}, sleep + Duration::seconds(jitter(e.rng())));
    }
    e.schedule_in(sleep, id(), [this]() { begin_refresh(); });
}

VrpSnapshot RelyingParty::recompute_states(SimTime now)
{
    std::set<Vrp> entries;
    std::set<Vrp> denied;
    std::set<rpki::ObjectId> seen;
    const bool strict = profile_.mitigations.strict_invalid_on_missing;

    auto snapshot_of = [&](const rpki::Certificate& ca) -> const rpki::Snapshot* {
        auto it = cache_.pps.find(ca.domain);
        return it == cache_.pps.end() ? nullptr : it->second.content.get();
    };

    auto deny_subtree = [&](const rpki::Certificate& root) {
        std::vector<const rpki::Certificate*> stack{&root};
        while (!stack.empty()) {
            const rpki::Certificate& ca = *stack.back();
            stack.pop_back();
            const rpki::Snapshot* s = snapshot_of(ca);
            if (s == nullptr) continue;
            for (const auto& roa : s->roas) {
                if (roa.issuer == ca.id) denied.insert(Vrp{roa.prefix, 32, 0});
            }
            for (const auto& child : s->certs) {
                if (child.issuer == ca.id && seen.insert(child.id).second) stack.push_back(&child);
            }
        }
    };

    std::vector<const rpki::Certificate*> pending;
    if (!(trust_anchor_.not_after < now)) {
        seen.insert(trust_anchor_.id);
        pending.push_back(&trust_anchor_);
    }
    while (!pending.empty()) {
        const rpki::Certificate& ca = *pending.back();
        pending.pop_back();
        const rpki::Snapshot* s = snapshot_of(ca);
        if (s == nullptr) continue;
        auto m = std::find_if(s->manifests.begin(), s->manifests.end(), [&](const rpki::Manifest& x) { return x.covers == ca.id; });
        if (m == s->manifests.end()) continue;
        if (m->valid_until < now) {
            // Everything below a stale manifest is discarded.
            if (strict) deny_subtree(ca);
            continue;
        }
        auto listed = [&](const rpki::ObjectId& id, rpki::ContentHash h) {
            auto it = m->listed.find(id);
            return it != m->listed.end() && it->second == h;
        };
        for (const auto& roa : s->roas) {
            if (roa.issuer != ca.id || !listed(roa.id, roa.hash())) continue;
            if (roa.valid_until < now || now < roa.not_before) continue;
            entries.insert(Vrp{roa.prefix, roa.max_len, roa.asn});
        }
        for (const auto& child : s->certs) {
            if (child.issuer != ca.id || !listed(child.id, child.hash())) continue;
            if (child.not_after < now || now < child.not_before) continue;
            if (seen.insert(child.id).second) pending.push_back(&child);
        }
    }
    entries.insert(denied.begin(), denied.end());

    if (entries != vrps_->entries) {
        auto next = std::make_shared<VrpSet>();
        next->entries = std::move(entries);
        next->version = vrps_->version + 1;
        Engine& e = engine();
        e.log().record(e.now(), name(), "vrp-update", json{{"version", next->version}, {"entries", next->entries.size()}});
        vrps_ = next;
        VrpSnapshot published = vrps_;
        e.schedule_in(profile_.vrp_export_delay, id(), [this, published]() {
            for (const auto& s : subscribers_) s(published);
        });
    }
    return vrps_;
}

} // namespace rpkisim::rp
