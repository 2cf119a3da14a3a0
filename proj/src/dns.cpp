#include "rpkisim/dns.hpp"

#include <algorithm>
#include <stdexcept>

namespace rpkisim::dns {

using nlohmann::json;

namespace {

std::string verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::answer: return "answer";
    case Verdict::truncate: return "truncate";
    case Verdict::drop: return "drop";
    }
    return "?";
}

void check_limits(const RateLimits& l, const std::string& where)
{
    if (l.slip_limit && *l.slip_limit <= 0) throw std::invalid_argument(where + ".slip_limit must be positive");
    if (l.drop_limit && *l.drop_limit <= 0) throw std::invalid_argument(where + ".drop_limit must be positive");
    if (l.slip_limit && l.drop_limit && *l.slip_limit > *l.drop_limit) {
        throw std::invalid_argument(where + ": slip_limit exceeds drop_limit");
    }
    if (l.burst_seconds <= 0) throw std::invalid_argument(where + ".bucket_window must be positive");
}

json flood_outcome(const FloodStream& f, const FloodTally& t)
{
    return json{{"flood", f.id},          {"src", f.src.str()},           {"sent", f.count},
                {"answered", t.answered}, {"truncated", t.truncated}, {"dropped", t.dropped}};
}

} // namespace

void NameserverConfig::validate() const
{
    check_limits(limits, "nameserver");
    for (const auto& r : zone) {
        if (r.name.empty()) throw std::invalid_argument("nameserver.zone: record without name");
        if (r.ttl < Duration{}) throw std::invalid_argument("nameserver.zone: negative ttl for " + r.name);
    }
}

Nameserver::Nameserver(std::string name, Address address, NameserverConfig config)
    : Node(std::move(name), address), config_(std::move(config)), limiter_(config_.limits)
{
    config_.validate();
}

void Nameserver::set_record(const ZoneRecord& record)
{
    for (auto& r : config_.zone) {
        if (r.name == record.name) {
            r = record;
            return;
        }
    }
    config_.zone.push_back(record);
}

void Nameserver::on_packet(const Packet& packet)
{
    const auto* q = std::get_if<DnsQuery>(&packet.payload);
    if (q == nullptr) return;
    Engine& e = engine();
    if (observer_) observer_(e.now(), q->name, packet.src);

    const Verdict v = q->tcp ? Verdict::answer : limiter_.admit(packet.src, e.now().to_seconds(), e.rng());
    if (e.log().enabled()) {
        e.log().record(e.now(), this->name(), "dns-query",
                       json{{"src", packet.src.str()}, {"qname", q->name}, {"tcp", q->tcp}, {"verdict", verdict_name(v)}});
    }
    if (v == Verdict::drop) {
        ++stats_.dropped;
        ++refused_[packet.src];
        return;
    }
    DnsResponse r{q->name, q->id, DnsRcode::truncated, {}, {}, q->tcp};
    if (v == Verdict::answer) {
        ++stats_.answered;
        auto it = std::find_if(config_.zone.begin(), config_.zone.end(), [&](const ZoneRecord& z) { return z.name == q->name; });
        if (it == config_.zone.end()) {
            r.rcode = DnsRcode::nxdomain;
        } else {
            r.rcode = DnsRcode::answer;
            r.answer = it->value;
            r.ttl = it->ttl;
        }
    } else {
        ++stats_.truncated;
    }
    e.send(Packet{address(), id(), packet.src, PacketKind::dns_response, r, 64});
}

std::uint64_t Nameserver::refused_from(Address src) const
{
    auto it = refused_.find(src);
    return it == refused_.end() ? 0 : it->second;
}

std::uint64_t Resolver::refused_from(Address src) const
{
    auto it = refused_.find(src);
    return it == refused_.end() ? 0 : it->second;
}

void Nameserver::on_flood(const FloodStream& flood)
{
    Engine& e = engine();
    limiter_.add_flood(flood.src, flood.start.to_seconds(), flood.end.to_seconds(), flood.count, e.rng());
    e.schedule(flood.end, id(), [this, flood]() {
        Engine& en = engine();
        auto tally = limiter_.settle(flood.src, en.now().to_seconds(), en.rng());
        if (!tally) return;
        stats_.answered += tally->answered;
        stats_.truncated += tally->truncated;
        stats_.dropped += tally->dropped;
        en.log().record(en.now(), name(), "flood-outcome", flood_outcome(flood, *tally));
    });
}

std::string to_string(ResolverKind k)
{
    switch (k) {
    case ResolverKind::bind9: return "bind9";
    case ResolverKind::unbound: return "unbound";
    case ResolverKind::google: return "google";
    case ResolverKind::cloudflare: return "cloudflare";
    }
    return "?";
}

ResolverKind parse_resolver_kind(const std::string& s)
{
    if (s == "bind9") return ResolverKind::bind9;
    if (s == "unbound") return ResolverKind::unbound;
    if (s == "google" || s == "public-google") return ResolverKind::google;
    if (s == "cloudflare" || s == "public-cloudflare") return ResolverKind::cloudflare;
    throw std::invalid_argument("unknown resolver kind '" + s + "'");
}

ResolverProfile ResolverProfile::defaults(ResolverKind kind)
{
    ResolverProfile p;
    p.kind = kind;
    const std::vector<Duration> bind9{Duration::seconds(0),   Duration::seconds(0.8), Duration::seconds(1.6),
                                      Duration::seconds(2.4), Duration::seconds(4.0), Duration::seconds(7.2)};
    switch (kind) {
    case ResolverKind::bind9:
        p.retry_schedule = bind9;
        p.overall_timeout = Duration::seconds(10);
        break;
    case ResolverKind::unbound:
        for (int i = 0; i < 16; ++i) p.retry_schedule.push_back(Duration::seconds(0.75 * i));
        p.overall_timeout = Duration::seconds(12);
        p.blocked_state = BlockedState{};
        break;
    case ResolverKind::google:
        p.retry_schedule = bind9;
        p.overall_timeout = Duration::seconds(10);
        p.client_limits.slip_limit = 500;
        p.client_limits.drop_limit = 1500;
        break;
    case ResolverKind::cloudflare:
        p.retry_schedule = bind9;
        p.overall_timeout = Duration::seconds(10);
        p.client_limits.drop_limit = 1000;
        break;
    }
    return p;
}

void ResolverProfile::validate() const
{
    if (retry_schedule.empty()) throw std::invalid_argument("resolver.retry_schedule must not be empty");
    for (std::size_t i = 0; i < retry_schedule.size(); ++i) {
        if (retry_schedule[i] < Duration{}) throw std::invalid_argument("resolver.retry_schedule: negative offset");
        if (i > 0 && !(retry_schedule[i - 1] < retry_schedule[i])) {
            throw std::invalid_argument("resolver.retry_schedule must be strictly increasing");
        }
        if (!(retry_schedule[i] < overall_timeout)) {
            throw std::invalid_argument("resolver.retry_schedule offset beyond overall_timeout");
        }
    }
    if (cache_max_ttl < Duration{}) throw std::invalid_argument("resolver.cache_max_ttl must be non-negative");
    if (blocked_state && blocked_state->threshold == 0) throw std::invalid_argument("resolver.blocked_state.threshold must be positive");
    check_limits(client_limits, "resolver.client_limits");
}

std::optional<SimTime> cache_store(Duration ttl, SimTime now, const ResolverProfile& profile)
{
    if (ttl < Duration{}) throw std::invalid_argument("negative ttl");
    if (ttl == Duration{}) return std::nullopt;
    const Duration kept = std::min(ttl, profile.cache_max_ttl);
    if (kept == Duration{}) return std::nullopt;
    return now + kept;
}

Resolver::Resolver(std::string name, Address address, ResolverProfile profile)
    : Node(std::move(name), address), profile_(std::move(profile)), client_limiter_(profile_.client_limits)
{
    profile_.validate();
}

void Resolver::add_authority(const std::string& suffix, Address nameserver) { authorities_[suffix] = nameserver; }

std::optional<Address> Resolver::authority_for(const std::string& name) const
{
    std::optional<Address> best;
    std::size_t best_len = 0;
    for (const auto& [suffix, ns] : authorities_) {
        const bool match = name == suffix ||
                           (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0 &&
                            name[name.size() - suffix.size() - 1] == '.');
        if (match && suffix.size() >= best_len) {
            best = ns;
            best_len = suffix.size();
        }
    }
    return best;
}

bool Resolver::is_blocked(Address nameserver) const
{
    auto it = blocks_.find(nameserver);
    return it != blocks_.end() && it->second.blocked;
}

void Resolver::on_packet(const Packet& packet)
{
    if (const auto* q = std::get_if<DnsQuery>(&packet.payload)) {
        handle_client(packet, *q);
    } else if (const auto* r = std::get_if<DnsResponse>(&packet.payload)) {
        handle_upstream(*r);
    }
}

void Resolver::on_flood(const FloodStream& flood)
{
    Engine& e = engine();
    client_limiter_.add_flood(flood.src, flood.start.to_seconds(), flood.end.to_seconds(), flood.count, e.rng());
    e.schedule(flood.end, id(), [this, flood]() {
        Engine& en = engine();
        if (auto tally = client_limiter_.settle(flood.src, en.now().to_seconds(), en.rng())) {
            en.log().record(en.now(), name(), "flood-outcome", flood_outcome(flood, *tally));
        }
    });
}

void Resolver::reply(const Waiter& w, const std::string& name, DnsRcode rcode, Address value, Duration ttl)
{
    if (rcode == DnsRcode::servfail) ++stats_.servfails;
    engine().send(Packet{address(), id(), w.client, PacketKind::dns_response, DnsResponse{name, w.id, rcode, value, ttl, w.tcp}, 64});
}

void Resolver::handle_client(const Packet& p, const DnsQuery& q)
{
    Engine& e = engine();
    const SimTime now = e.now();
    const Waiter w{p.src, q.id, q.tcp};
    if (!q.tcp && !profile_.client_limits.unlimited()) {
        const Verdict v = client_limiter_.admit(p.src, now.to_seconds(), e.rng());
        if (v != Verdict::answer) {
            ++refused_[p.src];
            e.log().record(now, name(), "client-limited", json{{"client", p.src.str()}, {"verdict", verdict_name(v)}});
            if (v == Verdict::truncate) reply(w, q.name, DnsRcode::truncated, {}, {});
            return;
        }
    }
    ++stats_.client_queries;

    if (auto it = cache_.find(q.name); it != cache_.end()) {
        if (now < it->second.expiry) {
            ++stats_.cache_hits;
            reply(w, q.name, DnsRcode::answer, it->second.value, it->second.expiry - now);
            return;
        }
        cache_.erase(it);
    }
    const auto ns = authority_for(q.name);
    if (!ns) {
        reply(w, q.name, DnsRcode::nxdomain, {}, {});
        return;
    }
    if (auto it = inflight_.find(q.name); it != inflight_.end()) {
        it->second->waiters.push_back(w);
        return;
    }

    bool probe_only = false;
    if (profile_.blocked_state) {
        Block& b = blocks_[*ns];
        const Duration hold = profile_.blocked_state->block_duration;
        if (b.blocked && now - b.last_client >= hold) {
            b.blocked = false;
            b.consecutive_timeouts = 0;
            e.log().record(now, name(), "ns-unblocked", json{{"nameserver", ns->str()}, {"reason", "idle"}});
        }
        b.last_client = now;
        if (b.blocked) {
            if (now - b.last_probe < hold) {
                reply(w, q.name, DnsRcode::servfail, {}, {});
                return;
            }
            b.last_probe = now;
            probe_only = true;
        }
    }
    start(q.name, *ns, w, probe_only);
}

void Resolver::start(const std::string& qname, Address ns, Waiter w, bool probe_only)
{
    Engine& e = engine();
    auto res = std::make_shared<Resolution>();
    res->name = qname;
    res->nameserver = ns;
    res->waiters.push_back(w);
    inflight_[qname] = res;

    const std::size_t n = probe_only ? 1 : profile_.retry_schedule.size();
    for (std::size_t i = 0; i < n; ++i) {
        e.schedule_in(profile_.retry_schedule[i], id(), [this, res]() {
            if (!res->done) send_upstream(res, false);
        });
    }
    e.schedule_in(profile_.overall_timeout, id(), [this, res]() {
        if (res->done) return;
        Engine& en = engine();
        if (profile_.blocked_state) {
            Block& b = blocks_[res->nameserver];
            b.consecutive_timeouts += res->sent;
            if (!b.blocked && b.consecutive_timeouts >= profile_.blocked_state->threshold) {
                b.blocked = true;
                b.last_probe = en.now();
                en.log().record(en.now(), name(), "ns-blocked", json{{"nameserver", res->nameserver.str()}});
            } else if (b.blocked) {
                b.last_probe = en.now();
            }
        }
        en.log().record(en.now(), name(), "resolution-timeout", json{{"qname", res->name}, {"queries", res->sent}});
        finish(res, DnsRcode::servfail, {}, {});
    });
}

void Resolver::send_upstream(const std::shared_ptr<Resolution>& res, bool tcp)
{
    const std::uint64_t qid = next_id_++;
    by_upstream_id_[qid] = res;
    ++res->sent;
    ++stats_.upstream_queries;
    engine().send(Packet{address(), id(), res->nameserver, PacketKind::dns_query, DnsQuery{res->name, qid, tcp}, 64});
}

void Resolver::handle_upstream(const DnsResponse& r)
{
    auto it = by_upstream_id_.find(r.id);
    if (it == by_upstream_id_.end()) return;
    auto res = it->second;
    by_upstream_id_.erase(it);
    if (res->done) return;
    if (r.rcode == DnsRcode::truncated) {
        if (profile_.tcp_fallback) send_upstream(res, true);
        return;
    }
    if (profile_.blocked_state) {
        Block& b = blocks_[res->nameserver];
        if (b.blocked) engine().log().record(engine().now(), name(), "ns-unblocked", json{{"nameserver", res->nameserver.str()}, {"reason", "answer"}});
        b.blocked = false;
        b.consecutive_timeouts = 0;
    }
    if (r.rcode == DnsRcode::answer) {
        if (auto expiry = cache_store(r.ttl, engine().now(), profile_)) cache_[r.name] = CacheEntry{r.answer, *expiry};
    }
    finish(res, r.rcode, r.answer, std::min(r.ttl, profile_.cache_max_ttl));
}

void Resolver::finish(const std::shared_ptr<Resolution>& res, DnsRcode rcode, Address value, Duration ttl)
{
    res->done = true;
    if (auto it = inflight_.find(res->name); it != inflight_.end() && it->second == res) inflight_.erase(it);
    for (const auto& w : res->waiters) reply(w, res->name, rcode, value, ttl);
}

std::string to_string(DnsOutcome::Result r)
{
    switch (r) {
    case DnsOutcome::Result::answer: return "answer";
    case DnsOutcome::Result::truncated: return "truncated";
    case DnsOutcome::Result::servfail: return "servfail";
    case DnsOutcome::Result::timeout: return "timeout";
    }
    return "?";
}

StubResolver::StubResolver(Engine& engine, const Node& host, Address resolver, StubConfig config)
    : engine_(engine), host_(host), resolver_(resolver), config_(std::move(config))
{
}

void StubResolver::send(std::uint64_t qid, const std::shared_ptr<Pending>& p, bool tcp)
{
    pending_[qid] = p;
    ++p->sent;
    engine_.send(Packet{host_.address(), host_.id(), resolver_, PacketKind::dns_query, DnsQuery{p->name, qid, tcp}, 64});
}

void StubResolver::resolve(const std::string& name, Callback done)
{
    auto p = std::make_shared<Pending>();
    p->name = name;
    p->done = std::move(done);
    for (const auto offset : config_.attempts) {
        engine_.schedule_in(offset, host_.id(), [this, p]() {
            if (!p->finished) send(next_id_++, p, false);
        });
    }
    engine_.schedule_in(config_.give_up, host_.id(), [this, p]() {
        if (!p->finished) complete(p, DnsOutcome::Result::timeout, {});
    });
}

void StubResolver::on_response(const DnsResponse& r)
{
    auto it = pending_.find(r.id);
    if (it == pending_.end()) return;
    auto p = it->second;
    pending_.erase(it);
    if (p->finished) return;
    switch (r.rcode) {
    case DnsRcode::answer: complete(p, DnsOutcome::Result::answer, r.answer); break;
    case DnsRcode::truncated:
        if (config_.tcp_fallback) send(next_id_++, p, true);
        break;
    case DnsRcode::servfail:
    case DnsRcode::nxdomain: complete(p, DnsOutcome::Result::servfail, {}); break;
    }
}

void StubResolver::complete(const std::shared_ptr<Pending>& p, DnsOutcome::Result result, Address value)
{
    p->finished = true;
    std::erase_if(pending_, [&](const auto& kv) { return kv.second == p; });
    p->done(DnsOutcome{result, value, engine_.now(), p->sent});
}

std::vector<double> default_probe_rates() { return {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000}; }

namespace {

class Prober : public Node {
public:
    using Node::Node;
    std::uint64_t responses = 0;
    std::uint64_t answers = 0;

    void on_packet(const Packet& p) override
    {
        const auto* r = std::get_if<DnsResponse>(&p.payload);
        if (r == nullptr) return;
        ++responses;
        if (r->rcode == DnsRcode::answer || r->rcode == DnsRcode::nxdomain) ++answers;
    }
    void query_at(SimTime t, Address target, std::uint64_t qid, const std::string& qname)
    {
        engine().schedule(t, id(), [this, target, qid, qname]() {
            engine().send(Packet{address(), id(), target, PacketKind::dns_query, DnsQuery{qname, qid, false}, 64});
        });
    }
};

} // namespace

ProbeResult probe_rate_limit(const NameserverConfig& target, const std::vector<double>& rates, Duration probe_duration,
                             std::uint64_t seed)
{
    ProbeResult out;
    const std::string qname = target.zone.empty() ? std::string("probe.invalid") : target.zone.front().name;
    for (double rate : rates) {
        if (rate <= 0) throw std::invalid_argument("probe rates must be positive");
        Engine engine(seed);
        Nameserver ns("target-ns", Ipv4::parse("192.0.2.53"), target);
        Prober prober("prober", Ipv4::parse("198.51.100.7"));
        engine.attach(ns);
        engine.attach(prober);
        const auto n = static_cast<std::uint64_t>(std::llround(rate * probe_duration.to_seconds()));
        const double gap = 1.0 / rate;
        for (std::uint64_t i = 0; i < n; ++i) prober.query_at(SimTime::from_seconds(gap * static_cast<double>(i)), ns.address(), i, qname);
        engine.run_until(SimTime::zero() + probe_duration + Duration::seconds(1));
        const double secs = probe_duration.to_seconds();
        ProbeRow row{rate, static_cast<double>(prober.responses) / secs, static_cast<double>(prober.answers) / secs};
        out.rows.push_back(row);
        if (!out.drop_limit && row.responses_per_s < 0.9 * rate) out.drop_limit = row.responses_per_s;
        if (!out.slip_limit && row.answers_per_s < 0.9 * rate && row.responses_per_s >= 0.9 * rate) out.slip_limit = row.answers_per_s;
    }
    return out;
}

} // namespace rpkisim::dns
