#include "rpkisim/publication_point.hpp"

#include <algorithm>
#include <stdexcept>

namespace rpkisim::pp {

using nlohmann::json;

std::string to_string(Behavior::Kind k)
{
    switch (k) {
    case Behavior::Kind::normal: return "normal";
    case Behavior::Kind::stall_idle: return "stall_idle";
    case Behavior::Kind::throttle: return "throttle";
    }
    return "?";
}

std::string to_string(FetchSession::State s)
{
    switch (s) {
    case FetchSession::State::handshake: return "handshake";
    case FetchSession::State::serving: return "serving";
    case FetchSession::State::done: return "done";
    case FetchSession::State::timed_out: return "timed_out";
    }
    return "?";
}

namespace {

void check_behavior(const Behavior& b, const std::string& where)
{
    if (b.kind == Behavior::Kind::stall_idle && !(Duration{} < b.hold)) throw std::invalid_argument(where + ".hold must be positive");
    if (b.kind == Behavior::Kind::throttle) {
        if (b.bandwidth <= 0) throw std::invalid_argument(where + ".bandwidth must be positive");
        if (b.inflate_to == 0) throw std::invalid_argument(where + ".inflate_to must be positive");
    }
}

} // namespace

void PpConfig::validate() const
{
    if (domains.empty()) throw std::invalid_argument("publication_point.domains must not be empty");
    if (syn_rate_limit && *syn_rate_limit <= 0) throw std::invalid_argument("publication_point.syn_rate_limit must be positive");
    if (bandwidth <= 0) throw std::invalid_argument("publication_point.bandwidth must be positive");
    check_behavior(default_rule.behavior, "publication_point.behavior");
    for (const auto& [addr, rule] : per_client) check_behavior(rule.behavior, "publication_point.selective[" + addr.str() + "]");
}

namespace {

RateLimits syn_limits(const PpConfig& c)
{
    RateLimits l;
    l.drop_limit = c.syn_rate_limit;
    l.burst_seconds = c.syn_bucket_window;
    return l;
}

} // namespace

PublicationPoint::PublicationPoint(std::string name, Address address, PpConfig config, std::shared_ptr<rpki::RepositoryTree> repo)
    : Node(std::move(name), address), config_(std::move(config)), repo_(std::move(repo)), syn_limiter_(syn_limits(config_))
{
    config_.validate();
}

bool PublicationPoint::hosts(const std::string& domain) const
{
    return std::find(config_.domains.begin(), config_.domains.end(), domain) != config_.domains.end();
}

const ServeRule& PublicationPoint::rule_for(Address client) const
{
    auto it = config_.per_client.find(client);
    return it == config_.per_client.end() ? config_.default_rule : it->second;
}

void PublicationPoint::on_packet(const Packet& packet)
{
    if (const auto* syn = std::get_if<TcpSyn>(&packet.payload)) {
        handle_syn(packet, *syn);
    } else if (const auto* req = std::get_if<AppRequest>(&packet.payload)) {
        if (req->abort) abort_fetch(packet, *req);
        else serve_fetch(packet, *req);
    }
}

void PublicationPoint::handle_syn(const Packet& p, const TcpSyn& syn)
{
    Engine& e = engine();
    if (observer_) observer_(e.now(), p.src);
    const Verdict v = syn_limiter_.admit(p.src, e.now().to_seconds(), e.rng());
    if (v == Verdict::drop) {
        ++stats_.syn_dropped;
        ++refused_[p.src];
        e.log().record(e.now(), name(), "syn-dropped", json{{"src", p.src.str()}, {"conn", syn.conn}});
        return;
    }
    ++stats_.synacks;
    e.send(Packet{address(), id(), p.src, PacketKind::tcp_synack, TcpSynAck{syn.conn}, 64});
}

std::uint64_t PublicationPoint::refused_from(Address src) const
{
    auto it = refused_.find(src);
    return it == refused_.end() ? 0 : it->second;
}

void PublicationPoint::host_domain(const std::string& domain)
{
    if (!hosts(domain)) config_.domains.push_back(domain);
}

bool PublicationPoint::serving(Address client) const
{
    return std::any_of(sessions_.begin(), sessions_.end(), [&](const auto& kv) {
        return kv.second.client == client && kv.second.state == FetchSession::State::serving;
    });
}

void PublicationPoint::on_flood(const FloodStream& flood)
{
    Engine& e = engine();
    syn_limiter_.add_flood(flood.src, flood.start.to_seconds(), flood.end.to_seconds(), flood.count, e.rng());
    e.schedule(flood.end, id(), [this, flood]() {
        Engine& en = engine();
        auto tally = syn_limiter_.settle(flood.src, en.now().to_seconds(), en.rng());
        if (!tally) return;
        stats_.synacks += tally->answered;
        stats_.syn_dropped += tally->dropped;
        en.log().record(en.now(), name(), "flood-outcome",
                        json{{"flood", flood.id}, {"src", flood.src.str()}, {"sent", flood.count},
                             {"answered", tally->answered}, {"truncated", tally->truncated}, {"dropped", tally->dropped}});
    });
}

void PublicationPoint::serve_fetch(const Packet& p, const AppRequest& req)
{
    Engine& e = engine();
    const SimTime now = e.now();
    const ServeRule& rule = rule_for(p.src);

    std::shared_ptr<const rpki::Snapshot> content;
    if (hosts(req.domain)) {
        if (rule.content) {
            content = std::make_shared<rpki::Snapshot>(rule.content->snapshot(req.domain));
        } else {
            repo_->maintain(req.domain, now);
            content = std::make_shared<rpki::Snapshot>(repo_->snapshot(req.domain));
        }
    }

    FetchSession s;
    s.conn = req.conn;
    s.client = p.src;
    s.domain = req.domain;
    s.started_at = now;
    s.behavior = rule.behavior;
    s.state = FetchSession::State::serving;
    const std::uint64_t body = content ? content->size_bytes() : 0;

    Duration first_byte_after;
    Duration complete_after;
    switch (rule.behavior.kind) {
    case Behavior::Kind::normal:
        s.bytes_total = body;
        complete_after = Duration::seconds(static_cast<double>(body) / config_.bandwidth);
        break;
    case Behavior::Kind::stall_idle:
        s.bytes_total = body;
        first_byte_after = rule.behavior.hold;
        complete_after = rule.behavior.hold + Duration::seconds(static_cast<double>(body) / config_.bandwidth);
        break;
    case Behavior::Kind::throttle:
        s.bytes_total = std::max<std::uint64_t>(body, rule.behavior.inflate_to);
        complete_after = Duration::seconds(static_cast<double>(s.bytes_total) / rule.behavior.bandwidth);
        break;
    }

    const std::uint64_t sid = next_session_++;
    sessions_[sid] = s;
    session_of_[Key{p.src, req.conn}] = sid;

    const Address client = p.src;
    const std::string domain = req.domain;
    const std::uint64_t conn = req.conn;
    e.schedule_in(first_byte_after, id(), [this, sid, client, domain, conn]() {
        if (sessions_.at(sid).state != FetchSession::State::serving) return;
        engine().send(Packet{address(), id(), client, PacketKind::app_response, AppResponse{conn, domain, true, 0, nullptr}, 64});
    });
    e.schedule_in(complete_after, id(), [this, sid, client, domain, conn, content]() {
        FetchSession& fs = sessions_.at(sid);
        if (fs.state != FetchSession::State::serving) return;
        fs.state = FetchSession::State::done;
        fs.bytes_sent = fs.bytes_total;
        ++stats_.fetches_done;
        Engine& en = engine();
        en.log().record(en.now(), name(), "fetch",
                        json{{"client", client.str()}, {"domain", domain}, {"behavior", to_string(fs.behavior.kind)},
                             {"duration", format_seconds(en.now() - fs.started_at)}, {"outcome", "done"}, {"bytes", fs.bytes_total}});
        const auto size = static_cast<std::uint32_t>(std::clamp<std::uint64_t>(fs.bytes_total, 64, 0xffffffffu));
        en.send(Packet{address(), id(), client, PacketKind::app_response, AppResponse{conn, domain, false, fs.bytes_total, content}, size});
    });
}

void PublicationPoint::abort_fetch(const Packet& p, const AppRequest& req)
{
    auto it = session_of_.find(Key{p.src, req.conn});
    if (it == session_of_.end()) return;
    FetchSession& fs = sessions_.at(it->second);
    if (fs.state != FetchSession::State::serving) return;
    Engine& e = engine();
    fs.state = FetchSession::State::timed_out;
    const double elapsed = (e.now() - fs.started_at).to_seconds();
    double sent = 0;
    if (fs.behavior.kind == Behavior::Kind::throttle) sent = elapsed * fs.behavior.bandwidth;
    else if (fs.behavior.kind == Behavior::Kind::stall_idle) sent = std::max(0.0, elapsed - fs.behavior.hold.to_seconds()) * config_.bandwidth;
    else sent = elapsed * config_.bandwidth;
    fs.bytes_sent = std::min<std::uint64_t>(fs.bytes_total, static_cast<std::uint64_t>(sent));
    ++stats_.fetches_aborted;
    e.log().record(e.now(), name(), "fetch",
                   json{{"client", fs.client.str()}, {"domain", fs.domain}, {"behavior", to_string(fs.behavior.kind)},
                        {"duration", format_seconds(e.now() - fs.started_at)}, {"outcome", "timed_out"}, {"bytes", fs.bytes_sent}});
}

void PublicationPoint::start_maintenance()
{
    if (config_.maintenance_interval <= Duration{}) return;
    engine().schedule_in(config_.maintenance_interval, id(), [this]() { maintain_tick(); });
}

void PublicationPoint::maintain_tick()
{
    Engine& e = engine();
    for (const auto& d : config_.domains) {
        if (repo_->maintain(d, e.now())) e.log().record(e.now(), name(), "manifest-renewed", json{{"domain", d}});
    }
    e.schedule_in(config_.maintenance_interval, id(), [this]() { maintain_tick(); });
}

namespace {

class SynProber : public Node {
public:
    using Node::Node;
    std::uint64_t synacks = 0;

    void on_packet(const Packet& p) override
    {
        if (std::holds_alternative<TcpSynAck>(p.payload)) ++synacks;
    }
    void syn_at(SimTime t, Address target, std::uint64_t conn)
    {
        engine().schedule(t, id(), [this, target, conn]() {
            engine().send(Packet{address(), id(), target, PacketKind::tcp_syn, TcpSyn{conn}, 64});
        });
    }
};

} // namespace

SynProbeResult probe_syn_limit(const PpConfig& target, const std::vector<double>& rates, Duration duration, std::uint64_t seed)
{
    SynProbeResult out;
    for (double rate : rates) {
        if (rate <= 0) throw std::invalid_argument("probe rates must be positive");
        Engine engine(seed);
        auto repo = std::make_shared<rpki::RepositoryTree>();
        PpConfig cfg = target;
        cfg.maintenance_interval = Duration{};
        PublicationPoint server("target-pp", Ipv4::parse("192.0.2.80"), cfg, repo);
        SynProber prober("prober", Ipv4::parse("198.51.100.9"));
        engine.attach(server);
        engine.attach(prober);
        const auto n = static_cast<std::uint64_t>(std::llround(rate * duration.to_seconds()));
        for (std::uint64_t i = 0; i < n; ++i) prober.syn_at(SimTime::from_seconds(static_cast<double>(i) / rate), server.address(), i);
        engine.run_until(SimTime::zero() + duration + Duration::seconds(1));
        SynProbeRow row{rate, static_cast<double>(prober.synacks) / duration.to_seconds()};
        out.rows.push_back(row);
        if (!out.limit && row.synacks_per_s < 0.9 * rate) out.limit = row.synacks_per_s;
    }
    return out;
}

DomainSynAssessment assess_domain(const std::vector<PpConfig>& servers, const std::vector<double>& rates, Duration duration,
                                  std::uint64_t seed)
{
    DomainSynAssessment a;
    a.vulnerable = !servers.empty();
    for (const auto& s : servers) {
        a.servers.push_back(probe_syn_limit(s, rates, duration, seed));
        if (!a.servers.back().limit) a.vulnerable = false;
    }
    return a;
}

} // namespace rpkisim::pp
