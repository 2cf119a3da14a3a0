#include "rpkisim/engine.hpp"

namespace rpkisim {

using nlohmann::json;

std::string_view to_string(PacketKind k)
{
    switch (k) {
    case PacketKind::dns_query: return "dns-query";
    case PacketKind::dns_response: return "dns-response";
    case PacketKind::tcp_syn: return "tcp-syn";
    case PacketKind::tcp_synack: return "tcp-synack";
    case PacketKind::app_request: return "app-request";
    case PacketKind::app_response: return "app-response";
    }
    return "?";
}

std::string_view to_string(DnsRcode r)
{
    switch (r) {
    case DnsRcode::answer: return "answer";
    case DnsRcode::truncated: return "truncated";
    case DnsRcode::servfail: return "servfail";
    case DnsRcode::nxdomain: return "nxdomain";
    }
    return "?";
}

Duration LatencyModel::sample(Rng& rng) const
{
    if (kind == Kind::fixed || low == high) return low;
    std::uniform_int_distribution<std::int64_t> dist(low.count_us(), high.count_us());
    return Duration::micros(dist(rng));
}

void Node::on_flood(const FloodStream& flood)
{
    engine().log().record(engine().now(), name_, "flood-outcome",
                          json{{"flood", flood.id}, {"src", flood.src.str()}, {"sent", flood.count},
                               {"answered", 0}, {"truncated", 0}, {"dropped", flood.count}});
}

Engine::Engine(std::uint64_t seed, LatencyModel default_latency) : rng_(seed), default_latency_(default_latency) {}

NodeId Engine::attach(Node& node)
{
    if (by_address_.count(node.address())) {
        throw std::invalid_argument("address " + node.address().str() + " already attached");
    }
    node.id_ = static_cast<NodeId>(nodes_.size());
    node.engine_ = this;
    nodes_.push_back(&node);
    by_address_[node.address()] = &node;
    return node.id_;
}

Node* Engine::node_at(Address a) const
{
    auto it = by_address_.find(a);
    return it == by_address_.end() ? nullptr : it->second;
}

void Engine::schedule(SimTime at, NodeId target, Action action)
{
    if (at < now_) {
        throw SchedulingError("event scheduled at " + format_seconds(at) + " before now " + format_seconds(now_));
    }
    queue_.push(Event{at, seq_++, target, std::move(action)});
}

void Engine::check_spoofing(Address src, NodeId origin) const
{
    if (origin >= nodes_.size()) {
        throw std::invalid_argument("packet without a valid true origin");
    }
    const Node& sender = *nodes_[origin];
    if (src != sender.address() && !sender.can_spoof()) {
        throw std::invalid_argument("node " + sender.name() + " cannot spoof source " + src.str());
    }
}

void Engine::send(Packet packet, const LatencyModel& latency)
{
    check_spoofing(packet.src, packet.true_origin);
    if (packet.size_bytes == 0) {
        throw std::invalid_argument("packet size must be positive");
    }
    ++counters_.sent;
    Node* dst = node_at(packet.dst);
    if (dst == nullptr) {
        ++counters_.blackholed;
        if (log_.enabled()) {
            log_.record(now_, nodes_[packet.true_origin]->name(), "blackholed",
                        json{{"src", packet.src.str()}, {"dst", packet.dst.str()}, {"kind", to_string(packet.kind)}});
        }
        return;
    }
    const SimTime sent_at = now_;
    const SimTime at = now_ + latency.sample(rng_);
    schedule(at, dst->id(), [this, dst, sent_at, p = std::move(packet)]() {
        ++counters_.delivered;
        if (log_.enabled()) {
            log_.record(now_, dst->name(), "deliver",
                        json{{"src", p.src.str()}, {"kind", to_string(p.kind)}, {"sent_at", format_seconds(sent_at)}});
        }
        dst->on_packet(p);
    });
}

void Engine::send_flood(FloodStream flood, const LatencyModel& latency)
{
    check_spoofing(flood.src, flood.true_origin);
    if (flood.end < flood.start || flood.start < now_) {
        throw SchedulingError("flood window must be non-empty and not in the past");
    }
    flood.id = next_flood_id_++;
    counters_.sent += flood.count;
    const std::string& origin = nodes_[flood.true_origin]->name();
    if (log_.enabled()) {
        log_.record(now_, origin, "flood-sent",
                    json{{"flood", flood.id}, {"src", flood.src.str()}, {"dst", flood.dst.str()},
                         {"kind", to_string(flood.kind)}, {"count", flood.count},
                         {"start", format_seconds(flood.start)}, {"end", format_seconds(flood.end)}});
    }
    Node* dst = node_at(flood.dst);
    if (dst == nullptr) {
        counters_.blackholed += flood.count;
        log_.record(now_, origin, "blackholed", json{{"flood", flood.id}, {"count", flood.count}});
        return;
    }
    const Duration shift = latency.sample(rng_);
    flood.start += shift;
    flood.end += shift;
    const SimTime arrive = flood.start;
    schedule(arrive, dst->id(), [this, dst, f = std::move(flood)]() {
        counters_.delivered += f.count;
        dst->on_flood(f);
    });
}

void Engine::fire_next()
{
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.fire_at;
    ++processed_;
    ev.action();
}

void Engine::run_until(SimTime t)
{
    if (t < now_) {
        throw SchedulingError("run_until target is in the past");
    }
    while (!queue_.empty() && queue_.top().fire_at <= t) {
        fire_next();
    }
    now_ = t;
}

void Engine::run_while(SimTime limit, const std::function<bool()>& keep_going)
{
    while (!queue_.empty() && queue_.top().fire_at <= limit) {
        fire_next();
        if (!keep_going()) return;
    }
    if (now_ < limit && queue_.empty()) now_ = limit;
}

} // namespace rpkisim
