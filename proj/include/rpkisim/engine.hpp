// Deterministic discrete-event engine with a packet fabric.

#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rpkisim/event_log.hpp"
#include "rpkisim/packet.hpp"
#include "rpkisim/time.hpp"

namespace rpkisim {

using Rng = std::mt19937_64;

/// One-way latency distribution.
struct LatencyModel {
    enum class Kind { fixed, uniform };

    Kind kind = Kind::fixed;
    Duration low = Duration::millis(10);
    Duration high = Duration::millis(10);

    static LatencyModel fixed(Duration d) { return {Kind::fixed, d, d}; }
    static LatencyModel uniform(Duration lo, Duration hi) { return {Kind::uniform, lo, hi}; }

    Duration sample(Rng& rng) const;
    bool operator==(const LatencyModel&) const = default;
};

class Engine;

class Node {
public:
    Node(std::string name, Address address, bool can_spoof = false)
        : name_(std::move(name)), address_(address), can_spoof_(can_spoof)
    {
    }
    virtual ~Node() = default;
    Node(const Node&) = delete;
    Node& operator=(const Node&) = delete;

    virtual void on_packet(const Packet& packet) = 0;
    /// Default: the stream is silently absorbed and its packets counted as dropped.
    virtual void on_flood(const FloodStream& flood);

    const std::string& name() const { return name_; }
    Address address() const { return address_; }
    NodeId id() const { return id_; }
    bool can_spoof() const { return can_spoof_; }

protected:
    Engine& engine() const { return *engine_; }

private:
    friend class Engine;
    std::string name_;
    Address address_;
    bool can_spoof_;
    NodeId id_ = no_node;
    Engine* engine_ = nullptr;
};

class SchedulingError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class Engine {
public:
    using Action = std::function<void()>;

    explicit Engine(std::uint64_t seed, LatencyModel default_latency = LatencyModel::fixed(Duration::millis(10)));

    SimTime now() const { return now_; }
    Rng& rng() { return rng_; }
    EventLog& log() { return log_; }
    const LatencyModel& default_latency() const { return default_latency_; }

    /// Registers a node; its address becomes routable. The node must outlive the engine's run.
    NodeId attach(Node& node);
    Node* node_at(Address a) const;
    Node& node(NodeId id) const { return *nodes_.at(id); }

    /// Enqueues `action` to fire at `at`. Ties fire in insertion order.
    void schedule(SimTime at, NodeId target, Action action);
    void schedule_in(Duration delay, NodeId target, Action action) { schedule(now_ + delay, target, std::move(action)); }

    void send(Packet packet) { send(std::move(packet), default_latency_); }
    void send(Packet packet, const LatencyModel& latency);
    void send_flood(FloodStream flood) { send_flood(std::move(flood), default_latency_); }
    void send_flood(FloodStream flood, const LatencyModel& latency);

    /// Processes every event with fire_at <= t, then sets now() = t.
    void run_until(SimTime t);
    /// Processes events until the queue is empty or `stop` returns true after an event.
    void run_while(SimTime limit, const std::function<bool()>& keep_going);

    std::uint64_t events_processed() const { return processed_; }
    std::size_t pending() const { return queue_.size(); }

    struct PacketCounters {
        std::uint64_t sent = 0;
        std::uint64_t delivered = 0;
        std::uint64_t blackholed = 0;
    };
    const PacketCounters& counters() const { return counters_; }

private:
    struct Event {
        SimTime fire_at;
        std::uint64_t seq;
        NodeId target;
        Action action;
    };
    struct Later {
        bool operator()(const Event& a, const Event& b) const
        {
            if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
            return a.seq > b.seq;
        }
    };

    void check_spoofing(Address src, NodeId origin) const;
    void fire_next();

    SimTime now_;
    std::uint64_t seq_ = 0;
    std::uint64_t processed_ = 0;
    std::uint64_t next_flood_id_ = 1;
    Rng rng_;
    LatencyModel default_latency_;
    EventLog log_;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::vector<Node*> nodes_;
    std::unordered_map<Address, Node*> by_address_;
    PacketCounters counters_;
};

} // namespace rpkisim
