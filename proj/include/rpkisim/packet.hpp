// Packets exchanged over the simulated fabric.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

#include "rpkisim/net.hpp"
#include "rpkisim/time.hpp"

namespace rpkisim {

namespace rpki {
struct Snapshot;
}

using NodeId = std::uint32_t;
inline constexpr NodeId no_node = ~NodeId{0};

enum class PacketKind { dns_query, dns_response, tcp_syn, tcp_synack, app_request, app_response };

std::string_view to_string(PacketKind k);

struct DnsQuery {
    std::string name;
    std::uint64_t id = 0;
    bool tcp = false;
};

enum class DnsRcode { answer, truncated, servfail, nxdomain };

std::string_view to_string(DnsRcode r);

struct DnsResponse {
    std::string name;
    std::uint64_t id = 0;
    DnsRcode rcode = DnsRcode::answer;
    Address answer;
    Duration ttl;
    bool tcp = false;
};

struct TcpSyn {
    std::uint64_t conn = 0;
};

struct TcpSynAck {
    std::uint64_t conn = 0;
};

struct AppRequest {
    std::uint64_t conn = 0;
    std::string domain;
    bool abort = false;
};

/// A fetch response. `first_byte` marks the notification that body bytes
/// started flowing; the final message carries the content.
struct AppResponse {
    std::uint64_t conn = 0;
    std::string domain;
    bool first_byte = false;
    std::uint64_t bytes = 0;
    std::shared_ptr<const rpki::Snapshot> content;
};

using Payload = std::variant<DnsQuery, DnsResponse, TcpSyn, TcpSynAck, AppRequest, AppResponse>;

struct Packet {
    Address src;
    NodeId true_origin = no_node;
    Address dst;
    PacketKind kind = PacketKind::dns_query;
    Payload payload;
    std::uint32_t size_bytes = 64;
};

/// `count` spoofed packets whose send times are independent and uniform over
/// [start, end). Delivered to the destination as one stream so that rate
/// limiters can account for millions of packets without per-packet events.
struct FloodStream {
    std::uint64_t id = 0;
    Address src;
    NodeId true_origin = no_node;
    Address dst;
    PacketKind kind = PacketKind::dns_query;
    std::string qname;
    SimTime start;
    SimTime end;
    std::uint64_t count = 0;
    std::uint32_t size_bytes = 64;
};

} // namespace rpkisim
