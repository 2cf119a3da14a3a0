// Scenario files: everything a run needs, loaded from and written back to YAML.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpkisim/attacker.hpp"
#include "rpkisim/dns.hpp"
#include "rpkisim/net.hpp"
#include "rpkisim/publication_point.hpp"
#include "rpkisim/relying_party.hpp"
#include "rpkisim/rpki.hpp"

namespace rpkisim::config {

/// Malformed scenario; what() starts with the offending key path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct LatencyConfig {
    enum class Kind { fixed, uniform };
    Kind kind = Kind::fixed;
    Duration value = Duration::millis(10);
    Duration low = Duration::millis(5);
    Duration high = Duration::millis(15);

    bool operator==(const LatencyConfig&) const = default;
};

struct CaConfig {
    std::string id;
    std::string issuer; // empty for the trust anchor
    std::string domain;
    rpki::Asn asn = 0;
    std::vector<Prefix> prefixes;
    rpki::Transport transport = rpki::Transport::rrdp;

    bool operator==(const CaConfig&) const = default;
};

struct RoaConfig {
    std::string id;
    std::string issuer;
    Prefix prefix;
    rpki::Asn asn = 0;
    std::uint8_t max_len = 0;

    bool operator==(const RoaConfig&) const = default;
};

struct RpkiConfig {
    CaConfig trust_anchor;
    std::vector<CaConfig> cas;
    std::vector<RoaConfig> roas;
    Duration manifest_regeneration_threshold = Duration::hours(6);
    Duration manifest_regeneration_period = Duration::hours(24);
    Duration object_validity = Duration::days(545);

    bool operator==(const RpkiConfig&) const = default;
};

struct PpNodeConfig {
    std::string name;
    Address address;
    std::vector<std::string> domains;
    std::optional<double> syn_rate_limit;
    double syn_bucket_window = 0.1;
    double bandwidth = 10e6;
    pp::Behavior behavior;
    Duration maintenance_interval = Duration::hours(1);

    bool operator==(const PpNodeConfig&) const = default;
};

struct NameserverNodeConfig {
    std::string name;
    Address address;
    std::vector<std::string> zones; // authoritative suffixes
    Duration default_ttl = Duration::seconds(300);
    std::vector<dns::ZoneRecord> records; // in addition to publication-point domains
    RateLimits limits;

    bool operator==(const NameserverNodeConfig&) const = default;
};

struct ResolverNodeConfig {
    std::string name;
    Address address;
    dns::ResolverKind kind = dns::ResolverKind::bind9;
    std::optional<RateLimits> client_limits;
    std::optional<Duration> cache_max_ttl;
    std::optional<bool> tcp_fallback;
    std::optional<bool> blocking; // false drops the blocked state

    dns::ResolverProfile profile() const;
    bool operator==(const ResolverNodeConfig&) const = default;
};

struct RpNodeConfig {
    std::string name;
    Address address;
    rp::Implementation implementation = rp::Implementation::routinator;
    std::string resolver;
    Duration first_refresh = Duration::seconds(10);
    std::optional<Duration> t_sleep;
    std::optional<Duration> timeout_idle;
    std::optional<Duration> timeout_throttled;
    std::optional<std::size_t> max_depth;
    bool unbounded_depth = false;
    rp::Mitigations mitigations;

    rp::RelyingPartyProfile profile() const;
    bool operator==(const RpNodeConfig&) const = default;
};

struct AsConfig {
    rpki::Asn asn = 0;
    std::vector<Prefix> prefixes;
    std::optional<std::string> rov; // relying party feeding its validator

    bool operator==(const AsConfig&) const = default;
};

struct LinkConfig {
    rpki::Asn a = 0;
    rpki::Asn b = 0;
    std::string relation = "peer"; // what b is to a

    bool operator==(const LinkConfig&) const = default;
};

struct RouteServerNodeConfig {
    rpki::Asn asn = 0;
    std::vector<rpki::Asn> members;
    std::string rp;

    bool operator==(const RouteServerNodeConfig&) const = default;
};

struct TopologyConfig {
    std::vector<AsConfig> ases;
    std::vector<LinkConfig> links;
    std::optional<RouteServerNodeConfig> route_server;

    bool operator==(const TopologyConfig&) const = default;
};

struct HijackConfig {
    Prefix prefix;
    rpki::Asn observer = 0;

    bool operator==(const HijackConfig&) const = default;
};

struct AttackerConfig {
    std::string name = "attacker";
    Address address;
    rpki::Asn asn = 0;
    attack::TargetKind target = attack::TargetKind::ns_dns;
    std::string target_node;
    std::string spoof; // node whose address is forged
    std::optional<double> rate;
    std::optional<double> p_target;
    std::optional<double> r_limit;
    Duration t_attack = Duration::hours(24);
    std::optional<unsigned> retries;
    Duration window = Duration::seconds(30);
    Duration window_offset;
    attack::StartCondition start = attack::StartCondition::fresh_manifest;
    Duration expiring_threshold = Duration::hours(7);
    Duration max_duration = Duration::hours(30);
    std::size_t warmup_observations = 3;
    std::string victim_rp;
    std::string victim_roa;
    std::string observer_ns;
    std::string observe_domain;
    std::string attacker_ca;
    std::string attacker_pp;
    std::optional<attack::StallorisPlan> stalloris;
    std::optional<HijackConfig> hijack;

    bool operator==(const AttackerConfig&) const = default;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::uint64_t seed = 1;
    Duration duration = Duration::hours(30);
    LatencyConfig latency;
    RpkiConfig rpki;
    std::vector<PpNodeConfig> publication_points;
    std::vector<NameserverNodeConfig> nameservers;
    std::vector<ResolverNodeConfig> resolvers;
    std::vector<RpNodeConfig> relying_parties;
    TopologyConfig topology;
    std::optional<AttackerConfig> attacker;

    /// Cross-reference checks; throws ConfigError.
    void validate() const;
    bool operator==(const ScenarioConfig&) const = default;
};

ScenarioConfig parse_scenario(const std::string& yaml_text);
ScenarioConfig load_scenario(const std::string& path);
std::string to_yaml(const ScenarioConfig& c);

} // namespace rpkisim::config
