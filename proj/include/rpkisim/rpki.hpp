// Abstract RPKI objects: certificates, manifests, ROAs and the repository tree.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpkisim/net.hpp"
#include "rpkisim/time.hpp"

namespace rpkisim::rpki {

using Asn = std::uint32_t;
using ObjectId = std::string;
using ContentHash = std::uint64_t;

struct Resource {
    Asn asn = 0;
    std::vector<Prefix> prefixes;

    /// True when every prefix here is covered by some prefix of `parent`.
    bool within(const Resource& parent) const;
    bool operator==(const Resource&) const = default;
};

enum class Transport { rrdp, rsync };

std::string to_string(Transport t);
Transport parse_transport(const std::string& s);

struct Certificate {
    ObjectId id;
    ObjectId issuer; // empty for the trust anchor
    Resource resources;
    std::string domain; // publication point of the objects this CA issues
    Transport transport = Transport::rrdp;
    std::vector<ObjectId> children;
    SimTime not_before;
    SimTime not_after;

    ContentHash hash() const;
    bool operator==(const Certificate&) const = default;
};

struct Manifest {
    ObjectId covers; // issuing CA
    std::map<ObjectId, ContentHash> listed;
    SimTime valid_from;
    SimTime valid_until;
    Duration regeneration_threshold = Duration::hours(6);
    Duration regeneration_period = Duration::hours(24);
    std::uint64_t number = 1;

    bool operator==(const Manifest&) const = default;
};

struct Roa {
    ObjectId id;
    ObjectId issuer;
    Prefix prefix;
    Asn asn = 0;
    std::uint8_t max_len = 0;
    SimTime not_before;
    SimTime valid_until;

    ContentHash hash() const;
    bool operator==(const Roa&) const = default;
};

enum class ObjectState { current, stale, expired };

std::string to_string(ObjectState s);

class UnknownObject : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// What a publication point serves for one domain: the manifests, child
/// certificates and ROAs of every CA publishing there.
struct Snapshot {
    std::string domain;
    std::vector<Manifest> manifests;
    std::vector<Certificate> certs;
    std::vector<Roa> roas;

    std::uint64_t size_bytes() const;
};

struct RepositoryTree {
    ObjectId tal;
    std::map<ObjectId, Certificate> certs;
    std::map<ObjectId, Manifest> manifests; // keyed by issuing CA
    std::map<ObjectId, Roa> roas;
    std::map<std::string, Address> domain_map;

    const Certificate& cert(const ObjectId& id) const;
    const Manifest& manifest_of(const ObjectId& ca) const;

    /// Adds a CA certificate under `issuer` (or as trust anchor when issuer is empty)
    /// with a fresh manifest valid from `now` for the manifest's regeneration period.
    Certificate& add_ca(Certificate cert, SimTime now, Manifest manifest_template = {});
    Roa& add_roa(Roa roa);

    /// Recomputes a CA's manifest listing from the issued objects currently in the tree.
    void relist(const ObjectId& ca);

    /// Applies manifest maintenance to every CA publishing at `domain`; returns true if any was renewed.
    bool maintain(const std::string& domain, SimTime now);

    Snapshot snapshot(const std::string& domain) const;
    std::vector<std::string> domains() const;

    /// Attaches a detached fragment (from build_delegation_chain) below `parent`.
    void graft(const ObjectId& parent, const RepositoryTree& fragment, const std::vector<ObjectId>& roots);

    /// Cert depth below the trust anchor (trust anchor itself is 0).
    std::size_t depth_of(const ObjectId& id) const;

    /// Throws std::invalid_argument naming the first violated structural invariant.
    void check() const;
};

struct ChainFragment {
    RepositoryTree tree; // tal unset; roots are issued by the caller's CA
    std::vector<ObjectId> roots;
};

/// `depth` levels where every CA re-delegates the same resources to `width`
/// children, each at its own subdomain of `base_domain`, all hosted at `host`.
ChainFragment build_delegation_chain(std::size_t depth, std::size_t width, const std::string& base_domain,
                                     const Resource& hold_resources, Address host, SimTime now,
                                     Duration validity = Duration::days(545));

/// Krill-style regeneration: renewed once remaining validity drops below the threshold.
Manifest maintain_manifest(const Manifest& m, SimTime now);

ObjectState object_state(const RepositoryTree& tree, const ObjectId& id, SimTime now);

} // namespace rpkisim::rpki
