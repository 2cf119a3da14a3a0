#include "rpkisim/rpki.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace rpkisim::rpki {

namespace {

constexpr std::uint64_t manifest_bytes = 10 * 1024;
constexpr std::uint64_t object_bytes = 20 * 1024;

struct Fnv {
    std::uint64_t h = 1469598103934665603ull;
    Fnv& add(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
        return *this;
    }
    Fnv& add(const std::string& s)
    {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return add(s.size());
    }
};

} // namespace

bool Resource::within(const Resource& parent) const
{
    return std::all_of(prefixes.begin(), prefixes.end(), [&](const Prefix& p) {
        return std::any_of(parent.prefixes.begin(), parent.prefixes.end(), [&](const Prefix& q) { return q.covers(p); });
    });
}

std::string to_string(Transport t) { return t == Transport::rrdp ? "rrdp" : "rsync"; }

Transport parse_transport(const std::string& s)
{
    if (s == "rrdp") return Transport::rrdp;
    if (s == "rsync") return Transport::rsync;
    throw std::invalid_argument("unknown transport '" + s + "'");
}

std::string to_string(ObjectState s)
{
    switch (s) {
    case ObjectState::current: return "current";
    case ObjectState::stale: return "stale";
    case ObjectState::expired: return "expired";
    }
    return "?";
}

ContentHash Certificate::hash() const
{
    Fnv f;
    f.add(id).add(issuer).add(resources.asn).add(domain).add(static_cast<std::uint64_t>(transport));
    for (const auto& p : resources.prefixes) f.add(p.address.value).add(p.length);
    f.add(static_cast<std::uint64_t>(not_before.count_us())).add(static_cast<std::uint64_t>(not_after.count_us()));
    return f.h;
}

ContentHash Roa::hash() const
{
    Fnv f;
    f.add(id).add(issuer).add(prefix.address.value).add(prefix.length).add(asn).add(max_len);
    f.add(static_cast<std::uint64_t>(valid_until.count_us()));
    return f.h;
}

std::uint64_t Snapshot::size_bytes() const
{
    return manifests.size() * manifest_bytes + (certs.size() + roas.size()) * object_bytes;
}

const Certificate& RepositoryTree::cert(const ObjectId& id) const
{
    auto it = certs.find(id);
    if (it == certs.end()) throw UnknownObject("unknown certificate '" + id + "'");
    return it->second;
}

const Manifest& RepositoryTree::manifest_of(const ObjectId& ca) const
{
    auto it = manifests.find(ca);
    if (it == manifests.end()) throw UnknownObject("no manifest for CA '" + ca + "'");
    return it->second;
}

Certificate& RepositoryTree::add_ca(Certificate c, SimTime now, Manifest tmpl)
{
    if (certs.count(c.id)) throw std::invalid_argument("duplicate certificate id '" + c.id + "'");
    if (c.issuer.empty()) {
        tal = c.id;
    } else {
        auto it = certs.find(c.issuer);
        if (it == certs.end()) throw UnknownObject("issuer '" + c.issuer + "' of '" + c.id + "' not in tree");
        it->second.children.push_back(c.id);
    }
    const ObjectId id = c.id;
    const ObjectId issuer = c.issuer;
    auto& stored = certs.emplace(id, std::move(c)).first->second;
    tmpl.covers = id;
    tmpl.valid_from = now;
    tmpl.valid_until = now + tmpl.regeneration_period;
    manifests[id] = std::move(tmpl);
    relist(id);
    if (!issuer.empty()) relist(issuer);
    return stored;
}

Roa& RepositoryTree::add_roa(Roa roa)
{
    if (!certs.count(roa.issuer)) throw UnknownObject("issuer '" + roa.issuer + "' of ROA '" + roa.id + "' not in tree");
    if (roa.max_len < roa.prefix.length) throw std::invalid_argument("ROA '" + roa.id + "' max_len below prefix length");
    const ObjectId issuer = roa.issuer;
    auto& stored = roas[roa.id] = std::move(roa);
    relist(issuer);
    return stored;
}

void RepositoryTree::relist(const ObjectId& ca)
{
    auto mit = manifests.find(ca);
    if (mit == manifests.end()) return;
    auto& listed = mit->second.listed;
    listed.clear();
    for (const auto& child : cert(ca).children) listed[child] = cert(child).hash();
    for (const auto& [id, r] : roas) {
        if (r.issuer == ca) listed[id] = r.hash();
    }
}

bool RepositoryTree::maintain(const std::string& domain, SimTime now)
{
    bool renewed = false;
    for (auto& [ca, m] : manifests) {
        if (cert(ca).domain != domain) continue;
        Manifest next = maintain_manifest(m, now);
        if (next.valid_until != m.valid_until) {
            m = std::move(next);
            relist(ca);
            renewed = true;
        }
    }
    return renewed;
}

Snapshot RepositoryTree::snapshot(const std::string& domain) const
{
    Snapshot s;
    s.domain = domain;
    for (const auto& [id, c] : certs) {
        if (c.domain != domain) continue;
        s.manifests.push_back(manifest_of(id));
        for (const auto& child : c.children) s.certs.push_back(cert(child));
        for (const auto& [rid, r] : roas) {
            if (r.issuer == id) s.roas.push_back(r);
        }
    }
    return s;
}

std::vector<std::string> RepositoryTree::domains() const
{
    std::set<std::string> out;
    for (const auto& [id, c] : certs) out.insert(c.domain);
    return {out.begin(), out.end()};
}

void RepositoryTree::graft(const ObjectId& parent, const RepositoryTree& fragment, const std::vector<ObjectId>& roots)
{
    Certificate& p = certs.at(parent);
    for (const auto& [id, c] : fragment.certs) {
        if (certs.count(id)) throw std::invalid_argument("graft collides on certificate id '" + id + "'");
    }
    for (const auto& [id, c] : fragment.certs) certs[id] = c;
    for (const auto& root : roots) {
        certs[root].issuer = parent;
        p.children.push_back(root);
    }
    for (const auto& [id, m] : fragment.manifests) manifests[id] = m;
    for (const auto& [id, r] : fragment.roas) roas[id] = r;
    for (const auto& [d, a] : fragment.domain_map) domain_map[d] = a;
    for (const auto& root : roots) relist(root);
    relist(parent);
}

std::size_t RepositoryTree::depth_of(const ObjectId& id) const
{
    std::size_t d = 0;
    const Certificate* c = &cert(id);
    while (!c->issuer.empty()) {
        c = &cert(c->issuer);
        if (++d > certs.size()) throw std::invalid_argument("certificate cycle through '" + id + "'");
    }
    return d;
}

void RepositoryTree::check() const
{
    if (!certs.count(tal)) throw std::invalid_argument("trust anchor '" + tal + "' missing");
    std::set<ObjectId> seen;
    std::deque<ObjectId> queue{tal};
    while (!queue.empty()) {
        const ObjectId id = queue.front();
        queue.pop_front();
        if (!seen.insert(id).second) throw std::invalid_argument("certificate '" + id + "' reached twice");
        const Certificate& c = cert(id);
        if (!(c.not_before < c.not_after)) throw std::invalid_argument("certificate '" + id + "' has empty validity");
        if (c.resources.prefixes.empty()) throw std::invalid_argument("certificate '" + id + "' holds no prefixes");
        if (!domain_map.count(c.domain)) throw std::invalid_argument("domain '" + c.domain + "' has no host");
        const Manifest& m = manifest_of(id);
        if (!(m.valid_from < m.valid_until)) throw std::invalid_argument("manifest of '" + id + "' has empty validity");
        for (const auto& child : c.children) {
            const Certificate& k = cert(child);
            if (k.issuer != id) throw std::invalid_argument("certificate '" + child + "' names wrong issuer");
            if (!k.resources.within(c.resources)) {
                throw std::invalid_argument("certificate '" + child + "' exceeds issuer resources");
            }
            queue.push_back(child);
        }
    }
    if (seen.size() != certs.size()) throw std::invalid_argument("certificates unreachable from trust anchor");
    for (const auto& [id, r] : roas) {
        if (!certs.count(r.issuer)) throw std::invalid_argument("ROA '" + id + "' has unknown issuer");
        if (r.max_len < r.prefix.length) throw std::invalid_argument("ROA '" + id + "' max_len below prefix length");
    }
}

ChainFragment build_delegation_chain(std::size_t depth, std::size_t width, const std::string& base_domain,
                                     const Resource& hold, Address host, SimTime now, Duration validity)
{
    if (depth == 0 || width == 0) throw std::invalid_argument("chain depth and width must be at least 1");
    ChainFragment out;
    std::vector<ObjectId> level;
    for (std::size_t d = 1; d <= depth; ++d) {
        std::vector<ObjectId> next;
        const std::size_t parents = d == 1 ? 1 : level.size();
        for (std::size_t p = 0; p < parents; ++p) {
            for (std::size_t w = 0; w < width; ++w) {
                const std::size_t index = p * width + w;
                Certificate c;
                c.id = base_domain + "#" + std::to_string(d) + "." + std::to_string(index);
                c.issuer = d == 1 ? ObjectId{} : level[p];
                c.resources = hold;
                c.domain = "l" + std::to_string(d) + "n" + std::to_string(index) + "." + base_domain;
                c.not_before = now;
                c.not_after = now + validity;
                out.tree.domain_map[c.domain] = host;
                Manifest m;
                m.covers = c.id;
                m.valid_from = now;
                m.valid_until = now + validity;
                out.tree.manifests[c.id] = m;
                if (d == 1) out.roots.push_back(c.id);
                else out.tree.certs[c.issuer].children.push_back(c.id);
                next.push_back(c.id);
                out.tree.certs[c.id] = std::move(c);
            }
        }
        level = std::move(next);
    }
    for (const auto& [id, c] : out.tree.certs) out.tree.relist(id);
    return out;
}

Manifest maintain_manifest(const Manifest& m, SimTime now)
{
    if (m.valid_until - now < m.regeneration_threshold) {
        Manifest renewed = m;
        renewed.valid_from = now;
        renewed.valid_until = now + m.regeneration_period;
        ++renewed.number;
        return renewed;
    }
    return m;
}

ObjectState object_state(const RepositoryTree& tree, const ObjectId& id, SimTime now)
{
    if (auto it = tree.roas.find(id); it != tree.roas.end()) {
        const Roa& r = it->second;
        if (r.valid_until < now) return ObjectState::expired;
        return tree.manifest_of(r.issuer).valid_until < now ? ObjectState::stale : ObjectState::current;
    }
    if (auto it = tree.certs.find(id); it != tree.certs.end()) {
        const Certificate& c = it->second;
        if (c.not_after < now) return ObjectState::expired;
        if (c.issuer.empty()) return ObjectState::current;
        return tree.manifest_of(c.issuer).valid_until < now ? ObjectState::stale : ObjectState::current;
    }
    throw UnknownObject("unknown object '" + id + "'");
}

} // namespace rpkisim::rpki
