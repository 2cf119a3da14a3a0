#include "rpkisim/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace rpkisim::config {

namespace {

// A YAML node together with where it came from.
class Field {
public:
    Field(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    bool is_map() const { return node_.IsMap(); }
    bool is_null() const { return !node_ || node_.IsNull(); }

    [[noreturn]] void fail(const std::string& message) const { throw ConfigError(path_, message); }

    Field at(const std::string& key) const
    {
        auto f = opt(key);
        if (!f) throw ConfigError(child_path(key), "required key missing");
        return *f;
    }

    std::optional<Field> opt(const std::string& key) const
    {
        if (!node_.IsMap()) fail("expected a mapping");
        YAML::Node child = node_[key];
        if (!child || child.IsNull()) return std::nullopt;
        return Field(child, child_path(key));
    }

    /// Rejects keys outside `known`, which catches typos early.
    void only(std::initializer_list<const char*> known) const
    {
        if (!node_.IsMap()) fail("expected a mapping");
        std::set<std::string> allowed(known.begin(), known.end());
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) throw ConfigError(child_path(key), "unknown key");
        }
    }

    std::vector<Field> items() const
    {
        if (!node_.IsSequence()) fail("expected a list");
        std::vector<Field> out;
        for (std::size_t i = 0; i < node_.size(); ++i) out.emplace_back(node_[i], path_ + "[" + std::to_string(i) + "]");
        return out;
    }

    std::string str() const
    {
        if (!node_.IsScalar()) fail("expected a scalar");
        return node_.Scalar();
    }

    template <class T>
    T number() const
    {
        try {
            return node_.as<T>();
        } catch (const YAML::Exception&) {
            fail("expected a number, got '" + (node_.IsScalar() ? node_.Scalar() : std::string("non-scalar")) + "'");
        }
    }

    bool boolean() const
    {
        try {
            return node_.as<bool>();
        } catch (const YAML::Exception&) {
            fail("expected true or false");
        }
    }

    template <class F>
    auto convert(F f) const -> decltype(f(std::string{}))
    {
        const std::string s = str();
        try {
            return f(s);
        } catch (const std::exception& e) {
            fail(e.what());
        }
    }

    Duration duration() const { return convert([](const std::string& s) { return parse_duration(s); }); }
    Address address() const { return convert([](const std::string& s) { return Ipv4::parse(s); }); }
    Prefix prefix() const { return convert([](const std::string& s) { return Prefix::parse(s); }); }

private:
    std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    YAML::Node node_;
    std::string path_;
};

template <class T, class F>
std::vector<T> list_of(const std::optional<Field>& f, F each)
{
    std::vector<T> out;
    if (!f) return out;
    for (const auto& item : f->items()) out.push_back(each(item));
    return out;
}

std::optional<Duration> opt_duration(const Field& f, const std::string& key)
{
    auto v = f.opt(key);
    return v ? std::optional<Duration>(v->duration()) : std::nullopt;
}

std::optional<double> opt_double(const Field& f, const std::string& key)
{
    auto v = f.opt(key);
    return v ? std::optional<double>(v->number<double>()) : std::nullopt;
}

RateLimits read_limits(const Field& f)
{
    RateLimits l;
    l.slip_limit = opt_double(f, "slip_limit");
    l.drop_limit = opt_double(f, "drop_limit");
    if (auto w = f.opt("bucket_window")) l.burst_seconds = w->number<double>();
    for (const char* key : {"slip_limit", "drop_limit"}) {
        if (auto v = f.opt(key); v && v->number<double>() <= 0) v->fail("must be positive");
    }
    return l;
}

CaConfig read_ca(const Field& f, bool is_anchor)
{
    f.only({"id", "issuer", "domain", "asn", "prefixes", "transport"});
    CaConfig c;
    c.id = f.at("id").str();
    if (!is_anchor) c.issuer = f.at("issuer").str();
    c.domain = f.at("domain").str();
    if (auto a = f.opt("asn")) c.asn = a->number<rpki::Asn>();
    c.prefixes = list_of<Prefix>(f.opt("prefixes"), [](const Field& p) { return p.prefix(); });
    if (c.prefixes.empty()) f.at("prefixes").fail("at least one prefix required");
    if (auto t = f.opt("transport")) c.transport = t->convert([](const std::string& s) { return rpki::parse_transport(s); });
    return c;
}

RoaConfig read_roa(const Field& f)
{
    f.only({"id", "issuer", "prefix", "asn", "max_len"});
    RoaConfig r;
    r.id = f.at("id").str();
    r.issuer = f.at("issuer").str();
    r.prefix = f.at("prefix").prefix();
    r.asn = f.at("asn").number<rpki::Asn>();
    r.max_len = r.prefix.length;
    if (auto m = f.opt("max_len")) {
        const int v = m->number<int>();
        if (v < r.prefix.length || v > 32) m->fail("must lie between the prefix length and 32");
        r.max_len = static_cast<std::uint8_t>(v);
    }
    return r;
}

pp::Behavior read_behavior(const Field& f)
{
    f.only({"kind", "hold", "bandwidth", "inflate_to"});
    const std::string kind = f.at("kind").str();
    if (kind == "normal") return pp::Behavior::normal();
    if (kind == "stall_idle") return pp::Behavior::stall_idle(f.at("hold").duration());
    if (kind == "throttle") {
        return pp::Behavior::throttle(f.at("bandwidth").number<double>(), f.at("inflate_to").number<std::uint64_t>());
    }
    f.at("kind").fail("unknown behaviour '" + kind + "'");
}

PpNodeConfig read_pp(const Field& f)
{
    f.only({"name", "address", "domains", "syn_rate_limit", "syn_bucket_window", "bandwidth", "behavior",
            "maintenance_interval"});
    PpNodeConfig p;
    p.name = f.at("name").str();
    p.address = f.at("address").address();
    p.domains = list_of<std::string>(f.opt("domains"), [](const Field& d) { return d.str(); });
    p.syn_rate_limit = opt_double(f, "syn_rate_limit");
    if (auto w = f.opt("syn_bucket_window")) p.syn_bucket_window = w->number<double>();
    if (auto b = f.opt("bandwidth")) p.bandwidth = b->number<double>();
    if (auto b = f.opt("behavior")) p.behavior = read_behavior(*b);
    if (auto m = f.opt("maintenance_interval")) p.maintenance_interval = m->duration();
    return p;
}

NameserverNodeConfig read_ns(const Field& f)
{
    f.only({"name", "address", "zones", "default_ttl", "records", "slip_limit", "drop_limit", "bucket_window"});
    NameserverNodeConfig n;
    n.name = f.at("name").str();
    n.address = f.at("address").address();
    n.zones = list_of<std::string>(f.opt("zones"), [](const Field& z) { return z.str(); });
    if (auto t = f.opt("default_ttl")) n.default_ttl = t->duration();
    n.records = list_of<dns::ZoneRecord>(f.opt("records"), [&](const Field& r) {
        r.only({"name", "value", "ttl"});
        dns::ZoneRecord z{r.at("name").str(), r.at("value").address(), n.default_ttl};
        if (auto t = r.opt("ttl")) z.ttl = t->duration();
        return z;
    });
    n.limits = read_limits(f);
    return n;
}

ResolverNodeConfig read_resolver(const Field& f)
{
    f.only({"name", "address", "kind", "client_limits", "cache_max_ttl", "tcp_fallback", "blocking"});
    ResolverNodeConfig r;
    r.name = f.at("name").str();
    r.address = f.at("address").address();
    if (auto k = f.opt("kind")) r.kind = k->convert([](const std::string& s) { return dns::parse_resolver_kind(s); });
    if (auto l = f.opt("client_limits")) {
        l->only({"slip_limit", "drop_limit", "bucket_window"});
        r.client_limits = read_limits(*l);
    }
    r.cache_max_ttl = opt_duration(f, "cache_max_ttl");
    if (auto t = f.opt("tcp_fallback")) r.tcp_fallback = t->boolean();
    if (auto b = f.opt("blocking")) r.blocking = b->boolean();
    return r;
}

RpNodeConfig read_rp(const Field& f)
{
    f.only({"name", "address", "implementation", "resolver", "first_refresh", "t_sleep", "timeout_idle",
            "timeout_throttled", "max_depth", "mitigations"});
    RpNodeConfig r;
    r.name = f.at("name").str();
    r.address = f.at("address").address();
    if (auto i = f.opt("implementation")) r.implementation = i->convert([](const std::string& s) { return rp::parse_implementation(s); });
    r.resolver = f.at("resolver").str();
    if (auto t = f.opt("first_refresh")) r.first_refresh = t->duration();
    r.t_sleep = opt_duration(f, "t_sleep");
    r.timeout_idle = opt_duration(f, "timeout_idle");
    if (auto t = f.opt("timeout_throttled")) {
        r.timeout_throttled = t->str() == "infinite" ? Duration::infinite() : t->duration();
    }
    if (auto d = f.opt("max_depth")) {
        if (d->str() == "unbounded") r.unbounded_depth = true;
        else r.max_depth = d->number<std::size_t>();
    }
    if (auto m = f.opt("mitigations")) {
        m->only({"randomize_sleep", "enforce_depth_cap", "strict_invalid_on_missing"});
        r.mitigations.randomize_sleep = opt_duration(*m, "randomize_sleep");
        if (auto c = m->opt("enforce_depth_cap")) r.mitigations.enforce_depth_cap = c->number<std::size_t>();
        if (auto s = m->opt("strict_invalid_on_missing")) r.mitigations.strict_invalid_on_missing = s->boolean();
    }
    return r;
}

TopologyConfig read_topology(const Field& f)
{
    f.only({"ases", "links", "route_server"});
    TopologyConfig t;
    t.ases = list_of<AsConfig>(f.opt("ases"), [](const Field& a) {
        a.only({"asn", "prefixes", "rov"});
        AsConfig c;
        c.asn = a.at("asn").number<rpki::Asn>();
        c.prefixes = list_of<Prefix>(a.opt("prefixes"), [](const Field& p) { return p.prefix(); });
        if (auto r = a.opt("rov")) c.rov = r->str();
        return c;
    });
    t.links = list_of<LinkConfig>(f.opt("links"), [](const Field& l) {
        l.only({"a", "b", "relation"});
        LinkConfig c{l.at("a").number<rpki::Asn>(), l.at("b").number<rpki::Asn>(), "peer"};
        if (auto r = l.opt("relation")) {
            c.relation = r->str();
            r->convert([](const std::string& s) { return bgp::parse_relation(s); });
        }
        return c;
    });
    if (auto rs = f.opt("route_server")) {
        rs->only({"asn", "members", "rp"});
        RouteServerNodeConfig c;
        c.asn = rs->at("asn").number<rpki::Asn>();
        c.members = list_of<rpki::Asn>(rs->opt("members"), [](const Field& m) { return m.number<rpki::Asn>(); });
        c.rp = rs->at("rp").str();
        t.route_server = c;
    }
    return t;
}

AttackerConfig read_attacker(const Field& f)
{
    f.only({"name", "address", "asn", "target", "target_node", "spoof", "rate", "p_target", "r_limit", "t_attack",
            "retries", "window", "window_offset", "start", "expiring_threshold", "max_duration", "warmup_observations",
            "victim_rp", "victim_roa", "observer_ns", "observe_domain", "attacker_ca", "attacker_pp", "stalloris",
            "hijack"});
    AttackerConfig a;
    if (auto n = f.opt("name")) a.name = n->str();
    a.address = f.at("address").address();
    if (auto n = f.opt("asn")) a.asn = n->number<rpki::Asn>();
    a.target = f.at("target").convert([](const std::string& s) { return attack::parse_target_kind(s); });
    a.target_node = f.at("target_node").str();
    if (auto s = f.opt("spoof")) a.spoof = s->str();
    a.rate = opt_double(f, "rate");
    a.p_target = opt_double(f, "p_target");
    a.r_limit = opt_double(f, "r_limit");
    if (auto p = f.opt("p_target"); p && !(*a.p_target > 0 && *a.p_target < 1)) p->fail("must lie strictly between 0 and 1");
    if (auto r = f.opt("rate"); r && *a.rate < 0) r->fail("must be non-negative");
    if (!a.rate && !a.p_target) f.fail("attacker needs either 'rate' or 'p_target'");
    if (auto t = f.opt("t_attack")) a.t_attack = t->duration();
    if (auto r = f.opt("retries")) a.retries = r->number<unsigned>();
    if (auto w = f.opt("window")) a.window = w->duration();
    if (a.window <= Duration{}) f.at("window").fail("must be positive");
    if (auto w = f.opt("window_offset")) a.window_offset = w->duration();
    if (auto s = f.opt("start")) a.start = s->convert([](const std::string& v) { return attack::parse_start_condition(v); });
    if (auto t = f.opt("expiring_threshold")) a.expiring_threshold = t->duration();
    if (auto t = f.opt("max_duration")) a.max_duration = t->duration();
    if (auto w = f.opt("warmup_observations")) a.warmup_observations = w->number<std::size_t>();
    a.victim_rp = f.at("victim_rp").str();
    a.victim_roa = f.at("victim_roa").str();
    if (auto v = f.opt("observer_ns")) a.observer_ns = v->str();
    if (auto v = f.opt("observe_domain")) a.observe_domain = v->str();
    if (auto v = f.opt("attacker_ca")) a.attacker_ca = v->str();
    if (auto v = f.opt("attacker_pp")) a.attacker_pp = v->str();
    if (auto s = f.opt("stalloris")) {
        s->only({"depth", "split_at_depth", "hold", "base_domain"});
        attack::StallorisPlan p;
        p.depth = s->at("depth").number<std::size_t>();
        if (p.depth == 0) s->at("depth").fail("must be at least 1");
        if (auto d = s->opt("split_at_depth")) p.split_at_depth = d->number<std::size_t>();
        p.per_level_hold = opt_duration(*s, "hold");
        p.base_domain = s->at("base_domain").str();
        a.stalloris = p;
    }
    if (auto h = f.opt("hijack")) {
        h->only({"prefix", "observer"});
        a.hijack = HijackConfig{h->at("prefix").prefix(), h->at("observer").number<rpki::Asn>()};
    }
    return a;
}

ScenarioConfig read_scenario(const Field& root)
{
    root.only({"name", "seed", "duration", "latency", "rpki", "publication_points", "nameservers", "resolvers",
               "relying_parties", "topology", "attacker"});
    ScenarioConfig c;
    if (auto n = root.opt("name")) c.name = n->str();
    if (auto s = root.opt("seed")) c.seed = s->number<std::uint64_t>();
    if (auto d = root.opt("duration")) c.duration = d->duration();
    if (auto l = root.opt("latency")) {
        l->only({"kind", "value", "low", "high"});
        const std::string kind = l->at("kind").str();
        if (kind == "fixed") {
            c.latency.kind = LatencyConfig::Kind::fixed;
            if (auto v = l->opt("value")) c.latency.value = v->duration();
        } else if (kind == "uniform") {
            c.latency.kind = LatencyConfig::Kind::uniform;
            c.latency.low = l->at("low").duration();
            c.latency.high = l->at("high").duration();
            if (c.latency.high < c.latency.low) l->at("high").fail("must not be below low");
        } else {
            l->at("kind").fail("unknown latency model '" + kind + "'");
        }
    }
    const Field rp = root.at("rpki");
    rp.only({"trust_anchor", "cas", "roas", "manifest", "object_validity"});
    c.rpki.trust_anchor = read_ca(rp.at("trust_anchor"), true);
    c.rpki.cas = list_of<CaConfig>(rp.opt("cas"), [](const Field& f) { return read_ca(f, false); });
    c.rpki.roas = list_of<RoaConfig>(rp.opt("roas"), read_roa);
    if (auto m = rp.opt("manifest")) {
        m->only({"regeneration_threshold", "regeneration_period"});
        if (auto t = m->opt("regeneration_threshold")) c.rpki.manifest_regeneration_threshold = t->duration();
        if (auto t = m->opt("regeneration_period")) c.rpki.manifest_regeneration_period = t->duration();
    }
    if (auto v = rp.opt("object_validity")) c.rpki.object_validity = v->duration();
    c.publication_points = list_of<PpNodeConfig>(root.opt("publication_points"), read_pp);
    c.nameservers = list_of<NameserverNodeConfig>(root.opt("nameservers"), read_ns);
    c.resolvers = list_of<ResolverNodeConfig>(root.opt("resolvers"), read_resolver);
    c.relying_parties = list_of<RpNodeConfig>(root.opt("relying_parties"), read_rp);
    if (auto t = root.opt("topology")) c.topology = read_topology(*t);
    if (auto a = root.opt("attacker")) c.attacker = read_attacker(*a);
    c.validate();
    return c;
}

} // namespace

dns::ResolverProfile ResolverNodeConfig::profile() const
{
    auto p = dns::ResolverProfile::defaults(kind);
    if (client_limits) p.client_limits = *client_limits;
    if (cache_max_ttl) p.cache_max_ttl = *cache_max_ttl;
    if (tcp_fallback) p.tcp_fallback = *tcp_fallback;
    if (blocking && !*blocking) p.blocked_state.reset();
    return p;
}

rp::RelyingPartyProfile RpNodeConfig::profile() const
{
    auto p = rp::RelyingPartyProfile::defaults(implementation);
    if (t_sleep) p.t_sleep = *t_sleep;
    if (timeout_idle) p.per_pp_timeout_idle = *timeout_idle;
    if (timeout_throttled) p.per_pp_timeout_throttled = *timeout_throttled;
    if (max_depth) p.max_depth = *max_depth;
    if (unbounded_depth) p.max_depth.reset();
    p.mitigations = mitigations;
    return p;
}

void ScenarioConfig::validate() const
{
    std::set<std::string> names;
    std::set<Address> addresses;
    auto node = [&](const std::string& path, const std::string& name, Address a) {
        if (!names.insert(name).second) throw ConfigError(path + ".name", "duplicate node name '" + name + "'");
        if (!addresses.insert(a).second) throw ConfigError(path + ".address", "address " + a.str() + " already in use");
    };
    for (std::size_t i = 0; i < publication_points.size(); ++i) {
        node("publication_points[" + std::to_string(i) + "]", publication_points[i].name, publication_points[i].address);
    }
    for (std::size_t i = 0; i < nameservers.size(); ++i) {
        node("nameservers[" + std::to_string(i) + "]", nameservers[i].name, nameservers[i].address);
    }
    for (std::size_t i = 0; i < resolvers.size(); ++i) node("resolvers[" + std::to_string(i) + "]", resolvers[i].name, resolvers[i].address);
    for (std::size_t i = 0; i < relying_parties.size(); ++i) {
        const auto& r = relying_parties[i];
        const std::string path = "relying_parties[" + std::to_string(i) + "]";
        node(path, r.name, r.address);
        const bool known = std::any_of(resolvers.begin(), resolvers.end(), [&](const auto& x) { return x.name == r.resolver; });
        if (!known) throw ConfigError(path + ".resolver", "no resolver named '" + r.resolver + "'");
        try {
            r.profile().validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(path, e.what());
        }
    }

    std::set<std::string> cas{rpki.trust_anchor.id};
    std::set<std::string> domains{rpki.trust_anchor.domain};
    for (std::size_t i = 0; i < rpki.cas.size(); ++i) {
        const auto& ca = rpki.cas[i];
        const std::string path = "rpki.cas[" + std::to_string(i) + "]";
        if (!cas.count(ca.issuer)) throw ConfigError(path + ".issuer", "issuer '" + ca.issuer + "' not declared before");
        if (!cas.insert(ca.id).second) throw ConfigError(path + ".id", "duplicate CA id '" + ca.id + "'");
        domains.insert(ca.domain);
    }
    for (std::size_t i = 0; i < rpki.roas.size(); ++i) {
        if (!cas.count(rpki.roas[i].issuer)) {
            throw ConfigError("rpki.roas[" + std::to_string(i) + "].issuer", "unknown CA '" + rpki.roas[i].issuer + "'");
        }
    }
    for (const auto& d : domains) {
        const bool hosted = std::any_of(publication_points.begin(), publication_points.end(), [&](const auto& p) {
            return std::find(p.domains.begin(), p.domains.end(), d) != p.domains.end();
        });
        if (!hosted) throw ConfigError("publication_points", "no publication point hosts '" + d + "'");
    }

    std::set<rpki::Asn> ases;
    for (std::size_t i = 0; i < topology.ases.size(); ++i) {
        const auto& a = topology.ases[i];
        const std::string path = "topology.ases[" + std::to_string(i) + "]";
        if (!ases.insert(a.asn).second) throw ConfigError(path + ".asn", "duplicate AS" + std::to_string(a.asn));
        if (a.rov && !names.count(*a.rov)) throw ConfigError(path + ".rov", "no relying party named '" + *a.rov + "'");
    }
    for (std::size_t i = 0; i < topology.links.size(); ++i) {
        const auto& l = topology.links[i];
        if (!ases.count(l.a) || !ases.count(l.b)) {
            throw ConfigError("topology.links[" + std::to_string(i) + "]", "link references an undeclared AS");
        }
    }
    if (topology.route_server) {
        for (auto m : topology.route_server->members) {
            if (!ases.count(m)) throw ConfigError("topology.route_server.members", "undeclared AS" + std::to_string(m));
        }
        if (!names.count(topology.route_server->rp)) {
            throw ConfigError("topology.route_server.rp", "no relying party named '" + topology.route_server->rp + "'");
        }
    }

    if (attacker) {
        const auto& a = *attacker;
        if (!names.count(a.target_node)) throw ConfigError("attacker.target_node", "no node named '" + a.target_node + "'");
        if (!a.spoof.empty() && !names.count(a.spoof)) throw ConfigError("attacker.spoof", "no node named '" + a.spoof + "'");
        const bool rp_known = std::any_of(relying_parties.begin(), relying_parties.end(), [&](const auto& r) { return r.name == a.victim_rp; });
        if (!rp_known) throw ConfigError("attacker.victim_rp", "no relying party named '" + a.victim_rp + "'");
        const bool roa_known = std::any_of(rpki.roas.begin(), rpki.roas.end(), [&](const auto& r) { return r.id == a.victim_roa; });
        if (!roa_known) throw ConfigError("attacker.victim_roa", "no ROA with id '" + a.victim_roa + "'");
        if (!a.observer_ns.empty() && !names.count(a.observer_ns)) throw ConfigError("attacker.observer_ns", "no node named '" + a.observer_ns + "'");
        if (!a.attacker_pp.empty() && !names.count(a.attacker_pp)) throw ConfigError("attacker.attacker_pp", "no node named '" + a.attacker_pp + "'");
        if (!a.attacker_ca.empty() && !cas.count(a.attacker_ca)) throw ConfigError("attacker.attacker_ca", "unknown CA '" + a.attacker_ca + "'");
        if (a.stalloris && (a.attacker_ca.empty() || a.attacker_pp.empty())) {
            throw ConfigError("attacker.stalloris", "needs attacker_ca and attacker_pp");
        }
        if (addresses.count(a.address)) throw ConfigError("attacker.address", "address " + a.address.str() + " already in use");
        if (a.hijack && !ases.count(a.hijack->observer)) throw ConfigError("attacker.hijack.observer", "undeclared AS");
        if (a.hijack && a.asn == 0) throw ConfigError("attacker.asn", "required when a hijack is configured");
    }
}

ScenarioConfig parse_scenario(const std::string& yaml_text)
{
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("<document>", e.what());
    }
    if (!root || !root.IsMap()) throw ConfigError("<document>", "expected a mapping at top level");
    return read_scenario(Field(root, ""));
}

ScenarioConfig load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

// Writing.

namespace {

void emit_limits(YAML::Emitter& out, const RateLimits& l)
{
    if (l.slip_limit) out << YAML::Key << "slip_limit" << YAML::Value << *l.slip_limit;
    if (l.drop_limit) out << YAML::Key << "drop_limit" << YAML::Value << *l.drop_limit;
    out << YAML::Key << "bucket_window" << YAML::Value << l.burst_seconds;
}

void emit_ca(YAML::Emitter& out, const CaConfig& c)
{
    out << YAML::BeginMap << YAML::Key << "id" << YAML::Value << c.id;
    if (!c.issuer.empty()) out << YAML::Key << "issuer" << YAML::Value << c.issuer;
    out << YAML::Key << "domain" << YAML::Value << c.domain << YAML::Key << "asn" << YAML::Value << c.asn;
    out << YAML::Key << "prefixes" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& p : c.prefixes) out << p.str();
    out << YAML::EndSeq << YAML::Key << "transport" << YAML::Value << rpki::to_string(c.transport) << YAML::EndMap;
}

std::string dur(Duration d) { return d.is_infinite() ? "infinite" : format_duration(d); }

} // namespace

std::string to_yaml(const ScenarioConfig& c)
{
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << c.name;
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    out << YAML::Key << "duration" << YAML::Value << dur(c.duration);
    out << YAML::Key << "latency" << YAML::Value << YAML::BeginMap;
    if (c.latency.kind == LatencyConfig::Kind::fixed) {
        out << YAML::Key << "kind" << YAML::Value << "fixed" << YAML::Key << "value" << YAML::Value << dur(c.latency.value);
    } else {
        out << YAML::Key << "kind" << YAML::Value << "uniform" << YAML::Key << "low" << YAML::Value << dur(c.latency.low)
            << YAML::Key << "high" << YAML::Value << dur(c.latency.high);
    }
    out << YAML::EndMap;

    out << YAML::Key << "rpki" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "trust_anchor" << YAML::Value;
    emit_ca(out, c.rpki.trust_anchor);
    out << YAML::Key << "cas" << YAML::Value << YAML::BeginSeq;
    for (const auto& ca : c.rpki.cas) emit_ca(out, ca);
    out << YAML::EndSeq << YAML::Key << "roas" << YAML::Value << YAML::BeginSeq;
    for (const auto& r : c.rpki.roas) {
        out << YAML::BeginMap << YAML::Key << "id" << YAML::Value << r.id << YAML::Key << "issuer" << YAML::Value << r.issuer
            << YAML::Key << "prefix" << YAML::Value << r.prefix.str() << YAML::Key << "asn" << YAML::Value << r.asn
            << YAML::Key << "max_len" << YAML::Value << static_cast<int>(r.max_len) << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "manifest" << YAML::Value << YAML::BeginMap << YAML::Key << "regeneration_threshold" << YAML::Value
        << dur(c.rpki.manifest_regeneration_threshold) << YAML::Key << "regeneration_period" << YAML::Value
        << dur(c.rpki.manifest_regeneration_period) << YAML::EndMap;
    out << YAML::Key << "object_validity" << YAML::Value << dur(c.rpki.object_validity);
    out << YAML::EndMap;

    out << YAML::Key << "publication_points" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : c.publication_points) {
        out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << p.name << YAML::Key << "address" << YAML::Value
            << p.address.str();
        out << YAML::Key << "domains" << YAML::Value << YAML::Flow << p.domains;
        if (p.syn_rate_limit) out << YAML::Key << "syn_rate_limit" << YAML::Value << *p.syn_rate_limit;
        out << YAML::Key << "syn_bucket_window" << YAML::Value << p.syn_bucket_window;
        out << YAML::Key << "bandwidth" << YAML::Value << p.bandwidth;
        out << YAML::Key << "behavior" << YAML::Value << YAML::BeginMap << YAML::Key << "kind" << YAML::Value
            << pp::to_string(p.behavior.kind);
        if (p.behavior.kind == pp::Behavior::Kind::stall_idle) out << YAML::Key << "hold" << YAML::Value << dur(p.behavior.hold);
        if (p.behavior.kind == pp::Behavior::Kind::throttle) {
            out << YAML::Key << "bandwidth" << YAML::Value << p.behavior.bandwidth << YAML::Key << "inflate_to" << YAML::Value
                << p.behavior.inflate_to;
        }
        out << YAML::EndMap;
        out << YAML::Key << "maintenance_interval" << YAML::Value << dur(p.maintenance_interval) << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "nameservers" << YAML::Value << YAML::BeginSeq;
    for (const auto& n : c.nameservers) {
        out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << n.name << YAML::Key << "address" << YAML::Value
            << n.address.str() << YAML::Key << "zones" << YAML::Value << YAML::Flow << n.zones << YAML::Key << "default_ttl"
            << YAML::Value << dur(n.default_ttl);
        out << YAML::Key << "records" << YAML::Value << YAML::BeginSeq;
        for (const auto& r : n.records) {
            out << YAML::Flow << YAML::BeginMap << YAML::Key << "name" << YAML::Value << r.name << YAML::Key << "value"
                << YAML::Value << r.value.str() << YAML::Key << "ttl" << YAML::Value << dur(r.ttl) << YAML::EndMap;
        }
        out << YAML::EndSeq;
        emit_limits(out, n.limits);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "resolvers" << YAML::Value << YAML::BeginSeq;
    for (const auto& r : c.resolvers) {
        out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << r.name << YAML::Key << "address" << YAML::Value
            << r.address.str() << YAML::Key << "kind" << YAML::Value << dns::to_string(r.kind);
        if (r.client_limits) {
            out << YAML::Key << "client_limits" << YAML::Value << YAML::BeginMap;
            emit_limits(out, *r.client_limits);
            out << YAML::EndMap;
        }
        if (r.cache_max_ttl) out << YAML::Key << "cache_max_ttl" << YAML::Value << dur(*r.cache_max_ttl);
        if (r.tcp_fallback) out << YAML::Key << "tcp_fallback" << YAML::Value << *r.tcp_fallback;
        if (r.blocking) out << YAML::Key << "blocking" << YAML::Value << *r.blocking;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "relying_parties" << YAML::Value << YAML::BeginSeq;
    for (const auto& r : c.relying_parties) {
        out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << r.name << YAML::Key << "address" << YAML::Value
            << r.address.str() << YAML::Key << "implementation" << YAML::Value << rp::to_string(r.implementation)
            << YAML::Key << "resolver" << YAML::Value << r.resolver << YAML::Key << "first_refresh" << YAML::Value
            << dur(r.first_refresh);
        if (r.t_sleep) out << YAML::Key << "t_sleep" << YAML::Value << dur(*r.t_sleep);
        if (r.timeout_idle) out << YAML::Key << "timeout_idle" << YAML::Value << dur(*r.timeout_idle);
        if (r.timeout_throttled) out << YAML::Key << "timeout_throttled" << YAML::Value << dur(*r.timeout_throttled);
        if (r.unbounded_depth) out << YAML::Key << "max_depth" << YAML::Value << "unbounded";
        else if (r.max_depth) out << YAML::Key << "max_depth" << YAML::Value << *r.max_depth;
        const auto& m = r.mitigations;
        out << YAML::Key << "mitigations" << YAML::Value << YAML::BeginMap;
        if (m.randomize_sleep) out << YAML::Key << "randomize_sleep" << YAML::Value << dur(*m.randomize_sleep);
        if (m.enforce_depth_cap) out << YAML::Key << "enforce_depth_cap" << YAML::Value << *m.enforce_depth_cap;
        out << YAML::Key << "strict_invalid_on_missing" << YAML::Value << m.strict_invalid_on_missing << YAML::EndMap;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "topology" << YAML::Value << YAML::BeginMap << YAML::Key << "ases" << YAML::Value << YAML::BeginSeq;
    for (const auto& a : c.topology.ases) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "asn" << YAML::Value << a.asn << YAML::Key << "prefixes" << YAML::Value
            << YAML::BeginSeq;
        for (const auto& p : a.prefixes) out << p.str();
        out << YAML::EndSeq;
        if (a.rov) out << YAML::Key << "rov" << YAML::Value << *a.rov;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::Key << "links" << YAML::Value << YAML::BeginSeq;
    for (const auto& l : c.topology.links) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "a" << YAML::Value << l.a << YAML::Key << "b" << YAML::Value << l.b
            << YAML::Key << "relation" << YAML::Value << l.relation << YAML::EndMap;
    }
    out << YAML::EndSeq;
    if (c.topology.route_server) {
        const auto& rs = *c.topology.route_server;
        out << YAML::Key << "route_server" << YAML::Value << YAML::BeginMap << YAML::Key << "asn" << YAML::Value << rs.asn
            << YAML::Key << "members" << YAML::Value << YAML::Flow << rs.members << YAML::Key << "rp" << YAML::Value << rs.rp
            << YAML::EndMap;
    }
    out << YAML::EndMap;

    if (c.attacker) {
        const auto& a = *c.attacker;
        out << YAML::Key << "attacker" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << a.name << YAML::Key << "address" << YAML::Value << a.address.str()
            << YAML::Key << "asn" << YAML::Value << a.asn << YAML::Key << "target" << YAML::Value << attack::to_string(a.target)
            << YAML::Key << "target_node" << YAML::Value << a.target_node;
        if (!a.spoof.empty()) out << YAML::Key << "spoof" << YAML::Value << a.spoof;
        if (a.rate) out << YAML::Key << "rate" << YAML::Value << *a.rate;
        if (a.p_target) out << YAML::Key << "p_target" << YAML::Value << *a.p_target;
        if (a.r_limit) out << YAML::Key << "r_limit" << YAML::Value << *a.r_limit;
        out << YAML::Key << "t_attack" << YAML::Value << dur(a.t_attack);
        if (a.retries) out << YAML::Key << "retries" << YAML::Value << *a.retries;
        out << YAML::Key << "window" << YAML::Value << dur(a.window) << YAML::Key << "window_offset" << YAML::Value
            << dur(a.window_offset) << YAML::Key << "start" << YAML::Value << attack::to_string(a.start) << YAML::Key
            << "expiring_threshold" << YAML::Value << dur(a.expiring_threshold) << YAML::Key << "max_duration" << YAML::Value
            << dur(a.max_duration) << YAML::Key << "warmup_observations" << YAML::Value << a.warmup_observations << YAML::Key
            << "victim_rp" << YAML::Value << a.victim_rp << YAML::Key << "victim_roa" << YAML::Value << a.victim_roa;
        if (!a.observer_ns.empty()) out << YAML::Key << "observer_ns" << YAML::Value << a.observer_ns;
        if (!a.observe_domain.empty()) out << YAML::Key << "observe_domain" << YAML::Value << a.observe_domain;
        if (!a.attacker_ca.empty()) out << YAML::Key << "attacker_ca" << YAML::Value << a.attacker_ca;
        if (!a.attacker_pp.empty()) out << YAML::Key << "attacker_pp" << YAML::Value << a.attacker_pp;
        if (a.stalloris) {
            const auto& s = *a.stalloris;
            out << YAML::Key << "stalloris" << YAML::Value << YAML::BeginMap << YAML::Key << "depth" << YAML::Value << s.depth;
            if (s.split_at_depth) out << YAML::Key << "split_at_depth" << YAML::Value << *s.split_at_depth;
            if (s.per_level_hold) out << YAML::Key << "hold" << YAML::Value << dur(*s.per_level_hold);
            out << YAML::Key << "base_domain" << YAML::Value << s.base_domain << YAML::EndMap;
        }
        if (a.hijack) {
            out << YAML::Key << "hijack" << YAML::Value << YAML::BeginMap << YAML::Key << "prefix" << YAML::Value
                << a.hijack->prefix.str() << YAML::Key << "observer" << YAML::Value << a.hijack->observer << YAML::EndMap;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

} // namespace rpkisim::config
