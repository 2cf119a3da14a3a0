#include "rpkisim/victim_id.hpp"

#include <algorithm>
#include <stdexcept>

namespace rpkisim::victim_id {

namespace {

constexpr rpki::Asn adversary_asn = 64666;
constexpr rpki::Asn decoy_asn = 64999; // origin in the inverted ROA
constexpr rpki::Asn transit_asn = 64600;
constexpr rpki::Asn target_asn = 64510;

const Prefix probe_p1 = Prefix::parse("10.66.1.0/24");
const Prefix probe_p2 = Prefix::parse("10.66.2.0/24");
const Prefix target_prefix = Prefix::parse("10.50.0.0/24");

Address first_host(const Prefix& p) { return Ipv4{p.address.value + 1}; }

std::string rp_name(std::size_t i) { return "rp-" + std::to_string(i + 1); }

} // namespace

config::ScenarioConfig world_scenario(const WorldOptions& o)
{
    if (o.relying_parties == 0) throw std::invalid_argument("need at least one relying party");
    if (o.target_rp && *o.target_rp >= o.relying_parties) throw std::invalid_argument("target relying party out of range");

    config::ScenarioConfig c;
    c.name = "victim-identification";
    c.seed = o.seed;
    c.duration = Duration::days(2);

    c.rpki.trust_anchor = config::CaConfig{"ta", "", "repo.ta.example", 0, {Prefix::parse("10.0.0.0/8")}, rpki::Transport::rrdp};
    c.rpki.cas.push_back(config::CaConfig{"probe-ca", "ta", "pp.probe.example", adversary_asn, {probe_p1, probe_p2}, rpki::Transport::rrdp});
    c.rpki.roas.push_back(config::RoaConfig{"rho1", "probe-ca", probe_p1, adversary_asn, probe_p1.length});
    c.rpki.roas.push_back(config::RoaConfig{"rho2", "probe-ca", probe_p2, adversary_asn, probe_p2.length});

    config::PpNodeConfig ta_pp;
    ta_pp.name = "pp-ta";
    ta_pp.address = Ipv4::parse("192.0.2.10");
    ta_pp.domains = {"repo.ta.example"};
    config::PpNodeConfig probe_pp;
    probe_pp.name = "pp-probe";
    probe_pp.address = Ipv4::parse("203.0.113.20");
    probe_pp.domains = {"pp.probe.example"};
    c.publication_points = {ta_pp, probe_pp};

    config::NameserverNodeConfig ns_ta;
    ns_ta.name = "ns-ta";
    ns_ta.address = Ipv4::parse("192.0.2.53");
    ns_ta.zones = {"ta.example"};
    config::NameserverNodeConfig ns_probe;
    ns_probe.name = "ns-probe";
    ns_probe.address = Ipv4::parse("203.0.113.53");
    ns_probe.zones = {"probe.example"};
    c.nameservers = {ns_ta, ns_probe};

    config::ResolverNodeConfig resolver;
    resolver.name = "resolver";
    resolver.address = Ipv4::parse("198.51.100.53");
    c.resolvers = {resolver};

    // refresh periods all below the round wait
    const rp::Implementation kinds[] = {rp::Implementation::routinator, rp::Implementation::octorpki,
                                        rp::Implementation::ripe_validator};
    for (std::size_t i = 0; i < o.relying_parties; ++i) {
        config::RpNodeConfig r;
        r.name = rp_name(i);
        r.address = Ipv4{Ipv4::parse("198.51.100.11").value + static_cast<std::uint32_t>(i)};
        r.implementation = kinds[i % 3];
        r.resolver = "resolver";
        r.first_refresh = Duration::seconds(10 + 37 * static_cast<double>(i));
        c.relying_parties.push_back(r);
    }

    c.topology.ases.push_back(config::AsConfig{adversary_asn, {probe_p1, probe_p2}, std::nullopt});
    c.topology.ases.push_back(config::AsConfig{transit_asn, {Prefix::parse("10.60.0.0/24")}, std::nullopt});
    std::optional<std::string> target_rov;
    if (o.target_rp) target_rov = rp_name(*o.target_rp);
    c.topology.ases.push_back(config::AsConfig{target_asn, {target_prefix}, target_rov});
    c.topology.links.push_back(config::LinkConfig{adversary_asn, transit_asn, "provider"});
    c.topology.links.push_back(config::LinkConfig{target_asn, transit_asn, "provider"});
    // bystanders: every RP feeds someone
    rpki::Asn next = 64520;
    for (std::size_t i = 0; i < o.relying_parties; ++i) {
        if (o.target_rp && i == *o.target_rp) continue;
        const Prefix p{Ipv4{Ipv4::parse("10.70.0.0").value + static_cast<std::uint32_t>(i << 8)}, 24};
        c.topology.ases.push_back(config::AsConfig{next, {p}, rp_name(i)});
        c.topology.links.push_back(config::LinkConfig{next, transit_asn, "provider"});
        ++next;
    }
    return c;
}

SimulatedWorld::SimulatedWorld(const WorldOptions& options)
    : config_(world_scenario(options)), sim_(std::make_unique<sim::Simulation>(config_))
{
    wait(options.warmup);
}

void SimulatedWorld::serve_inverse_to(Address candidate)
{
    pp::PublicationPoint& pp = sim_->publication_point("pp-probe");
    const pp::ServeRule agreeing = pp.config().default_rule;
    auto inverse = std::make_shared<rpki::RepositoryTree>(sim_->repo());
    inverse->maintain("pp.probe.example", sim_->engine().now());
    inverse->roas.at("rho1").asn = decoy_asn;
    inverse->relist("probe-ca");
    if (inverted_for_) pp.set_rule(*inverted_for_, agreeing);
    pp.set_rule(candidate, pp::ServeRule{agreeing.behavior, std::move(inverse)});
    inverted_for_ = candidate;
    sim_->engine().log().record(sim_->engine().now(), "pp-probe", "inverse-served", nlohmann::json{{"rp", candidate.str()}});
}

void SimulatedWorld::wait(Duration d) { sim_->engine().run_until(sim_->engine().now() + d); }

bool SimulatedWorld::reachable(Address from, Address to)
{
    sim_->network().converge(&sim_->engine().log(), sim_->engine().now());
    return sim_->network().reachability(from, to);
}

std::vector<rpki::Asn> SimulatedWorld::transit_between(Address from, Address to) const
{
    const bgp::Network& net = sim_->network();
    std::vector<rpki::Asn> out;
    const auto src = net.owner_of(from);
    if (!src) return out;
    if (auto route = net.lookup(*src, to)) {
        // drop the origin; the rest sit between the two ends
        for (std::size_t i = 0; i + 1 < route->as_path.size(); ++i) {
            if (route->as_path[i] != *src) out.push_back(route->as_path[i]);
        }
    }
    return out;
}

bool SimulatedWorld::path_free_of_rov(Address from, Address to)
{
    const bgp::Network& net = sim_->network();
    auto there = transit_between(from, to);
    auto back = transit_between(to, from);
    there.insert(there.end(), back.begin(), back.end());
    return std::none_of(there.begin(), there.end(), [&](rpki::Asn a) { return net.rov_source(a).has_value(); });
}

attack::VictimIdState SimulatedWorld::initial_state() const
{
    attack::VictimIdState s;
    s.candidate_rps = rp_addresses();
    s.a1 = first_host(probe_p1);
    s.a2 = first_host(probe_p2);
    return s;
}

Address SimulatedWorld::target_address() const { return first_host(target_prefix); }

std::vector<Address> SimulatedWorld::rp_addresses() const
{
    std::vector<Address> out;
    for (const auto& r : config_.relying_parties) out.push_back(r.address);
    return out;
}

} // namespace rpkisim::victim_id
