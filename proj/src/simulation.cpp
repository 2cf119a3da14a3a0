#include "rpkisim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rpkisim/analysis.hpp"

namespace rpkisim::sim {

using nlohmann::json;

namespace {

LatencyModel latency_of(const config::LatencyConfig& l)
{
    if (l.kind == config::LatencyConfig::Kind::uniform) return LatencyModel::uniform(l.low, l.high);
    return LatencyModel::fixed(l.value);
}

bool under_zone(const std::string& name, const std::string& zone)
{
    if (name == zone) return true;
    return name.size() > zone.size() && name.compare(name.size() - zone.size(), zone.size(), zone) == 0 &&
           name[name.size() - zone.size() - 1] == '.';
}

Address first_host(const Prefix& p) { return Ipv4{p.address.value + (p.length < 32 ? 1u : 0u)}; }

template <class T>
T& lookup(const std::map<std::string, T*>& m, const std::string& name, const char* what)
{
    auto it = m.find(name);
    if (it == m.end()) throw std::out_of_range(std::string("no ") + what + " named '" + name + "'");
    return *it->second;
}

} // namespace

json RunSummary::to_json() const
{
    json j{{"scenario", scenario},
           {"seed", seed},
           {"attack_configured", attack_configured},
           {"attack_started", attack_started},
           {"downgrade_achieved", downgrade_achieved},
           {"r_attacker", r_attacker},
           {"packets_injected", packets_injected},
           {"bursts", bursts},
           {"refreshes_observed", refreshes_observed},
           {"victim_refreshes", victim_refreshes},
           {"longest_refresh_s", longest_refresh.to_seconds()},
           {"ended_s", ended.to_seconds()},
           {"events", events}};
    j["attack_start_s"] = attack_start ? json(attack_start->to_seconds()) : json(nullptr);
    j["t_unknown_s"] = t_unknown ? json(t_unknown->to_seconds()) : json(nullptr);
    j["time_to_unknown_s"] = time_to_unknown ? json(time_to_unknown->to_seconds()) : json(nullptr);
    j["hijack_outcome"] = hijack_outcome ? json(bgp::to_string(*hijack_outcome)) : json(nullptr);
    j["victim_reachable"] = victim_reachable ? json(*victim_reachable) : json(nullptr);
    return j;
}

Simulation::Simulation(config::ScenarioConfig config)
    : config_(std::move(config)), engine_(config_.seed, latency_of(config_.latency)), repo_(std::make_shared<rpki::RepositoryTree>())
{
    config_.validate();
    build_repository();
    build_servers();
    build_relying_parties();
    build_network();
    build_attack();
}

void Simulation::build_repository()
{
    const auto& rc = config_.rpki;
    rpki::Manifest tmpl;
    tmpl.regeneration_threshold = rc.manifest_regeneration_threshold;
    tmpl.regeneration_period = rc.manifest_regeneration_period;
    const SimTime t0 = SimTime::zero();

    auto make_cert = [&](const config::CaConfig& c) {
        rpki::Certificate cert;
        cert.id = c.id;
        cert.issuer = c.issuer;
        cert.resources = rpki::Resource{c.asn, c.prefixes};
        cert.domain = c.domain;
        cert.transport = c.transport;
        cert.not_before = t0;
        cert.not_after = t0 + rc.object_validity;
        return cert;
    };
    repo_->add_ca(make_cert(rc.trust_anchor), t0, tmpl);
    for (const auto& ca : rc.cas) repo_->add_ca(make_cert(ca), t0, tmpl);
    for (const auto& r : rc.roas) {
        repo_->add_roa(rpki::Roa{r.id, r.issuer, r.prefix, r.asn, r.max_len, t0, t0 + rc.object_validity});
    }
    for (const auto& p : config_.publication_points) {
        for (const auto& d : p.domains) repo_->domain_map[d] = p.address;
    }
    try {
        repo_->check();
    } catch (const std::invalid_argument& e) {
        throw config::ConfigError("rpki", e.what());
    }
}

void Simulation::build_servers()
{
    for (const auto& pc : config_.publication_points) {
        pp::PpConfig c;
        c.domains = pc.domains;
        c.syn_rate_limit = pc.syn_rate_limit;
        c.syn_bucket_window = pc.syn_bucket_window;
        c.default_rule = pp::ServeRule{pc.behavior, nullptr};
        c.bandwidth = pc.bandwidth;
        c.maintenance_interval = pc.maintenance_interval;
        auto node = std::make_unique<pp::PublicationPoint>(pc.name, pc.address, c, repo_);
        engine_.attach(*node);
        if (pc.maintenance_interval > Duration{}) node->start_maintenance();
        pps_[pc.name] = node.get();
        by_name_[pc.name] = node.get();
        owned_.push_back(std::move(node));
    }

    for (const auto& nc : config_.nameservers) {
        dns::NameserverConfig c;
        c.zone = nc.records;
        c.limits = nc.limits;
        for (const auto& pc : config_.publication_points) {
            for (const auto& d : pc.domains) {
                const bool ours = std::any_of(nc.zones.begin(), nc.zones.end(), [&](const auto& z) { return under_zone(d, z); });
                const bool listed = std::any_of(c.zone.begin(), c.zone.end(), [&](const auto& r) { return r.name == d; });
                if (ours && !listed) c.zone.push_back(dns::ZoneRecord{d, pc.address, nc.default_ttl});
            }
        }
        auto node = std::make_unique<dns::Nameserver>(nc.name, nc.address, c);
        engine_.attach(*node);
        nameservers_[nc.name] = node.get();
        by_name_[nc.name] = node.get();
        owned_.push_back(std::move(node));
    }

    for (const auto& rc : config_.resolvers) {
        auto node = std::make_unique<dns::Resolver>(rc.name, rc.address, rc.profile());
        for (const auto& nc : config_.nameservers) {
            for (const auto& z : nc.zones) node->add_authority(z, nc.address);
        }
        engine_.attach(*node);
        resolvers_[rc.name] = node.get();
        by_name_[rc.name] = node.get();
        owned_.push_back(std::move(node));
    }
}

void Simulation::build_relying_parties()
{
    const rpki::Certificate& ta = repo_->cert(repo_->tal);
    for (const auto& rc : config_.relying_parties) {
        const Address resolver = lookup(resolvers_, rc.resolver, "resolver").address();
        auto node = std::make_unique<rp::RelyingParty>(rc.name, rc.address, rc.profile(), ta, resolver);
        engine_.attach(*node);
        node->start(SimTime::zero() + rc.first_refresh);
        const std::string source = rc.name;
        node->subscribe([this, source](const VrpSnapshot& snap) { network_.set_vrps(source, snap); });
        rps_[rc.name] = node.get();
        by_name_[rc.name] = node.get();
        owned_.push_back(std::move(node));
    }
}

void Simulation::build_network()
{
    const auto& t = config_.topology;
    for (const auto& a : t.ases) {
        network_.add_as(a.asn, a.rov);
        for (const auto& p : a.prefixes) network_.originate(a.asn, p);
    }
    for (const auto& l : t.links) network_.add_link(l.a, l.b, bgp::parse_relation(l.relation));
    if (t.route_server) network_.set_route_server(bgp::RouteServerConfig{t.route_server->asn, t.route_server->members, t.route_server->rp});
}

double Simulation::planned_rate(const config::ScenarioConfig& c)
{
    if (!c.attacker) return 0;
    const auto& a = *c.attacker;
    if (a.rate) return *a.rate;

    auto find_rp = std::find_if(c.relying_parties.begin(), c.relying_parties.end(), [&](const auto& r) { return r.name == a.victim_rp; });
    const rp::RelyingPartyProfile victim = find_rp->profile();

    std::optional<double> limit = a.r_limit;
    unsigned retries = 0;
    switch (a.target) {
    case attack::TargetKind::ns_dns: {
        auto ns = std::find_if(c.nameservers.begin(), c.nameservers.end(), [&](const auto& n) { return n.name == a.target_node; });
        if (!limit && ns != c.nameservers.end()) limit = ns->limits.drop_limit ? ns->limits.drop_limit : ns->limits.slip_limit;
        auto res = std::find_if(c.resolvers.begin(), c.resolvers.end(), [&](const auto& r) { return r.name == find_rp->resolver; });
        retries = static_cast<unsigned>(res->profile().retry_schedule.size());
        break;
    }
    case attack::TargetKind::pp_syn: {
        auto p = std::find_if(c.publication_points.begin(), c.publication_points.end(), [&](const auto& x) { return x.name == a.target_node; });
        if (!limit && p != c.publication_points.end()) limit = p->syn_rate_limit;
        retries = static_cast<unsigned>(victim.tcp_syn_retries());
        break;
    }
    case attack::TargetKind::public_resolver: {
        auto res = std::find_if(c.resolvers.begin(), c.resolvers.end(), [&](const auto& r) { return r.name == a.target_node; });
        if (!limit && res != c.resolvers.end()) {
            const auto l = res->profile().client_limits;
            limit = l.drop_limit ? l.drop_limit : l.slip_limit;
        }
        retries = static_cast<unsigned>(dns::StubConfig{}.attempts.size());
        break;
    }
    }
    if (!limit) throw config::ConfigError("attacker.r_limit", "target has no rate limit to derive a rate from");
    if (a.retries) retries = *a.retries;
    const auto n = analysis::n_attempts(a.t_attack, victim.t_sleep, retries);
    const double o = analysis::overwhelming_factor(n, *a.p_target);
    return static_cast<double>(analysis::packet_volume(o, *limit, a.window).r_attacker);
}

void Simulation::build_attack()
{
    if (!config_.attacker) return;
    const auto& a = *config_.attacker;
    attacker_ = std::make_unique<attack::Attacker>(a.name, a.address);
    engine_.attach(*attacker_);
    attacker_rate_ = planned_rate(config_);

    rp::RelyingParty& victim = lookup(rps_, a.victim_rp, "relying party");
    const auto& victim_rc = *std::find_if(config_.relying_parties.begin(), config_.relying_parties.end(),
                                          [&](const auto& r) { return r.name == a.victim_rp; });
    const Address victim_resolver = lookup(resolvers_, victim_rc.resolver, "resolver").address();
    const auto& roa = *std::find_if(config_.rpki.roas.begin(), config_.rpki.roas.end(), [&](const auto& r) { return r.id == a.victim_roa; });

    attack::CampaignTarget target;
    target.address = node(a.target_node).address();
    switch (a.target) {
    case attack::TargetKind::ns_dns: {
        target.kind = PacketKind::dns_query;
        target.spoofed_src = a.spoof.empty() ? victim_resolver : node(a.spoof).address();
        const dns::Nameserver& ns = nameserver(a.target_node);
        target.qname = ns.config().zone.empty() ? std::string("flood.invalid") : ns.config().zone.front().name;
        const Address spoofed = target.spoofed_src;
        target.denied_so_far = [&ns, spoofed]() { return ns.refused_from(spoofed); };
        break;
    }
    case attack::TargetKind::pp_syn: {
        target.kind = PacketKind::tcp_syn;
        target.spoofed_src = a.spoof.empty() ? victim.address() : node(a.spoof).address();
        const pp::PublicationPoint& p = publication_point(a.target_node);
        const Address spoofed = target.spoofed_src;
        target.denied_so_far = [&p, spoofed]() { return p.refused_from(spoofed); };
        break;
    }
    case attack::TargetKind::public_resolver: {
        target.kind = PacketKind::dns_query;
        target.spoofed_src = a.spoof.empty() ? victim.address() : node(a.spoof).address();
        target.qname = "flood.invalid";
        const dns::Resolver& r = resolver(a.target_node);
        const Address spoofed = target.spoofed_src;
        target.denied_so_far = [&r, spoofed]() { return r.refused_from(spoofed); };
        break;
    }
    }

    attack::AttackPlan plan;
    plan.target = a.target;
    plan.r_attacker = attacker_rate_;
    plan.window = a.window;
    plan.window_offset = a.window_offset;
    plan.stalloris = a.stalloris;
    plan.start = a.start;
    plan.max_duration = a.max_duration;
    plan.warmup_observations = a.warmup_observations;
    // denied attempts hold the traversal until the client gives up
    const Duration scan = victim.profile().local_scan_time;
    auto beyond_scan = [&](Duration give_up) { return give_up > scan ? give_up - scan : Duration{}; };
    switch (a.target) {
    case attack::TargetKind::pp_syn: plan.flood_extension = victim.profile().syn_give_up; break;
    case attack::TargetKind::ns_dns: plan.flood_extension = beyond_scan(resolver(victim_rc.resolver).profile().overall_timeout); break;
    case attack::TargetKind::public_resolver: plan.flood_extension = beyond_scan(dns::StubConfig{}.give_up); break;
    }

    attack::CampaignHooks hooks;
    const rpki::ObjectId victim_ca = roa.issuer;
    hooks.manifest_remaining = [this, victim_ca]() {
        const rpki::Manifest next = rpki::maintain_manifest(repo_->manifest_of(victim_ca), engine_.now());
        return next.valid_until - engine_.now();
    };
    hooks.expiring_threshold = a.expiring_threshold;
    if (!a.attacker_pp.empty()) {
        const pp::PublicationPoint& app = publication_point(a.attacker_pp);
        const Address victim_addr = victim.address();
        hooks.victim_stalled = [&app, victim_addr]() { return app.serving(victim_addr); };
    }
    if (a.stalloris) hooks.deploy_stall = [this]() { deploy_stall(); };
    hooks.on_downgrade = [this, &victim](attack::AttackReport& report) {
        engine_.schedule(report.t_unknown + victim.profile().vrp_export_delay + Duration::millis(1), attacker_->id(), [this]() {
            evaluate_hijack();
            done_ = true;
        });
    };

    campaign_ = std::make_unique<attack::DowngradeCampaign>(engine_, *attacker_, victim, Vrp{roa.prefix, roa.max_len, roa.asn},
                                                            plan, target, hooks);
    if (a.target == attack::TargetKind::public_resolver) campaign_->set_blind(true);

    std::string observe_domain = a.observe_domain;
    if (observe_domain.empty() && !a.attacker_ca.empty()) observe_domain = repo_->cert(a.attacker_ca).domain;
    if (!a.observer_ns.empty()) {
        dns::Nameserver& ns = nameserver(a.observer_ns);
        ns.set_observer([this, observe_domain, victim_resolver](SimTime t, const std::string& qname, Address src) {
            if (src != victim_resolver) return;
            if (!observe_domain.empty() && qname != observe_domain) return;
            campaign_->observe(t);
        });
    } else if (!a.attacker_pp.empty()) {
        const Address victim_addr = victim.address();
        publication_point(a.attacker_pp).set_observer([this, victim_addr](SimTime t, Address src) {
            if (src == victim_addr) campaign_->observe(t);
        });
    }
}

void Simulation::deploy_stall()
{
    const auto& a = *config_.attacker;
    pp::PublicationPoint& host = publication_point(a.attacker_pp);
    rp::RelyingParty& victim = relying_party(a.victim_rp);
    stalloris_ = attack::deploy_stalloris(*repo_, a.attacker_ca, host.address(), *a.stalloris, victim.profile(), engine_.now());
    for (const auto& d : stalloris_->chain_domains) host.host_domain(d);
    for (const auto& nc : config_.nameservers) {
        dns::Nameserver& ns = nameserver(nc.name);
        for (const auto& d : stalloris_->chain_domains) {
            const bool ours = std::any_of(nc.zones.begin(), nc.zones.end(), [&](const auto& z) { return under_zone(d, z); });
            if (ours) ns.set_record(dns::ZoneRecord{d, host.address(), nc.default_ttl});
        }
    }
    host.set_rule(victim.address(), pp::ServeRule{stalloris_->behavior, stalloris_->victim_view});
    engine_.log().record(engine_.now(), attacker_->name(), "stall-deployed",
                         json{{"levels", a.stalloris->depth}, {"chains", stalloris_->chain_lengths.size()},
                              {"behavior", pp::to_string(stalloris_->behavior.kind)},
                              {"hold_s", stalloris_->behavior.hold.to_seconds()}});
}

void Simulation::evaluate_hijack()
{
    if (evaluated_) return;
    evaluated_ = true;
    if (!config_.attacker || !config_.attacker->hijack) return;
    const auto& a = *config_.attacker;
    for (const auto& [name, r] : rps_) network_.set_vrps(name, r->vrps());
    network_.announce_bogus(a.asn, a.hijack->prefix);
    network_.converge(&engine_.log(), engine_.now());

    const auto& roa = *std::find_if(config_.rpki.roas.begin(), config_.rpki.roas.end(), [&](const auto& r) { return r.id == a.victim_roa; });
    const bgp::Announcement adversary{a.hijack->prefix, a.asn, {a.asn}, bgp::LearnedFrom::local, bgp::local_pref_for(bgp::LearnedFrom::local), 0};
    hijack_outcome_ = network_.hijack_outcome(roa.prefix, adversary, a.hijack->observer);

    const auto& observer = *std::find_if(config_.topology.ases.begin(), config_.topology.ases.end(),
                                         [&](const auto& x) { return x.asn == a.hijack->observer; });
    if (!observer.prefixes.empty()) {
        victim_reachable_ = network_.reachability(first_host(observer.prefixes.front()), first_host(roa.prefix));
    }
    engine_.log().record(engine_.now(), attacker_->name(), "hijack-evaluation",
                         json{{"observer", a.hijack->observer}, {"prefix", a.hijack->prefix.str()},
                              {"outcome", bgp::to_string(*hijack_outcome_)},
                              {"victim_reachable", victim_reachable_ ? json(*victim_reachable_) : json(nullptr)}});
}

RunSummary Simulation::run()
{
    const SimTime limit = SimTime::zero() + config_.duration;
    engine_.run_while(limit, [this]() { return !done_ && !(campaign_ && campaign_->report().gave_up); });
    if (!evaluated_) evaluate_hijack();

    RunSummary s;
    s.scenario = config_.name;
    s.seed = config_.seed;
    s.attack_configured = campaign_ != nullptr;
    s.r_attacker = attacker_rate_;
    if (campaign_) {
        const auto& r = campaign_->report();
        s.attack_started = r.started;
        s.downgrade_achieved = r.downgraded;
        if (r.started) s.attack_start = r.attack_start;
        if (r.downgraded) {
            s.t_unknown = r.t_unknown;
            s.time_to_unknown = r.t_unknown - r.attack_start;
        }
        s.packets_injected = r.packets_sent;
        s.bursts = r.bursts.size();
        s.refreshes_observed = r.refreshes_observed;
        const auto& victim = relying_party(config_.attacker->victim_rp);
        s.victim_refreshes = victim.history().size();
        for (const auto& h : victim.history()) s.longest_refresh = std::max(s.longest_refresh, h.duration());
    }
    s.hijack_outcome = hijack_outcome_;
    s.victim_reachable = victim_reachable_;
    s.ended = engine_.now();
    s.events = engine_.events_processed();
    return s;
}

rp::RelyingParty& Simulation::relying_party(const std::string& name) const { return lookup(rps_, name, "relying party"); }
pp::PublicationPoint& Simulation::publication_point(const std::string& name) const { return lookup(pps_, name, "publication point"); }
dns::Nameserver& Simulation::nameserver(const std::string& name) const { return lookup(nameservers_, name, "nameserver"); }
dns::Resolver& Simulation::resolver(const std::string& name) const { return lookup(resolvers_, name, "resolver"); }
Node& Simulation::node(const std::string& name) const { return lookup(by_name_, name, "node"); }

} // namespace rpkisim::sim
