// Builds a runnable world from a scenario and drives one run of it.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rpkisim/attacker.hpp"
#include "rpkisim/bgp.hpp"
#include "rpkisim/config.hpp"
#include "rpkisim/dns.hpp"
#include "rpkisim/engine.hpp"
#include "rpkisim/publication_point.hpp"
#include "rpkisim/relying_party.hpp"

namespace rpkisim::sim {

struct RunSummary {
    std::string scenario;
    std::uint64_t seed = 0;
    bool attack_configured = false;
    bool attack_started = false;
    bool downgrade_achieved = false;
    std::optional<SimTime> attack_start;
    std::optional<SimTime> t_unknown;
    std::optional<Duration> time_to_unknown;
    std::optional<bgp::HijackOutcome> hijack_outcome;
    std::optional<bool> victim_reachable;
    double r_attacker = 0;
    std::uint64_t packets_injected = 0;
    std::uint64_t bursts = 0;
    std::size_t refreshes_observed = 0;
    std::size_t victim_refreshes = 0;
    Duration longest_refresh;
    SimTime ended;
    std::uint64_t events = 0;

    nlohmann::json to_json() const;
};

class Simulation {
public:
    explicit Simulation(config::ScenarioConfig config);
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Runs until the configured duration, or until the downgrade has been evaluated.
    RunSummary run();

    Engine& engine() { return engine_; }
    const config::ScenarioConfig& config() const { return config_; }
    rpki::RepositoryTree& repo() { return *repo_; }
    bgp::Network& network() { return network_; }
    rp::RelyingParty& relying_party(const std::string& name) const;
    pp::PublicationPoint& publication_point(const std::string& name) const;
    dns::Nameserver& nameserver(const std::string& name) const;
    dns::Resolver& resolver(const std::string& name) const;
    Node& node(const std::string& name) const;
    const attack::DowngradeCampaign* campaign() const { return campaign_.get(); }
    double attacker_rate() const { return attacker_rate_; }
    const std::optional<attack::StallorisDeployment>& stalloris() const { return stalloris_; }

    /// Attacker rate the scenario asks for, from an explicit rate or a success target.
    static double planned_rate(const config::ScenarioConfig& c);

private:
    void build_repository();
    void build_servers();
    void build_relying_parties();
    void build_network();
    void build_attack();
    void deploy_stall();
    void evaluate_hijack();

    config::ScenarioConfig config_;
    Engine engine_;
    std::shared_ptr<rpki::RepositoryTree> repo_;
    std::vector<std::unique_ptr<Node>> owned_;
    std::map<std::string, Node*> by_name_;
    std::map<std::string, pp::PublicationPoint*> pps_;
    std::map<std::string, dns::Nameserver*> nameservers_;
    std::map<std::string, dns::Resolver*> resolvers_;
    std::map<std::string, rp::RelyingParty*> rps_;
    bgp::Network network_;
    std::unique_ptr<attack::Attacker> attacker_;
    std::unique_ptr<attack::DowngradeCampaign> campaign_;
    std::optional<attack::StallorisDeployment> stalloris_;
    double attacker_rate_ = 0;
    bool evaluated_ = false;
    bool done_ = false;
    std::optional<bgp::HijackOutcome> hijack_outcome_;
    std::optional<bool> victim_reachable_;
};

} // namespace rpkisim::sim
