// A small routed world whose relying-party assignment is known by
// construction, driven through the attribution procedure.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rpkisim/attacker.hpp"
#include "rpkisim/config.hpp"
#include "rpkisim/simulation.hpp"

namespace rpkisim::victim_id {

struct WorldOptions {
    std::uint64_t seed = 1;
    std::size_t relying_parties = 5;
    /// Index of the relying party the target AS filters with; none means no ROV.
    std::optional<std::size_t> target_rp;
    Duration warmup = Duration::hours(1);
};

/// Scenario: probe CA with two prefixes under the adversary's PP, a transit
/// AS without ROV, the target AS and one bystander AS per other RP.
config::ScenarioConfig world_scenario(const WorldOptions& options);

class SimulatedWorld : public attack::VictimIdEnvironment {
public:
    explicit SimulatedWorld(const WorldOptions& options);

    void serve_inverse_to(Address candidate) override;
    void wait(Duration d) override;
    bool reachable(Address from, Address to) override;
    bool path_free_of_rov(Address from, Address to) override;

    /// Fresh state primed with the candidates and probe addresses of this world.
    attack::VictimIdState initial_state() const;
    Address target_address() const;
    std::vector<Address> rp_addresses() const;
    sim::Simulation& simulation() { return *sim_; }

private:
    std::vector<rpki::Asn> transit_between(Address from, Address to) const;

    config::ScenarioConfig config_;
    std::unique_ptr<sim::Simulation> sim_;
    std::optional<Address> inverted_for_;
};

} // namespace rpkisim::victim_id
