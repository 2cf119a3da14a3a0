// Shared fixtures for the test programs.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rpkisim/config.hpp"
#include "rpkisim/simulation.hpp"

namespace rpkisim::testing {

std::string scenario_path(const std::string& name);
config::ScenarioConfig load(const std::string& name);

struct RefreshTiming {
    std::size_t refreshes = 0;
    double mean_inter_start_s = 0;
    double shortest_s = 0;
    double longest_s = 0;
};

RefreshTiming refresh_timing(const std::vector<rp::RefreshReport>& history);

/// The stall scenario without a nameserver limit, against one implementation
/// at the given chain depth. The stall deploys on the first burst and the
/// next refresh walks into it.
config::ScenarioConfig stall_config(rp::Implementation impl, std::size_t depth, Duration horizon);

struct StallOutcome {
    Duration longest_refresh;
    std::size_t deepest = 0;
    bool guard_tripped = false;
};

StallOutcome measure_stall(const config::ScenarioConfig& c);

/// Plain token bucket, one packet at a time: refill, then take a token if one is whole.
class ExactBucket {
public:
    ExactBucket(double rate, double depth) : rate_(rate), depth_(depth), tokens_(depth) {}
    bool take(double t);

private:
    double rate_;
    double depth_;
    double tokens_;
    double last_ = 0;
};

} // namespace rpkisim::testing
