// Closed-form attack cost model and its tabulation.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rpkisim/time.hpp"

namespace rpkisim::analysis {

struct ScenarioParams {
    std::string label;
    Duration t_attack;
    Duration t_sleep;
    unsigned n_retries = 1;
    double p_target = 0.5;
    Duration window = Duration::seconds(30);

    void validate() const;
};

std::uint64_t n_attempts(Duration t_attack, Duration t_sleep, unsigned n_retries);

/// Probability that one victim attempt is served.
double p_connectonce(double r_limit, double r_attacker);

double p_success(double r_limit, double r_attacker, std::uint64_t n_attempts);

double overwhelming_factor(std::uint64_t n_attempts, double p_target);

struct PacketVolume {
    std::uint64_t r_attacker = 0;
    std::uint64_t total_per_update = 0;
};

/// Rate from the rounded factor, total over the prediction window.
PacketVolume packet_volume(double o, double r_limit, Duration window);

/// Attacker rate needed for p_target at full precision.
double required_rate(double r_limit, std::uint64_t n_attempts, double p_target);

struct AnalysisRow {
    ScenarioParams params;
    std::uint64_t n_attempts = 0;
    double o = 0;
};

std::vector<ScenarioParams> builtin_scenarios();
const std::vector<double>& builtin_rate_limits();

AnalysisRow analyse(const ScenarioParams& p);

struct Table4Row {
    std::string scenario;
    std::uint64_t n_attempts = 0;
    double o = 0;
    std::uint64_t reference_n_attempts = 0;
    std::uint64_t reference_o = 0;
    std::string flag;
};

struct Table5Row {
    std::string scenario;
    std::uint64_t o = 0;
    double r_limit = 0;
    PacketVolume computed;
    PacketVolume reference;
    std::string flag;
};

std::vector<Table4Row> table4();
std::vector<Table5Row> table5();
std::string table4_csv();
std::string table5_csv();

struct Interval {
    double low = 0;
    double high = 0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

} // namespace rpkisim::analysis
