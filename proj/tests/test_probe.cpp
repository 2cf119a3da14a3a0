#include <catch_amalgamated.hpp>

#include "rpkisim/dns.hpp"
#include "rpkisim/publication_point.hpp"

using namespace rpkisim;
using Catch::Approx;

namespace {

const double measured_limits[] = {3, 60, 1288, 10, 4667};

} // namespace

TEST_CASE("DNS probe recovers a drop limit")
{
    for (double limit : measured_limits) {
        dns::NameserverConfig ns;
        ns.limits.drop_limit = limit;
        const auto r = dns::probe_rate_limit(ns, dns::default_probe_rates());
        INFO("limit " << limit);
        REQUIRE(r.drop_limit);
        CHECK(*r.drop_limit == Approx(limit).epsilon(0.10));
    }
}

TEST_CASE("DNS probe recovers a slip limit and sees no drop")
{
    for (double limit : measured_limits) {
        dns::NameserverConfig ns;
        ns.limits.slip_limit = limit;
        const auto r = dns::probe_rate_limit(ns, dns::default_probe_rates());
        INFO("limit " << limit);
        REQUIRE(r.slip_limit);
        CHECK(*r.slip_limit == Approx(limit).epsilon(0.10));
        CHECK_FALSE(r.drop_limit);
    }
}

TEST_CASE("SYN probe recovers the publication point limit")
{
    for (double limit : measured_limits) {
        pp::PpConfig pc;
        pc.domains = {"pp.example"};
        pc.syn_rate_limit = limit;
        const auto r = pp::probe_syn_limit(pc, dns::default_probe_rates());
        INFO("limit " << limit);
        REQUIRE(r.limit);
        CHECK(*r.limit == Approx(limit).epsilon(0.10));
    }
}

TEST_CASE("unlimited servers report no limit")
{
    const auto r = dns::probe_rate_limit(dns::NameserverConfig{}, dns::default_probe_rates());
    CHECK_FALSE(r.drop_limit);
    CHECK_FALSE(r.slip_limit);
    pp::PpConfig pc;
    pc.domains = {"pp.example"};
    CHECK_FALSE(pp::probe_syn_limit(pc, dns::default_probe_rates()).limit);
}
