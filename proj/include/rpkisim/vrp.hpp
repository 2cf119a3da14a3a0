// Validated ROA payloads as exported to routers.

#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <set>

#include "rpkisim/net.hpp"
#include "rpkisim/rpki.hpp"

namespace rpkisim {

struct Vrp {
    Prefix prefix;
    std::uint8_t max_len = 0;
    rpki::Asn asn = 0;

    auto operator<=>(const Vrp&) const = default;
};

/// Immutable once published; routers hold shared pointers to a version.
struct VrpSet {
    std::set<Vrp> entries;
    std::uint64_t version = 0;

    bool covers(const Prefix& p) const;
};

using VrpSnapshot = std::shared_ptr<const VrpSet>;

} // namespace rpkisim
