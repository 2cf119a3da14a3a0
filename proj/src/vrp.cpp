#include "rpkisim/vrp.hpp"

#include <algorithm>

namespace rpkisim {

bool VrpSet::covers(const Prefix& p) const
{
    return std::any_of(entries.begin(), entries.end(), [&](const Vrp& v) { return v.prefix.covers(p); });
}

} // namespace rpkisim
