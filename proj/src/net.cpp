#include "rpkisim/net.hpp"

#include <cstdio>
#include <stdexcept>

namespace rpkisim {

namespace {

std::uint32_t mask_for(int length)
{
    return length == 0 ? 0u : ~std::uint32_t{0} << (32 - length);
}

} // namespace

Ipv4 Ipv4::parse(const std::string& text)
{
    unsigned a, b, c, d;
    char tail;
    if (std::sscanf(text.c_str(), "%u.%u.%u.%u%c", &a, &b, &c, &d, &tail) != 4 || a > 255 || b > 255 || c > 255 ||
        d > 255) {
        throw std::invalid_argument("not an IPv4 address: '" + text + "'");
    }
    return Ipv4{(a << 24) | (b << 16) | (c << 8) | d};
}

std::string Ipv4::str() const
{
    return std::to_string(value >> 24) + "." + std::to_string((value >> 16) & 0xff) + "." +
           std::to_string((value >> 8) & 0xff) + "." + std::to_string(value & 0xff);
}

Prefix Prefix::parse(const std::string& text)
{
    const auto slash = text.find('/');
    if (slash == std::string::npos) {
        throw std::invalid_argument("prefix needs a length: '" + text + "'");
    }
    Prefix p;
    p.address = Ipv4::parse(text.substr(0, slash));
    const std::string len = text.substr(slash + 1);
    std::size_t used = 0;
    int length = -1;
    try {
        length = std::stoi(len, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != len.size() || length < 0 || length > 32) {
        throw std::invalid_argument("bad prefix length in '" + text + "'");
    }
    p.length = static_cast<std::uint8_t>(length);
    if ((p.address.value & ~mask_for(length)) != 0) {
        throw std::invalid_argument("host bits set in prefix '" + text + "'");
    }
    return p;
}

std::string Prefix::str() const
{
    return address.str() + "/" + std::to_string(length);
}

bool Prefix::contains(Ipv4 a) const
{
    return (a.value & mask_for(length)) == address.value;
}

bool Prefix::covers(const Prefix& other) const
{
    return other.length >= length && contains(other.address);
}

} // namespace rpkisim
