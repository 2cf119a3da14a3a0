// IPv4 addresses and prefixes.

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace rpkisim {

struct Ipv4 {
    std::uint32_t value = 0;

    constexpr auto operator<=>(const Ipv4&) const = default;

    static Ipv4 parse(const std::string& text);
    std::string str() const;
};

struct Prefix {
    Ipv4 address;
    std::uint8_t length = 0;

    constexpr auto operator<=>(const Prefix&) const = default;

    /// "10.0.0.0/22". Host bits must be zero.
    static Prefix parse(const std::string& text);
    std::string str() const;

    bool contains(Ipv4 a) const;
    /// True when `other` is equal to or more specific than this prefix.
    bool covers(const Prefix& other) const;
};

using Address = Ipv4;

} // namespace rpkisim

template <>
struct std::hash<rpkisim::Ipv4> {
    std::size_t operator()(const rpkisim::Ipv4& a) const noexcept { return std::hash<std::uint32_t>{}(a.value); }
};
