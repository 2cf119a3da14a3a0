#include "rpkisim/time.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace rpkisim {

std::string format_seconds(std::int64_t us)
{
    const bool negative = us < 0;
    const std::uint64_t mag = negative ? static_cast<std::uint64_t>(-us) : static_cast<std::uint64_t>(us);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s%llu.%06llu", negative ? "-" : "",
                  static_cast<unsigned long long>(mag / 1000000),
                  static_cast<unsigned long long>(mag % 1000000));
    return buf;
}

Duration parse_duration(const std::string& text)
{
    std::size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const char* begin = text.c_str() + i;
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin) {
        throw std::invalid_argument("not a duration: '" + text + "'");
    }
    std::string unit(end);
    while (!unit.empty() && std::isspace(static_cast<unsigned char>(unit.back()))) unit.pop_back();
    if (unit.empty() || unit == "s") return Duration::seconds(value);
    if (unit == "us") return Duration::micros(static_cast<std::int64_t>(std::llround(value)));
    if (unit == "ms") return Duration::seconds(value / 1000.0);
    if (unit == "m" || unit == "min") return Duration::minutes(value);
    if (unit == "h") return Duration::hours(value);
    if (unit == "d") return Duration::days(value);
    throw std::invalid_argument("unknown duration unit '" + unit + "' in '" + text + "'");
}

std::string format_duration(Duration d)
{
    if (d.is_infinite()) return "inf";
    const std::int64_t us = d.count_us();
    struct Unit { std::int64_t scale; const char* suffix; };
    static constexpr Unit units[] = {
        {86400LL * 1000000, "d"}, {3600LL * 1000000, "h"}, {60LL * 1000000, "m"},
        {1000000, "s"}, {1000, "ms"}, {1, "us"},
    };
    for (const auto& u : units) {
        if (us % u.scale == 0) return std::to_string(us / u.scale) + u.suffix;
    }
    return std::to_string(us) + "us";
}

} // namespace rpkisim
