// Fixed-point simulated time.

#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>

namespace rpkisim {

/// Signed span of simulated time, stored as integer microseconds.
class Duration {
public:
    constexpr Duration() = default;

    static constexpr Duration micros(std::int64_t us) { return Duration(us); }
    static constexpr Duration millis(std::int64_t ms) { return Duration(ms * 1000); }
    static Duration seconds(double s) { return Duration(static_cast<std::int64_t>(std::llround(s * 1e6))); }
    static Duration minutes(double m) { return seconds(m * 60.0); }
    static Duration hours(double h) { return seconds(h * 3600.0); }
    static Duration days(double d) { return seconds(d * 86400.0); }
    static constexpr Duration infinite() { return Duration(std::numeric_limits<std::int64_t>::max() / 4); }

    constexpr std::int64_t count_us() const { return us_; }
    double to_seconds() const { return static_cast<double>(us_) / 1e6; }
    double to_hours() const { return to_seconds() / 3600.0; }
    constexpr bool is_infinite() const { return us_ >= infinite().us_; }

    constexpr auto operator<=>(const Duration&) const = default;
    constexpr Duration operator+(Duration o) const { return Duration(us_ + o.us_); }
    constexpr Duration operator-(Duration o) const { return Duration(us_ - o.us_); }
    constexpr Duration operator-() const { return Duration(-us_); }
    Duration operator*(double k) const { return Duration(static_cast<std::int64_t>(std::llround(us_ * k))); }
    Duration operator/(double k) const { return Duration(static_cast<std::int64_t>(std::llround(us_ / k))); }
    constexpr Duration& operator+=(Duration o) { us_ += o.us_; return *this; }
    constexpr Duration& operator-=(Duration o) { us_ -= o.us_; return *this; }

private:
    constexpr explicit Duration(std::int64_t us) : us_(us) {}
    std::int64_t us_ = 0;
};

/// Absolute simulated time since simulation start.
class SimTime {
public:
    constexpr SimTime() = default;

    static constexpr SimTime zero() { return SimTime(); }
    static constexpr SimTime from_us(std::int64_t us) { return SimTime(us); }
    static SimTime from_seconds(double s) { return SimTime(Duration::seconds(s).count_us()); }
    static constexpr SimTime max() { return SimTime(Duration::infinite().count_us()); }

    constexpr std::int64_t count_us() const { return us_; }
    double to_seconds() const { return static_cast<double>(us_) / 1e6; }

    constexpr auto operator<=>(const SimTime&) const = default;
    constexpr SimTime operator+(Duration d) const { return SimTime(us_ + d.count_us()); }
    constexpr SimTime operator-(Duration d) const { return SimTime(us_ - d.count_us()); }
    constexpr Duration operator-(SimTime o) const { return Duration::micros(us_ - o.us_); }
    constexpr SimTime& operator+=(Duration d) { us_ += d.count_us(); return *this; }

private:
    constexpr explicit SimTime(std::int64_t us) : us_(us) {}
    std::int64_t us_ = 0;
};

/// Seconds with six decimals, e.g. "625.000120". Exact for any stored value.
std::string format_seconds(std::int64_t us);
inline std::string format_seconds(SimTime t) { return format_seconds(t.count_us()); }
inline std::string format_seconds(Duration d) { return format_seconds(d.count_us()); }

/// Parses "300s", "10ms", "6h", "2d", "1.5m", "250us" or a bare number of seconds.
/// Throws std::invalid_argument on malformed input.
Duration parse_duration(const std::string& text);

/// Shortest of the unit forms accepted by parse_duration that round-trips exactly.
std::string format_duration(Duration d);

} // namespace rpkisim
