// Line-delimited structured event records: {time, node, event_kind, detail}.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include "rpkisim/time.hpp"

namespace rpkisim {

class EventLog {
public:
    enum class Mode { off, memory, stream };

    EventLog() = default;

    void capture_in_memory() { mode_ = Mode::memory; }
    void write_to(std::ostream& out) { mode_ = Mode::stream; out_ = &out; }
    void disable() { mode_ = Mode::off; }

    bool enabled() const { return mode_ != Mode::off; }

    void record(SimTime t, std::string_view node, std::string_view kind, const nlohmann::json& detail);

    const std::vector<std::string>& lines() const { return lines_; }
    std::uint64_t records_written() const { return written_; }

    /// Concatenation of captured lines, each newline-terminated.
    std::string text() const;

    static std::string format(SimTime t, std::string_view node, std::string_view kind, const nlohmann::json& detail);

private:
    Mode mode_ = Mode::off;
    std::ostream* out_ = nullptr;
    std::vector<std::string> lines_;
    std::uint64_t written_ = 0;
};

} // namespace rpkisim
