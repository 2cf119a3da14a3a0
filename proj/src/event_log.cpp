#include "rpkisim/event_log.hpp"

#include <ostream>

namespace rpkisim {

std::string EventLog::format(SimTime t, std::string_view node, std::string_view kind, const nlohmann::json& detail)
{
    std::string line = "{\"time\":";
    line += format_seconds(t);
    line += ",\"node\":";
    line += nlohmann::json(std::string(node)).dump();
    line += ",\"event_kind\":";
    line += nlohmann::json(std::string(kind)).dump();
    line += ",\"detail\":";
    line += detail.is_null() ? std::string("{}") : detail.dump();
    line += "}";
    return line;
}

void EventLog::record(SimTime t, std::string_view node, std::string_view kind, const nlohmann::json& detail)
{
    if (mode_ == Mode::off) return;
    ++written_;
    if (mode_ == Mode::memory) {
        lines_.push_back(format(t, node, kind, detail));
    } else {
        *out_ << format(t, node, kind, detail) << '\n';
    }
}

std::string EventLog::text() const
{
    std::string all;
    for (const auto& l : lines_) {
        all += l;
        all += '\n';
    }
    return all;
}

} // namespace rpkisim
