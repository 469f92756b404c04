#include "agentgate/event_log.hpp"

#include <chrono>
#include <charconv>
#include <stdexcept>

namespace agentgate {

namespace {
std::int64_t wall_unix_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

// Tabs and newlines are field/record separators; scrub them out of free-text
// fields so one event is always exactly one line with exactly four fields.
std::string sanitize(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    return out;
}
}  // namespace

EventLog::EventLog(const std::filesystem::path& file)
    : out_(file, std::ios::app) {
    if (!out_) {
        throw std::runtime_error("EventLog: cannot open " + file.string());
    }
}

void EventLog::append(std::string_view session_id, std::string_view event,
                      std::string_view detail) {
    std::lock_guard lock(mu_);
    out_ << wall_unix_ms() << '\t' << sanitize(session_id) << '\t'
         << sanitize(event) << '\t' << sanitize(detail) << '\n';
    out_.flush();
}

std::vector<EventLog::Entry> EventLog::read_all(
    const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw std::runtime_error("EventLog: cannot open " + file.string());
    }
    std::vector<Entry> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Entry e;
        std::size_t pos = 0;
        std::string fields[4];
        for (int f = 0; f < 4; ++f) {
            auto tab = line.find('\t', pos);
            if (f < 3) {
                if (tab == std::string::npos) {
                    throw std::runtime_error("EventLog: malformed line " +
                                             std::to_string(lineno));
                }
                fields[f] = line.substr(pos, tab - pos);
                pos = tab + 1;
            } else {
                fields[f] = line.substr(pos);
            }
        }
        auto [p, ec] = std::from_chars(
            fields[0].data(), fields[0].data() + fields[0].size(), e.unix_ms);
        if (ec != std::errc{} || p != fields[0].data() + fields[0].size()) {
            throw std::runtime_error("EventLog: bad timestamp on line " +
                                     std::to_string(lineno));
        }
        e.session_id = fields[1];
        e.event = fields[2];
        e.detail = fields[3];
        entries.push_back(std::move(e));
    }
    return entries;
}

}  // namespace agentgate
