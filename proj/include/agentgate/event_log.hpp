#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace agentgate {

// Append-only audit log of session state transitions. One line per event:
//     <unix_ms>\t<session_id>\t<event>\t<detail>
// Flushed per append so a crash loses at most the in-progress line. The
// format is line-parseable so a session's lifecycle can be replayed from
// the log alone.
class EventLog {
public:
    struct Entry {
        std::int64_t unix_ms = 0;
        std::string session_id;
        std::string event;
        std::string detail;
    };

    // Throws std::runtime_error if the file cannot be opened for append.
    explicit EventLog(const std::filesystem::path& file);

    void append(std::string_view session_id, std::string_view event,
                std::string_view detail = {});

    // Parses a log file back into entries. Throws std::runtime_error on a
    // malformed line (wrong field count or non-numeric timestamp).
    static std::vector<Entry> read_all(const std::filesystem::path& file);

private:
    std::mutex mu_;
    std::ofstream out_;
};

}  // namespace agentgate
