#pragma once

#include <string>
#include <string_view>

namespace agentgate {

// ASCII whitespace trim (space, \t, \n, \r, \f, \v) from both ends.
std::string_view trim(std::string_view s);

// Canonical answer form: trim, then Unicode NFC, then full case folding.
// Total over arbitrary byte strings; invalid UTF-8 sequences are replaced
// with U+FFFD rather than rejected, so a malformed submission simply fails
// to match instead of erroring.
std::string normalize_answer(std::string_view text);

// Number of Unicode code points in a UTF-8 string (invalid bytes count 1).
std::size_t codepoint_count(std::string_view utf8);

}  // namespace agentgate
