#include "agentgate/normalize.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <stdexcept>

namespace agentgate {

std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\n\r\f\v";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::string normalize_answer(std::string_view text) {
    std::string_view trimmed = trim(text);
    if (trimmed.empty()) return {};

    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status) || nfc == nullptr) {
        throw std::runtime_error("normalize_answer: NFC instance unavailable");
    }

    icu::UnicodeString u = icu::UnicodeString::fromUTF8(
        icu::StringPiece(trimmed.data(), static_cast<int>(trimmed.size())));

    status = U_ZERO_ERROR;
    icu::UnicodeString composed = nfc->normalize(u, status);
    if (U_FAILURE(status)) {
        throw std::runtime_error("normalize_answer: NFC normalization failed");
    }

    composed.foldCase();  // full case folding, default options

    std::string out;
    composed.toUTF8String(out);
    return out;
}

std::size_t codepoint_count(std::string_view utf8) {
    std::size_t n = 0;
    for (unsigned char c : utf8) {
        if ((c & 0xc0) != 0x80) ++n;  // count non-continuation bytes
    }
    return n;
}

}  // namespace agentgate
