#include <doctest.h>

#include <string>

#include "agentgate/normalize.hpp"

using namespace agentgate;

TEST_CASE("trim strips ascii whitespace from both ends only") {
    CHECK(trim("  PFK1 \t\n") == "PFK1");
    CHECK(trim("PFK1") == "PFK1");
    CHECK(trim("") == "");
    CHECK(trim(" \t\r\n\f\v ") == "");
    CHECK(trim("a b") == "a b");  // interior whitespace survives
}

TEST_CASE("normalize_answer case-folds") {
    CHECK(normalize_answer("PFK1") == "pfk1");
    CHECK(normalize_answer("Pfk1") == "pfk1");
    CHECK(normalize_answer(" PFK1 ") == "pfk1");
    CHECK(normalize_answer("pfk1") == "pfk1");
}

TEST_CASE("normalize_answer applies unicode NFC before folding") {
    // "é" composed (U+00E9) vs decomposed (e + U+0301) must collide.
    std::string composed = "caf\xc3\xa9";
    std::string decomposed = "cafe\xcc\x81";
    CHECK(normalize_answer(composed) == normalize_answer(decomposed));

    // Full case folding, not just tolower: ß folds to ss.
    CHECK(normalize_answer("STRA\xc3\x9f" "E") == normalize_answer("strasse"));
}

TEST_CASE("normalize_answer is total on malformed utf-8") {
    // Lone continuation byte and a truncated sequence; must not throw and
    // must be idempotent.
    std::string bad1 = "\x80/abc";
    std::string bad2 = "ab\xc3";
    CHECK_NOTHROW(normalize_answer(bad1));
    CHECK_NOTHROW(normalize_answer(bad2));
    CHECK(normalize_answer(bad1) == normalize_answer(normalize_answer(bad1)));
    CHECK(normalize_answer(bad2) == normalize_answer(normalize_answer(bad2)));
}

TEST_CASE("normalize_answer is idempotent on regular text") {
    for (std::string s : {"PFK1", "  Amber Tier ", "caf\xc3\xa9", "67%", "QX-9"}) {
        std::string once = normalize_answer(s);
        CHECK(normalize_answer(once) == once);
    }
}

TEST_CASE("codepoint_count counts codepoints, not bytes") {
    CHECK(codepoint_count("") == 0);
    CHECK(codepoint_count("abc") == 3);
    CHECK(codepoint_count("caf\xc3\xa9") == 4);          // é is 2 bytes
    CHECK(codepoint_count("\xe2\x82\xac") == 1);         // € is 3 bytes
    CHECK(codepoint_count("\xf0\x9f\x99\x82") == 1);     // emoji, 4 bytes
}
