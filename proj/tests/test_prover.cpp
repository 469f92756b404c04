#include <doctest.h>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "agentgate/clock.hpp"
#include "agentgate/corpus.hpp"
#include "agentgate/genkit.hpp"
#include "agentgate/prover.hpp"
#include "agentgate/server.hpp"

using namespace agentgate;
using nlohmann::json;

namespace {

const std::filesystem::path kFixtures{AGENTGATE_FIXTURE_DIR};

std::vector<std::uint8_t> test_key() {
    return std::vector<std::uint8_t>(32, 0x42);
}

struct Bench {
    corpus::Corpus corpus;
    ManualClock clock;
    server::VerifierService service;
    prover::InprocTarget target;

    explicit Bench(const std::string& fixture)
        : corpus(corpus::load_corpus(kFixtures / fixture, {}, nullptr)),
          service(corpus, {}, test_key(), clock, 7),
          target(service, &clock) {}
};

}  // namespace

TEST_CASE("profile factories declare honest capability vectors") {
    auto c = corpus::load_corpus(kFixtures / "five_entity.json", {}, nullptr);

    auto oracle = prover::ProverProfile::oracle(c);
    CHECK(oracle.capabilities.is_agent());
    CHECK_NOTHROW(oracle.validate());

    auto random = prover::ProverProfile::random_entity(c);
    CHECK_FALSE(random.capabilities.reasoning);
    CHECK_FALSE(random.capabilities.state);
    CHECK_NOTHROW(random.validate());

    auto human = prover::ProverProfile::delayed_human(c, {});
    CHECK(human.capabilities == prover::CapabilityVector{});
    CHECK_NOTHROW(human.validate());

    // A mislabeled profile is rejected outright.
    auto dishonest = prover::ProverProfile::oracle(c);
    dishonest.capabilities.reasoning = false;
    CHECK_THROWS_AS(dishonest.validate(), std::invalid_argument);

    auto inflated = prover::ProverProfile::random_entity(c);
    inflated.capabilities.reasoning = true;
    CHECK_THROWS_AS(inflated.validate(), std::invalid_argument);

    auto no_client = prover::ProverProfile::llm_backed(nullptr);
    CHECK_THROWS_AS(no_client.validate(), std::invalid_argument);
}

TEST_CASE("keyword guess scores question words near entity mentions") {
    const std::string narrative =
        "Alpha was logged near the vault twice during the audit. Bravo "
        "remained in the observation room for the full shift. Keys to the "
        "vault went missing while Alpha was present.";
    const std::vector<std::string> entities{"Bravo", "Alpha", "Charlie"};

    CHECK(prover::keyword_guess(narrative, "Who was near the vault?",
                                entities) == "Alpha");
    // Nobody mentioned: falls back to list order deterministically.
    CHECK(prover::keyword_guess("Nothing relevant here.", "Who?", entities) ==
          "Bravo");

    CHECK_THROWS_AS(prover::keyword_guess(narrative, "Who?", {}, 12),
                    std::invalid_argument);
    CHECK_THROWS_AS(prover::keyword_guess(narrative, "Who?", entities, 0),
                    std::invalid_argument);
}

TEST_CASE("keyword guess picks the replicated enzyme from the fixture") {
    auto c = corpus::load_corpus(kFixtures / "five_entity.json", {}, nullptr);
    const auto& part = c.sets[0][0].parts[0];
    const auto& qa = part.qa_pairs[0];
    CHECK(prover::keyword_guess(part.narrative, qa.question,
                                part.entity_annotations) == "PFK1");
}

TEST_CASE("oracle prover completes a session instantly") {
    Bench bench("biochem_case.json");
    auto profile = prover::ProverProfile::oracle(bench.corpus);
    Rng rng(5);

    auto outcome = prover::run_session(profile, bench.target, rng);
    CHECK(outcome.verdict.accept);
    CHECK(outcome.rounds_completed == 3);
    REQUIRE(outcome.transcript.size() == 3);
    REQUIRE(outcome.pass_token.has_value());
    CHECK(bench.service.verify_token(*outcome.pass_token));
    for (double t : outcome.round_t_eff_s()) {
        CHECK(t == doctest::Approx(0.0));
    }
}

TEST_CASE("per-round delay rides the budget boundary") {
    SUBCASE("under tau: still accepted") {
        Bench bench("biochem_case.json");
        auto profile = prover::ProverProfile::oracle(bench.corpus);
        profile.per_round_delay_s = 14.0;
        Rng rng(5);
        auto outcome = prover::run_session(profile, bench.target, rng);
        CHECK(outcome.verdict.accept);
        for (double t : outcome.round_t_eff_s()) {
            CHECK(t == doctest::Approx(14.0));
        }
    }
    SUBCASE("over tau: first round already fails") {
        Bench bench("biochem_case.json");
        auto profile = prover::ProverProfile::oracle(bench.corpus);
        profile.per_round_delay_s = 15.5;
        Rng rng(5);
        auto outcome = prover::run_session(profile, bench.target, rng);
        CHECK_FALSE(outcome.verdict.accept);
        CHECK(outcome.verdict.reason == session::RejectReason::timeout);
        CHECK(outcome.rounds_completed == 0);
        CHECK(outcome.transcript.size() == 1);
    }
}

TEST_CASE("delayed human is shut out by timing alone") {
    Bench bench("biochem_case.json");
    // Perfect answers, human-scale delays.
    auto profile = prover::ProverProfile::delayed_human(bench.corpus, {});
    Rng rng(17);

    auto result = prover::run_trials(profile, bench.target, 5, rng);
    CHECK(result.advantage == 0.0);
    for (const auto& outcome : result.outcomes) {
        REQUIRE(outcome.verdict.reason.has_value());
        // Round delay always exceeds tau; very slow draws blow the session
        // budget first, which takes precedence.
        CHECK((outcome.verdict.reason == session::RejectReason::timeout ||
               outcome.verdict.reason ==
                   session::RejectReason::session_timeout));
        CHECK(outcome.transcript.size() == 1);
    }
}

TEST_CASE("random entity guessing stays near chance level") {
    Bench bench("five_entity.json");
    auto profile = prover::ProverProfile::random_entity(bench.corpus);
    Rng rng(23);

    auto result = prover::run_trials(profile, bench.target, 300, rng);
    // Chance of three uniform hits over five candidates is 1/125 = 0.008;
    // 300 sessions put a loose ceiling well under any useful advantage.
    CHECK(result.advantage < 0.05);
    for (const auto& outcome : result.outcomes) {
        if (!outcome.verdict.accept) {
            CHECK(outcome.verdict.reason ==
                  session::RejectReason::wrong_answer);
        }
    }

    // Same seed, same trial.
    Bench again("five_entity.json");
    Rng rng2(23);
    auto replayed = prover::run_trials(profile, again.target, 300, rng2);
    CHECK(replayed.advantage == result.advantage);
}

TEST_CASE("scripted keyword prover lacks the cross-round thread") {
    Bench bench("five_entity.json");
    auto profile = prover::ProverProfile::keyword_script(bench.corpus);
    Rng rng(29);

    auto outcome = prover::run_session(profile, bench.target, rng);
    // Part 1 falls to surface co-occurrence, but the follow-up parts never
    // restate the entity names, so the script has nothing to latch onto.
    CHECK_FALSE(outcome.verdict.accept);
    CHECK(outcome.verdict.reason == session::RejectReason::wrong_answer);
    CHECK(outcome.transcript.front().answer == "PFK1");
}

TEST_CASE("llm-backed prover carries accumulated context across rounds") {
    Bench bench("biochem_case.json");

    // Scripted "model": answer by reading the question out of the latest
    // message and looking it up, like an agent with real comprehension.
    auto client = std::make_shared<StubCompletionClient>(
        [&](const std::vector<ChatMessage>& ms) {
            // system + (narrative,answer) per prior round + current ask
            CHECK(ms.front().role == "system");
            CHECK(ms.size() % 2 == 0);
            const std::string& ask = ms.back().content;
            for (const auto& set_group : bench.corpus.sets) {
                for (const auto& set : set_group) {
                    for (const auto& part : set.parts) {
                        for (const auto& qa : part.qa_pairs) {
                            if (ask.find(qa.question) != std::string::npos) {
                                return " " + qa.canonical_answer + "\nbecause";
                            }
                        }
                    }
                }
            }
            return std::string("unknown");
        });

    auto profile = prover::ProverProfile::llm_backed(client);
    Rng rng(31);
    auto outcome = prover::run_session(profile, bench.target, rng);
    CHECK(outcome.verdict.accept);
    REQUIRE(outcome.transcript.size() == 3);

    // The final round's request must have carried both prior narratives and
    // the answers given — that is the persistent state the game demands.
    auto third_call_messages = std::make_shared<std::vector<ChatMessage>>();
    auto recorder = std::make_shared<StubCompletionClient>(
        [&, third_call_messages](const std::vector<ChatMessage>& ms) {
            if (ms.size() == 6) *third_call_messages = ms;
            const std::string& ask = ms.back().content;
            for (const auto& set_group : bench.corpus.sets) {
                for (const auto& set : set_group) {
                    for (const auto& part : set.parts) {
                        for (const auto& qa : part.qa_pairs) {
                            if (ask.find(qa.question) != std::string::npos) {
                                return qa.canonical_answer;
                            }
                        }
                    }
                }
            }
            return std::string("unknown");
        });
    auto profile2 = prover::ProverProfile::llm_backed(recorder);
    Rng rng2(33);
    auto outcome2 = prover::run_session(profile2, bench.target, rng2);
    REQUIRE(outcome2.verdict.accept);
    REQUIRE(third_call_messages->size() == 6);
    const auto& ms = *third_call_messages;
    CHECK(ms[1].content.find(outcome2.transcript[0].payload.narrative) !=
          std::string::npos);
    CHECK(ms[2].content == outcome2.transcript[0].answer);
    CHECK(ms[3].content.find(outcome2.transcript[1].payload.narrative) !=
          std::string::npos);
    CHECK(ms[4].content == outcome2.transcript[1].answer);
}

TEST_CASE("oracle against a mismatched corpus is a harness error") {
    Bench bench("biochem_case.json");
    auto other = corpus::load_corpus(kFixtures / "five_entity.json", {},
                                     nullptr);
    // five_entity part 1 shares its narrative with nothing in play here —
    // the service serves biochem_case, whose part 2/3 differ.
    auto profile = prover::ProverProfile::oracle(other);
    Rng rng(37);
    // Round 1's narrative happens to exist in both fixtures, but the round-2
    // payload doesn't, so the lookup must fail loudly, not guess.
    CHECK_THROWS_AS(prover::run_session(profile, bench.target, rng),
                    prover::TargetError);
}

TEST_CASE("trial logs are one json line per session") {
    Bench bench("biochem_case.json");
    auto profile = prover::ProverProfile::oracle(bench.corpus);
    Rng rng(41);
    auto result = prover::run_trials(profile, bench.target, 4, rng);
    CHECK(result.advantage == 1.0);
    REQUIRE(result.log_lines.size() == 4);
    for (const auto& line : result.log_lines) {
        json j = json::parse(line);
        CHECK(j.at("verdict") == "accept");
        CHECK(j.at("rounds_completed") == 3);
        CHECK(j.at("t_eff_s").is_array());
        CHECK_FALSE(j.contains("reason"));
    }

    CHECK_THROWS_AS(prover::run_trials(profile, bench.target, 0, rng),
                    std::invalid_argument);
}
