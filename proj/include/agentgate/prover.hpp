#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "agentgate/completion.hpp"
#include "agentgate/corpus.hpp"
#include "agentgate/rng.hpp"
#include "agentgate/server.hpp"
#include "agentgate/session.hpp"
#include "agentgate/timing.hpp"

namespace agentgate::prover {

// ⟨action, reasoning, state⟩ — what an entity can actually do within the
// round budget. The admission game is designed so only (1,1,1) passes.
struct CapabilityVector {
    bool action = false;
    bool reasoning = false;
    bool state = false;

    bool is_agent() const { return action && reasoning && state; }
    bool operator==(const CapabilityVector&) const = default;
};

// Transport or harness failure — deliberately a different channel than a
// verdict, which is a successful protocol outcome.
class TargetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- strategies -------------------------------------------------------------
// The oracle, random-entity, keyword and delayed-human strategies read test
// scaffolding (the serving corpus / per-part entity annotations) that a real
// attacker would not have; they exist to measure the protocol, not to model
// realistic access.

struct OracleStrategy {
    const corpus::Corpus* corpus = nullptr;  // answers looked up here
};

struct RandomEntityStrategy {
    const corpus::Corpus* corpus = nullptr;  // entity annotations source
};

struct KeywordScriptStrategy {
    const corpus::Corpus* corpus = nullptr;  // entity annotations source
    int window = 12;                         // co-occurrence window, tokens
};

struct DelayedHumanStrategy {
    const corpus::Corpus* corpus = nullptr;  // answers correctly, just late
    timing::HumanSimParams sim{};
};

struct LlmBackedStrategy {
    std::shared_ptr<CompletionClient> client;
};

using Strategy = std::variant<OracleStrategy, RandomEntityStrategy,
                              KeywordScriptStrategy, DelayedHumanStrategy,
                              LlmBackedStrategy>;

struct ProverProfile {
    std::string label;
    CapabilityVector capabilities;
    Strategy strategy;
    // Extra artificial latency added before every submission (on top of any
    // strategy-inherent delay).
    std::optional<double> per_round_delay_s;

    // Throws std::invalid_argument when the declared capabilities don't
    // match the strategy: oracle/llm_backed must be (1,1,1); keyword and
    // random-entity scripts have no reasoning; delayed_human is effectively
    // (0,0,0) under any realistic budget.
    void validate() const;

    static ProverProfile oracle(const corpus::Corpus& c);
    static ProverProfile random_entity(const corpus::Corpus& c);
    static ProverProfile keyword_script(const corpus::Corpus& c);
    static ProverProfile delayed_human(const corpus::Corpus& c,
                                       timing::HumanSimParams sim = {});
    static ProverProfile llm_backed(std::shared_ptr<CompletionClient> client);
};

// --- verifier targets -------------------------------------------------------

struct AnswerReply {
    std::optional<session::RoundPayload> next;
    std::optional<session::Verdict> verdict;
    std::optional<std::string> pass_token;
};

// Uniform handle over an in-process service or a remote HTTP endpoint. The
// target also owns the prover-side clock: wait() burns (or, for a manual
// clock, advances) time, now_s() reads the same timebase.
class VerifierTarget {
public:
    virtual ~VerifierTarget() = default;
    // Throws TargetError on transport failure or protocol misuse.
    virtual session::RoundPayload start(
        std::optional<std::string> domain) = 0;
    virtual AnswerReply answer(const std::string& id,
                               const std::string& text) = 0;
    virtual void wait(double seconds) = 0;
    virtual double now_s() const = 0;
};

// Drives a VerifierService directly. When the service runs on a ManualClock,
// pass it as `manual` so wait() advances simulated time instead of sleeping —
// trials with hundreds of simulated seconds finish instantly.
class InprocTarget final : public VerifierTarget {
public:
    explicit InprocTarget(server::VerifierService& service,
                          ManualClock* manual = nullptr)
        : service_(service), manual_(manual) {}

    session::RoundPayload start(std::optional<std::string> domain) override;
    AnswerReply answer(const std::string& id, const std::string& text) override;
    void wait(double seconds) override;
    double now_s() const override;

private:
    server::VerifierService& service_;
    ManualClock* manual_;
};

// Talks to a live verifier over HTTP.
class HttpTarget final : public VerifierTarget {
public:
    explicit HttpTarget(std::string base_url, std::string prefix = "/v1",
                        double timeout_s = 30.0);

    session::RoundPayload start(std::optional<std::string> domain) override;
    AnswerReply answer(const std::string& id, const std::string& text) override;
    void wait(double seconds) override;
    double now_s() const override;

private:
    std::string base_url_;
    std::string prefix_;
    double timeout_s_;
};

// --- running sessions -------------------------------------------------------

struct TranscriptEntry {
    session::RoundPayload payload;
    std::string answer;
    double t_eff_s = 0.0;  // client-side: payload receipt -> reply received
};

struct SessionOutcome {
    session::Verdict verdict;
    int rounds_completed = 0;  // rounds that passed
    std::vector<TranscriptEntry> transcript;
    std::optional<std::string> pass_token;

    std::vector<double> round_t_eff_s() const {
        std::vector<double> v;
        v.reserve(transcript.size());
        for (const auto& t : transcript) v.push_back(t.t_eff_s);
        return v;
    }
};

// Plays one full game: start, then answer rounds until a verdict. The
// client-side context (delivered narratives/questions plus recorded answers)
// accumulates across rounds for strategies that need it. Transport failures
// throw TargetError; everything else comes back as the verdict.
SessionOutcome run_session(const ProverProfile& profile, VerifierTarget& target,
                           Rng& rng);

struct TrialResult {
    double advantage = 0.0;
    std::vector<SessionOutcome> outcomes;
    // One JSON record per session: {"session", "verdict", "reason",
    // "rounds_completed", "t_eff_s"} — written by the CLI, replayed by tests.
    std::vector<std::string> log_lines;
};

// n independent sessions; session i runs on a sub-seed derived from
// (rng(), i), so a trial is reproducible from its top-level seed alone.
TrialResult run_trials(const ProverProfile& profile, VerifierTarget& target,
                       int n, Rng& rng);

// The no-NLU baseline: score each candidate entity by how many question
// content-words occur within `window` tokens of any of its mentions; best
// score wins, ties broken by earliest first mention, then list order.
// Deterministic; throws std::invalid_argument on an empty entity list.
std::string keyword_guess(std::string_view narrative, std::string_view question,
                          const std::vector<std::string>& entities,
                          int window = 12);

// One completion call carrying the accumulated context (prior rounds as
// alternating user/assistant turns) plus the current narrative+question;
// the reply's first line, stripped, is the answer.
std::string llm_answer(const std::vector<TranscriptEntry>& prior,
                       const session::RoundPayload& current,
                       CompletionClient& client);

}  // namespace agentgate::prover
