#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "agentgate/clock.hpp"
#include "agentgate/corpus.hpp"
#include "agentgate/event_log.hpp"
#include "agentgate/rng.hpp"

namespace agentgate::session {

// Game parameters. epsilon_target/delta_target are reporting targets only —
// recorded in configs and summaries, never enforced at runtime.
struct SecurityParams {
    std::array<double, 3> tau_round_s{15.0, 15.0, 15.0};
    double alpha = 0.1;
    double t_total_s = 120.0;
    int max_answer_length = 20;
    int d_domains = 5;
    int n_sets = 4;
    int q_questions = 3;
    double epsilon_target = 0.0;
    double delta_target = 0.0;

    // Throws std::invalid_argument: every tau > 0, t_total_s >= sum of taus,
    // 0 < alpha < 1, counts >= 1, targets in [0, 1].
    void validate() const;

    static SecurityParams from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

enum class RejectReason { wrong_answer, timeout, session_timeout, replay };
std::string_view to_string(RejectReason r);

struct Verdict {
    bool accept = false;
    std::optional<RejectReason> reason;  // present iff reject

    static Verdict accepted() { return {true, std::nullopt}; }
    static Verdict rejected(RejectReason r) { return {false, r}; }
};

enum class RoundOutcome { pending, passed, failed };

struct RoundRecord {
    int round_index = 1;  // 1..3
    int qa_index = 0;
    Instant sent_at{};
    std::optional<Instant> answered_at;
    std::optional<double> t_eff_s;  // (answered - sent) - rtt, floored at 0
    RoundOutcome outcome = RoundOutcome::pending;
    std::optional<RejectReason> fail_reason;
    std::string submitted_answer;
};

enum class SessionStatus { active, accepted, rejected, expired };
std::string_view to_string(SessionStatus s);

struct SessionState {
    std::string id;  // 64 lowercase hex chars, single-use
    corpus::SessionChallenge challenge;
    double rtt_s = 0.0;
    bool rtt_recorded = false;
    int current_round = 1;
    std::vector<RoundRecord> rounds;
    Instant created_at{};
    SessionStatus status = SessionStatus::active;
    std::optional<RejectReason> reject_reason;
    // One submission at a time per session; a concurrent duplicate is turned
    // away without touching state.
    bool in_flight = false;
};

// What a prover is shown for one round. Deliberately has no field that
// could carry answer material.
struct RoundPayload {
    std::string session_id;
    int round = 1;
    std::string narrative;
    std::string question;
    int tau_ms = 0;
    int total_timeout_ms = 0;
};

enum class SubmitError { unknown_session, in_flight };

// Verdict = terminal outcome, RoundPayload = round passed with more to go,
// SubmitError = caller misuse that leaves the session untouched.
using SubmitOutcome = std::variant<RoundPayload, Verdict, SubmitError>;

struct StatusSnapshot {
    SessionStatus status = SessionStatus::active;
    int current_round = 1;
    double elapsed_s = 0.0;
};

// MAC over (unix-ns timestamp big-endian || nonce) under the server key,
// rendered as 64 lowercase hex chars. Throws std::invalid_argument on an
// empty key or a nonce shorter than 16 bytes.
std::string new_session_id(std::span<const std::uint8_t> key,
                           std::int64_t now_unix_ns,
                           std::span<const std::uint8_t> nonce);

// In-memory session table. Per-session operations are linearized: every
// mutation is an atomic check-and-update keyed by id, so concurrent
// submissions, expiry sweeps, and status reads can interleave freely.
class SessionStore {
public:
    explicit SessionStore(SecurityParams params, EventLog* log = nullptr);

    const SecurityParams& params() const { return params_; }

    // Samples a narrative set (optionally restricted to one domain), picks
    // one question per part, mints a single-use id, stamps round 1 as sent.
    // Throws: std::invalid_argument (empty key, unknown domain),
    // corpus::CorpusError (no eligible sets). The caller is responsible for
    // serializing access to the rng.
    RoundPayload create(const corpus::Corpus& c, Rng& rng, const Clock& clock,
                        std::span<const std::uint8_t> key,
                        std::optional<std::string_view> domain = std::nullopt);

    // Records the transport RTT estimate once per session, only while round
    // 1 is still unanswered. Later calls are ignored (returns false): the
    // compensation can never be inflated after play begins. Negative probes
    // throw std::invalid_argument.
    bool observe_rtt(const std::string& id, double probe_s);

    // Judges the current round per the game rules: session timeout first,
    // then answer correctness, then the per-round budget (t_eff <= tau,
    // closed boundary). Terminal sessions answer every submission with
    // reject(replay).
    SubmitOutcome submit(const std::string& id, std::string_view answer,
                         const Clock& clock);

    // Moves every active session older than t_total_s to expired; returns
    // how many. Terminal sessions are untouched; sessions mid-submission
    // are left for the submission itself to judge.
    int expire_stale(const Clock& clock);

    std::optional<StatusSnapshot> status(const std::string& id,
                                         const Clock& clock) const;

    // Full copy of a session's state (test/diagnostic use).
    std::optional<SessionState> snapshot(const std::string& id) const;

    // Re-stamps the pending round's sent_at. The HTTP layer calls this as
    // the last step before a payload goes out, so round timing starts at
    // send time; moving sent_at later only ever favors the prover.
    void restamp_round_sent(const std::string& id, const Clock& clock);

    std::size_t session_count() const;

private:
    RoundPayload payload_for(const SessionState& s) const;
    void log_event(std::string_view id, std::string_view event,
                   std::string_view detail = {});

    SecurityParams params_;
    EventLog* log_;
    mutable std::mutex mu_;
    std::unordered_map<std::string, SessionState> sessions_;
};

// Bearer proof of a passed admission game, for downstream services.
// Format: "ag1.<session_id>.<issued_at_unix_s>.<ttl_s>.<mac_hex>".
struct PassToken {
    std::string session_id;
    std::int64_t issued_at_unix_s = 0;
    int ttl_s = 0;
    std::string mac_hex;

    std::string encode() const;
    static std::optional<PassToken> decode(std::string_view text);
};

// Throws std::logic_error unless the session is accepted; throws
// std::invalid_argument on an empty key or non-positive ttl.
PassToken issue_pass_token(std::span<const std::uint8_t> key,
                           const SessionState& session, int ttl_s,
                           std::int64_t now_unix_s);

// True iff the MAC verifies under this key and now < issued_at + ttl.
bool verify_pass_token(std::span<const std::uint8_t> key,
                       const PassToken& token, std::int64_t now_unix_s);

// Fraction of accepting verdicts. Throws std::invalid_argument when empty.
double empirical_advantage(std::span<const Verdict> outcomes);

}  // namespace agentgate::session
