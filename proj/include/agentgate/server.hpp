#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "agentgate/clock.hpp"
#include "agentgate/corpus.hpp"
#include "agentgate/session.hpp"

namespace httplib {
class Server;
}

namespace agentgate::server {

struct ServiceConfig {
    session::SecurityParams params;
    int pass_token_ttl_s = 300;
};

// The admission verifier with transport stripped away: every HTTP endpoint
// delegates to one method here, and in-process harnesses call the methods
// directly so protocol behavior can be tested without sockets.
class VerifierService {
public:
    // The corpus, clock and optional event log must outlive the service.
    // rng_seed drives challenge sampling (fixed seed => reproducible
    // narrative/question choices in creation order).
    VerifierService(const corpus::Corpus& corpus, ServiceConfig cfg,
                    std::vector<std::uint8_t> key, const Clock& clock,
                    std::uint64_t rng_seed, EventLog* log = nullptr);

    // Creates a session and returns the round-1 payload. Throws
    // std::invalid_argument (unknown domain) or corpus::CorpusError (no
    // eligible sets).
    session::RoundPayload start(
        std::optional<std::string_view> domain = std::nullopt);

    struct AnswerOutcome {
        std::optional<session::RoundPayload> next;   // round passed, more to go
        std::optional<session::Verdict> verdict;     // terminal outcome
        std::optional<std::string> pass_token;       // present iff accepted
        std::optional<session::SubmitError> error;   // caller misuse
    };
    AnswerOutcome answer(const std::string& id, std::string_view answer_text);

    bool observe_rtt(const std::string& id, double probe_s);
    std::optional<session::StatusSnapshot> status(const std::string& id) const;
    bool verify_token(std::string_view token_text) const;
    int expire_stale();

    // Re-stamp the pending round's sent_at; the HTTP layer calls this right
    // before a payload leaves the process.
    void restamp(const std::string& id);

    const session::SecurityParams& params() const { return cfg_.params; }
    const Clock& clock() const { return clock_; }
    session::SessionStore& store() { return store_; }

private:
    ServiceConfig cfg_;
    std::vector<std::uint8_t> key_;
    const Clock& clock_;
    session::SessionStore store_;
    const corpus::Corpus& corpus_;
    std::mutex rng_mu_;
    Rng rng_;
};

// JSON wire forms. Payloads carry issued_at (wall-clock unix ms) purely as
// an informational server timestamp; verdict math never uses it.
nlohmann::json payload_to_json(const session::RoundPayload& p,
                               std::int64_t issued_at_unix_ms);
nlohmann::json verdict_to_json(const session::Verdict& v,
                               const std::optional<std::string>& pass_token);

// Mounts the four endpoints on an httplib server:
//   POST {prefix}/session                -> 201 round-1 payload
//   POST {prefix}/session/{id}/answer    -> 200 payload | verdict
//   GET  {prefix}/session/{id}           -> 200 status snapshot
//   POST {prefix}/token/verify           -> 200 {valid}
// Protocol rejects are HTTP 200 (a verdict is a successful protocol
// outcome); 4xx is reserved for misuse: 400 bad request body or unknown
// domain, 404 unknown session, 409 replay or in-flight duplicate,
// 503 empty corpus.
void attach_routes(httplib::Server& server, VerifierService& service,
                   const std::string& prefix = "/v1");

struct ServeOptions {
    std::string host = "0.0.0.0";
    int port = 8088;
    std::string prefix = "/v1";
    // Bounded read timeout so a slow-loris client cannot pin a worker.
    double read_timeout_s = 5.0;
};

// Blocking listen loop; returns false if the socket cannot be bound.
bool run_server(VerifierService& service, const ServeOptions& options);

// Server key helpers: 32 random bytes, hex-encoded at rest. Reads the env
// var first (64 hex chars), then the key file; generates a fresh ephemeral
// key when neither is set (warn: sessions/tokens won't survive restarts).
std::vector<std::uint8_t> load_server_key(
    const char* env_var = "AGENTGATE_KEY",
    const std::optional<std::string>& key_file = std::nullopt);

}  // namespace agentgate::server
