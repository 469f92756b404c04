#include "agentgate/server.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <httplib.h>

#include "agentgate/mac.hpp"

namespace agentgate::server {

using nlohmann::json;

namespace {
std::int64_t wall_unix_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::int64_t wall_unix_s() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}
}  // namespace

VerifierService::VerifierService(const corpus::Corpus& corpus,
                                 ServiceConfig cfg,
                                 std::vector<std::uint8_t> key,
                                 const Clock& clock, std::uint64_t rng_seed,
                                 EventLog* log)
    : cfg_(cfg),
      key_(std::move(key)),
      clock_(clock),
      store_(cfg.params, log),
      corpus_(corpus),
      rng_(rng_seed) {
    if (key_.empty()) {
        throw std::invalid_argument("VerifierService: empty server key");
    }
    if (cfg_.pass_token_ttl_s <= 0) {
        throw std::invalid_argument(
            "VerifierService: pass_token_ttl_s must be positive");
    }
}

session::RoundPayload VerifierService::start(
    std::optional<std::string_view> domain) {
    std::lock_guard lock(rng_mu_);
    return store_.create(corpus_, rng_, clock_, key_, domain);
}

VerifierService::AnswerOutcome VerifierService::answer(
    const std::string& id, std::string_view answer_text) {
    AnswerOutcome out;
    session::SubmitOutcome res = store_.submit(id, answer_text, clock_);
    if (auto* payload = std::get_if<session::RoundPayload>(&res)) {
        out.next = std::move(*payload);
        return out;
    }
    if (auto* err = std::get_if<session::SubmitError>(&res)) {
        out.error = *err;
        return out;
    }
    auto verdict = std::get<session::Verdict>(res);
    out.verdict = verdict;
    if (verdict.accept) {
        auto snap = store_.snapshot(id);
        if (snap.has_value()) {
            out.pass_token = session::issue_pass_token(key_, *snap,
                                                       cfg_.pass_token_ttl_s,
                                                       wall_unix_s())
                                 .encode();
        }
    }
    return out;
}

bool VerifierService::observe_rtt(const std::string& id, double probe_s) {
    return store_.observe_rtt(id, probe_s);
}

std::optional<session::StatusSnapshot> VerifierService::status(
    const std::string& id) const {
    return store_.status(id, clock_);
}

bool VerifierService::verify_token(std::string_view token_text) const {
    auto token = session::PassToken::decode(token_text);
    if (!token.has_value()) return false;
    return session::verify_pass_token(key_, *token, wall_unix_s());
}

int VerifierService::expire_stale() { return store_.expire_stale(clock_); }

void VerifierService::restamp(const std::string& id) {
    store_.restamp_round_sent(id, clock_);
}

json payload_to_json(const session::RoundPayload& p,
                     std::int64_t issued_at_unix_ms) {
    return json{{"session_id", p.session_id},
                {"round", p.round},
                {"narrative", p.narrative},
                {"question", p.question},
                {"tau_ms", p.tau_ms},
                {"total_timeout_ms", p.total_timeout_ms},
                {"issued_at", issued_at_unix_ms}};
}

json verdict_to_json(const session::Verdict& v,
                     const std::optional<std::string>& pass_token) {
    json j{{"verdict", v.accept ? "accept" : "reject"}};
    if (v.reason.has_value()) {
        j["reason"] = std::string(session::to_string(*v.reason));
    }
    if (pass_token.has_value()) j["pass_token"] = *pass_token;
    return j;
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view message) {
    send_json(res, status, json{{"error", std::string(message)}});
}

}  // namespace

void attach_routes(httplib::Server& server, VerifierService& service,
                   const std::string& prefix) {
    server.Post(prefix + "/session", [&service](const httplib::Request& req,
                                                httplib::Response& res) {
        std::optional<std::string> domain;
        if (!req.body.empty()) {
            json body = json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.is_object()) {
                send_error(res, 400, "request body must be a JSON object");
                return;
            }
            if (auto it = body.find("domain"); it != body.end()) {
                if (!it->is_string()) {
                    send_error(res, 400, "domain must be a string");
                    return;
                }
                domain = it->get<std::string>();
            }
        }
        try {
            session::RoundPayload payload =
                service.start(domain ? std::optional<std::string_view>(*domain)
                                     : std::nullopt);
            send_json(res, 201, payload_to_json(payload, wall_unix_ms()));
            // Round timing starts when the payload leaves: restamp as the
            // final step so queueing above never counts against the prover.
            service.restamp(payload.session_id);
        } catch (const std::invalid_argument& e) {
            send_error(res, 400, e.what());
        } catch (const corpus::CorpusError& e) {
            send_error(res, 503, e.what());
        }
    });

    server.Post(
        prefix + "/session/([0-9a-f]+)/answer",
        [&service](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            json body = json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.is_object() ||
                !body.contains("answer") || !body["answer"].is_string()) {
                send_error(res, 400,
                           "request body must be {\"answer\": \"...\"}");
                return;
            }
            auto outcome =
                service.answer(id, body["answer"].get<std::string>());
            if (outcome.error.has_value()) {
                if (*outcome.error == session::SubmitError::unknown_session) {
                    send_error(res, 404, "unknown session");
                } else {
                    send_error(res, 409,
                               "a submission for this round is already in "
                               "flight");
                }
                return;
            }
            if (outcome.next.has_value()) {
                send_json(res, 200,
                          payload_to_json(*outcome.next, wall_unix_ms()));
                service.restamp(outcome.next->session_id);
                return;
            }
            const session::Verdict& v = *outcome.verdict;
            bool replay = !v.accept && v.reason.has_value() &&
                          *v.reason == session::RejectReason::replay;
            send_json(res, replay ? 409 : 200,
                      verdict_to_json(v, outcome.pass_token));
        });

    server.Get(prefix + "/session/([0-9a-f]+)",
               [&service](const httplib::Request& req,
                          httplib::Response& res) {
                   auto snap = service.status(req.matches[1]);
                   if (!snap.has_value()) {
                       send_error(res, 404, "unknown session");
                       return;
                   }
                   send_json(
                       res, 200,
                       json{{"status",
                             std::string(session::to_string(snap->status))},
                            {"current_round", snap->current_round},
                            {"elapsed_ms",
                             static_cast<std::int64_t>(snap->elapsed_s *
                                                       1000.0)}});
               });

    server.Post(prefix + "/token/verify",
                [&service](const httplib::Request& req,
                           httplib::Response& res) {
                    json body = json::parse(req.body, nullptr, false);
                    if (body.is_discarded() || !body.is_object() ||
                        !body.contains("token") ||
                        !body["token"].is_string()) {
                        send_error(res, 400,
                                   "request body must be {\"token\": "
                                   "\"...\"}");
                        return;
                    }
                    bool valid =
                        service.verify_token(body["token"].get<std::string>());
                    send_json(res, 200, json{{"valid", valid}});
                });
}

bool run_server(VerifierService& service, const ServeOptions& options) {
    httplib::Server server;
    attach_routes(server, service, options.prefix);
    auto timeout = std::chrono::duration<double>(options.read_timeout_s);
    server.set_read_timeout(timeout);
    server.set_payload_max_length(1 << 20);
    return server.listen(options.host, options.port);
}

std::vector<std::uint8_t> load_server_key(
    const char* env_var, const std::optional<std::string>& key_file) {
    auto parse_hex_key = [](std::string_view hex,
                            const std::string& source) {
        std::string_view trimmed = hex;
        while (!trimmed.empty() &&
               (trimmed.back() == '\n' || trimmed.back() == '\r' ||
                trimmed.back() == ' ')) {
            trimmed.remove_suffix(1);
        }
        std::vector<std::uint8_t> key;
        try {
            key = from_hex(trimmed);
        } catch (const std::invalid_argument&) {
            throw std::runtime_error(source + ": key must be hex");
        }
        if (key.size() != 32) {
            throw std::runtime_error(source +
                                     ": key must be 32 bytes (64 hex chars)");
        }
        return key;
    };

    if (env_var != nullptr) {
        if (const char* value = std::getenv(env_var)) {
            return parse_hex_key(value, std::string("env ") + env_var);
        }
    }
    if (key_file.has_value()) {
        std::ifstream in(*key_file);
        if (!in) {
            throw std::runtime_error("cannot open key file " + *key_file);
        }
        std::string hex;
        std::getline(in, hex);
        return parse_hex_key(hex, "key file " + *key_file);
    }
    std::cerr << "warning: no server key configured; generated an ephemeral "
                 "key (sessions and tokens will not survive a restart)\n";
    return random_bytes(32);
}

}  // namespace agentgate::server
