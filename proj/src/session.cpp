#include "agentgate/session.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>

#include "agentgate/mac.hpp"

namespace agentgate::session {

using nlohmann::json;

void SecurityParams::validate() const {
    double tau_sum = 0.0;
    for (double t : tau_round_s) {
        if (t <= 0.0) {
            throw std::invalid_argument(
                "SecurityParams: round budgets must be positive");
        }
        tau_sum += t;
    }
    if (t_total_s < tau_sum) {
        throw std::invalid_argument(
            "SecurityParams: t_total_s must cover the sum of round budgets");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument(
            "SecurityParams: alpha must lie strictly inside (0, 1)");
    }
    if (max_answer_length < 1) {
        throw std::invalid_argument(
            "SecurityParams: max_answer_length must be >= 1");
    }
    if (d_domains < 1 || n_sets < 1 || q_questions < 1) {
        throw std::invalid_argument(
            "SecurityParams: domain/set/question counts must be >= 1");
    }
    for (double p : {epsilon_target, delta_target}) {
        if (p < 0.0 || p > 1.0) {
            throw std::invalid_argument(
                "SecurityParams: targets must lie in [0, 1]");
        }
    }
}

SecurityParams SecurityParams::from_json(const json& j) {
    SecurityParams p;
    if (auto it = j.find("tau_round_s"); it != j.end()) {
        if (it->is_array()) {
            if (it->size() != 3) {
                throw std::invalid_argument(
                    "tau_round_s must have exactly 3 entries");
            }
            for (int i = 0; i < 3; ++i) {
                p.tau_round_s[static_cast<std::size_t>(i)] =
                    (*it)[static_cast<std::size_t>(i)].get<double>();
            }
        } else if (it->is_number()) {
            p.tau_round_s.fill(it->get<double>());
        } else {
            throw std::invalid_argument(
                "tau_round_s must be a number or an array of 3 numbers");
        }
    }
    auto num = [&j](const char* key, double& out) {
        if (auto it = j.find(key); it != j.end()) out = it->get<double>();
    };
    auto integer = [&j](const char* key, int& out) {
        if (auto it = j.find(key); it != j.end()) out = it->get<int>();
    };
    num("alpha", p.alpha);
    num("t_total_s", p.t_total_s);
    integer("max_answer_length", p.max_answer_length);
    integer("d_domains", p.d_domains);
    integer("n_sets", p.n_sets);
    integer("q_questions", p.q_questions);
    num("epsilon_target", p.epsilon_target);
    num("delta_target", p.delta_target);
    p.validate();
    return p;
}

json SecurityParams::to_json() const {
    return json{{"tau_round_s", tau_round_s},
                {"alpha", alpha},
                {"t_total_s", t_total_s},
                {"max_answer_length", max_answer_length},
                {"d_domains", d_domains},
                {"n_sets", n_sets},
                {"q_questions", q_questions},
                {"epsilon_target", epsilon_target},
                {"delta_target", delta_target}};
}

std::string_view to_string(RejectReason r) {
    switch (r) {
        case RejectReason::wrong_answer: return "wrong_answer";
        case RejectReason::timeout: return "timeout";
        case RejectReason::session_timeout: return "session_timeout";
        case RejectReason::replay: return "replay";
    }
    return "unknown";
}

std::string_view to_string(SessionStatus s) {
    switch (s) {
        case SessionStatus::active: return "active";
        case SessionStatus::accepted: return "accepted";
        case SessionStatus::rejected: return "rejected";
        case SessionStatus::expired: return "expired";
    }
    return "unknown";
}

std::string new_session_id(std::span<const std::uint8_t> key,
                           std::int64_t now_unix_ns,
                           std::span<const std::uint8_t> nonce) {
    if (key.empty()) {
        throw std::invalid_argument("new_session_id: key must be non-empty");
    }
    if (nonce.size() < 16) {
        throw std::invalid_argument(
            "new_session_id: nonce must be at least 16 bytes");
    }
    std::vector<std::uint8_t> msg;
    msg.reserve(8 + nonce.size());
    auto u = static_cast<std::uint64_t>(now_unix_ns);
    for (int i = 7; i >= 0; --i) {
        msg.push_back(static_cast<std::uint8_t>((u >> (8 * i)) & 0xff));
    }
    msg.insert(msg.end(), nonce.begin(), nonce.end());
    return to_hex(hmac_sha256(key, msg));
}

SessionStore::SessionStore(SecurityParams params, EventLog* log)
    : params_(std::move(params)), log_(log) {
    params_.validate();
}

void SessionStore::log_event(std::string_view id, std::string_view event,
                             std::string_view detail) {
    if (log_ != nullptr) log_->append(id, event, detail);
}

RoundPayload SessionStore::payload_for(const SessionState& s) const {
    int r = s.current_round;
    const auto& part = s.challenge.set->parts[static_cast<std::size_t>(r - 1)];
    const auto& qa = part.qa_pairs[static_cast<std::size_t>(
        s.challenge.chosen_qa[static_cast<std::size_t>(r - 1)])];
    RoundPayload p;
    p.session_id = s.id;
    p.round = r;
    p.narrative = part.narrative;
    p.question = qa.question;
    p.tau_ms = static_cast<int>(
        std::lround(params_.tau_round_s[static_cast<std::size_t>(r - 1)] * 1000.0));
    p.total_timeout_ms = static_cast<int>(std::lround(params_.t_total_s * 1000.0));
    return p;
}

RoundPayload SessionStore::create(const corpus::Corpus& c, Rng& rng,
                                  const Clock& clock,
                                  std::span<const std::uint8_t> key,
                                  std::optional<std::string_view> domain) {
    const corpus::NarrativeSet& set = corpus::sample_narrative_set(c, domain, rng);
    corpus::SessionChallenge challenge = corpus::assemble_challenge(set, rng);

    auto nonce = random_bytes(16);
    auto now_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                      std::chrono::system_clock::now().time_since_epoch())
                      .count();
    SessionState s;
    s.id = new_session_id(key, now_ns, nonce);
    s.challenge = challenge;
    s.created_at = clock.now();
    RoundRecord r1;
    r1.round_index = 1;
    r1.qa_index = challenge.chosen_qa[0];
    r1.sent_at = s.created_at;
    s.rounds.push_back(std::move(r1));

    RoundPayload payload;
    {
        std::lock_guard lock(mu_);
        payload = payload_for(s);
        sessions_.emplace(s.id, std::move(s));
    }
    log_event(payload.session_id, "created", "domain " + set.domain_id);
    return payload;
}

bool SessionStore::observe_rtt(const std::string& id, double probe_s) {
    if (probe_s < 0.0) {
        throw std::invalid_argument("observe_rtt: probe must be >= 0");
    }
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return false;
    SessionState& s = it->second;
    bool round1_open = s.status == SessionStatus::active &&
                       s.current_round == 1 && !s.rounds.empty() &&
                       !s.rounds.front().answered_at.has_value();
    if (s.rtt_recorded || !round1_open) return false;
    s.rtt_s = probe_s;
    s.rtt_recorded = true;
    log_event(id, "rtt_recorded", std::to_string(probe_s) + " s");
    return true;
}

SubmitOutcome SessionStore::submit(const std::string& id,
                                   std::string_view answer,
                                   const Clock& clock) {
    // Arrival time is stamped before any queueing/locking so contention
    // can't eat into the prover's budget.
    const Instant now = clock.now();

    corpus::QAPair qa;
    double rtt = 0.0;
    Instant sent{}, created{};
    int round = 1;
    {
        std::lock_guard lock(mu_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) return SubmitError::unknown_session;
        SessionState& s = it->second;
        if (s.status != SessionStatus::active) {
            log_event(id, "replay_rejected",
                      "status " + std::string(to_string(s.status)));
            return Verdict::rejected(RejectReason::replay);
        }
        if (s.in_flight) return SubmitError::in_flight;
        s.in_flight = true;
        round = s.current_round;
        rtt = s.rtt_s;
        created = s.created_at;
        sent = s.rounds.back().sent_at;
        qa = s.challenge.set->parts[static_cast<std::size_t>(round - 1)]
                 .qa_pairs[static_cast<std::size_t>(
                     s.challenge.chosen_qa[static_cast<std::size_t>(round - 1)])];
    }

    // Judge outside the lock; the in_flight flag keeps this round ours.
    const double elapsed_total = seconds_between(created, now);
    const double t_eff =
        std::max(0.0, seconds_between(sent, now) - rtt);
    std::optional<RejectReason> reason;
    if (elapsed_total > params_.t_total_s) {
        reason = RejectReason::session_timeout;
    } else if (!corpus::answers_match(answer, qa)) {
        reason = RejectReason::wrong_answer;
    } else if (t_eff > params_.tau_round_s[static_cast<std::size_t>(round - 1)]) {
        reason = RejectReason::timeout;
    }

    std::lock_guard lock(mu_);
    SessionState& s = sessions_.at(id);
    s.in_flight = false;
    RoundRecord& rr = s.rounds.back();
    rr.answered_at = now;
    rr.t_eff_s = t_eff;
    rr.submitted_answer = std::string(answer);

    if (reason.has_value()) {
        rr.outcome = RoundOutcome::failed;
        rr.fail_reason = reason;
        s.status = SessionStatus::rejected;
        s.reject_reason = reason;
        log_event(id, "rejected",
                  "round " + std::to_string(round) + " " +
                      std::string(to_string(*reason)));
        return Verdict::rejected(*reason);
    }

    rr.outcome = RoundOutcome::passed;
    log_event(id, "round_passed",
              "round " + std::to_string(round) + " t_eff " +
                  std::to_string(t_eff) + " s");
    if (round == 3) {
        s.status = SessionStatus::accepted;
        log_event(id, "accepted");
        return Verdict::accepted();
    }

    s.current_round = round + 1;
    RoundRecord next;
    next.round_index = s.current_round;
    next.qa_index =
        s.challenge.chosen_qa[static_cast<std::size_t>(s.current_round - 1)];
    next.sent_at = clock.now();
    s.rounds.push_back(std::move(next));
    return payload_for(s);
}

int SessionStore::expire_stale(const Clock& clock) {
    const Instant now = clock.now();
    int n = 0;
    std::vector<std::string> expired_ids;
    {
        std::lock_guard lock(mu_);
        for (auto& [id, s] : sessions_) {
            if (s.status != SessionStatus::active || s.in_flight) continue;
            if (seconds_between(s.created_at, now) > params_.t_total_s) {
                s.status = SessionStatus::expired;
                ++n;
                expired_ids.push_back(id);
            }
        }
    }
    for (const auto& id : expired_ids) log_event(id, "expired");
    return n;
}

std::optional<StatusSnapshot> SessionStore::status(const std::string& id,
                                                   const Clock& clock) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    const SessionState& s = it->second;
    StatusSnapshot snap;
    snap.status = s.status;
    snap.current_round = s.current_round;
    snap.elapsed_s = seconds_between(s.created_at, clock.now());
    return snap;
}

std::optional<SessionState> SessionStore::snapshot(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    return it->second;
}

void SessionStore::restamp_round_sent(const std::string& id,
                                      const Clock& clock) {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return;
    SessionState& s = it->second;
    if (s.status != SessionStatus::active || s.rounds.empty()) return;
    RoundRecord& rr = s.rounds.back();
    if (rr.outcome == RoundOutcome::pending && !rr.answered_at.has_value()) {
        rr.sent_at = clock.now();
    }
}

std::size_t SessionStore::session_count() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
}

namespace {
std::vector<std::uint8_t> token_mac_message(const PassToken& t) {
    std::string msg = t.session_id + "|" + std::to_string(t.issued_at_unix_s) +
                      "|" + std::to_string(t.ttl_s);
    return {msg.begin(), msg.end()};
}
}  // namespace

std::string PassToken::encode() const {
    return "ag1." + session_id + "." + std::to_string(issued_at_unix_s) + "." +
           std::to_string(ttl_s) + "." + mac_hex;
}

std::optional<PassToken> PassToken::decode(std::string_view text) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        auto dot = text.find('.', pos);
        if (dot == std::string_view::npos) {
            fields.push_back(text.substr(pos));
            break;
        }
        fields.push_back(text.substr(pos, dot - pos));
        pos = dot + 1;
    }
    if (fields.size() != 5 || fields[0] != "ag1") return std::nullopt;
    PassToken t;
    t.session_id = std::string(fields[1]);
    auto parse_int = [](std::string_view s, auto& out) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && p == s.data() + s.size();
    };
    if (!parse_int(fields[2], t.issued_at_unix_s)) return std::nullopt;
    if (!parse_int(fields[3], t.ttl_s)) return std::nullopt;
    t.mac_hex = std::string(fields[4]);
    if (t.session_id.empty() || t.mac_hex.size() != 64) return std::nullopt;
    return t;
}

PassToken issue_pass_token(std::span<const std::uint8_t> key,
                           const SessionState& session, int ttl_s,
                           std::int64_t now_unix_s) {
    if (key.empty()) {
        throw std::invalid_argument("issue_pass_token: key must be non-empty");
    }
    if (ttl_s <= 0) {
        throw std::invalid_argument("issue_pass_token: ttl must be positive");
    }
    if (session.status != SessionStatus::accepted) {
        throw std::logic_error(
            "issue_pass_token: session has not been accepted");
    }
    PassToken t;
    t.session_id = session.id;
    t.issued_at_unix_s = now_unix_s;
    t.ttl_s = ttl_s;
    t.mac_hex = to_hex(hmac_sha256(key, token_mac_message(t)));
    return t;
}

bool verify_pass_token(std::span<const std::uint8_t> key,
                       const PassToken& token, std::int64_t now_unix_s) {
    if (key.empty()) return false;
    std::vector<std::uint8_t> mac;
    try {
        mac = from_hex(token.mac_hex);
    } catch (const std::invalid_argument&) {
        return false;
    }
    auto expected = hmac_sha256(key, token_mac_message(token));
    if (!constant_time_equal(mac, expected)) return false;
    return now_unix_s < token.issued_at_unix_s + token.ttl_s;
}

double empirical_advantage(std::span<const Verdict> outcomes) {
    if (outcomes.empty()) {
        throw std::invalid_argument("empirical_advantage: empty outcome list");
    }
    std::size_t n = 0;
    for (const Verdict& v : outcomes) {
        if (v.accept) ++n;
    }
    return static_cast<double>(n) / static_cast<double>(outcomes.size());
}

}  // namespace agentgate::session
