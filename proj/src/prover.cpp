#include "agentgate/prover.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <set>
#include <thread>

#include <httplib.h>

#include "agentgate/normalize.hpp"

namespace agentgate::prover {

using nlohmann::json;

// --- profiles ---------------------------------------------------------------

void ProverProfile::validate() const {
    auto fail = [this](const char* why) {
        throw std::invalid_argument("profile '" + label + "': " + why);
    };
    if (std::holds_alternative<OracleStrategy>(strategy) ||
        std::holds_alternative<LlmBackedStrategy>(strategy)) {
        if (!capabilities.is_agent()) {
            fail("oracle/llm strategies require capabilities (1,1,1)");
        }
    }
    if (std::holds_alternative<KeywordScriptStrategy>(strategy) ||
        std::holds_alternative<RandomEntityStrategy>(strategy)) {
        if (capabilities.reasoning) {
            fail("scripted strategies must declare reasoning = 0");
        }
    }
    if (std::holds_alternative<DelayedHumanStrategy>(strategy)) {
        if (capabilities != CapabilityVector{false, false, false}) {
            fail("delayed_human is effectively (0,0,0) under the budget");
        }
    }
    if (auto* o = std::get_if<OracleStrategy>(&strategy)) {
        if (o->corpus == nullptr) fail("oracle strategy needs a corpus");
    }
    if (auto* r = std::get_if<RandomEntityStrategy>(&strategy)) {
        if (r->corpus == nullptr) fail("random_entity strategy needs a corpus");
    }
    if (auto* k = std::get_if<KeywordScriptStrategy>(&strategy)) {
        if (k->corpus == nullptr) fail("keyword strategy needs a corpus");
        if (k->window < 1) fail("keyword window must be >= 1");
    }
    if (auto* d = std::get_if<DelayedHumanStrategy>(&strategy)) {
        if (d->corpus == nullptr) fail("delayed_human strategy needs a corpus");
        d->sim.validate();
    }
    if (auto* l = std::get_if<LlmBackedStrategy>(&strategy)) {
        if (l->client == nullptr) fail("llm strategy needs a client");
    }
}

ProverProfile ProverProfile::oracle(const corpus::Corpus& c) {
    return {"oracle", {true, true, true}, OracleStrategy{&c}, std::nullopt};
}

ProverProfile ProverProfile::random_entity(const corpus::Corpus& c) {
    return {"random_entity",
            {true, false, false},
            RandomEntityStrategy{&c},
            std::nullopt};
}

ProverProfile ProverProfile::keyword_script(const corpus::Corpus& c) {
    return {"keyword_script",
            {true, false, false},
            KeywordScriptStrategy{&c},
            std::nullopt};
}

ProverProfile ProverProfile::delayed_human(const corpus::Corpus& c,
                                           timing::HumanSimParams sim) {
    return {"delayed_human",
            {false, false, false},
            DelayedHumanStrategy{&c, sim},
            std::nullopt};
}

ProverProfile ProverProfile::llm_backed(
    std::shared_ptr<CompletionClient> client) {
    return {"llm_backed",
            {true, true, true},
            LlmBackedStrategy{std::move(client)},
            std::nullopt};
}

// --- corpus lookups (test scaffolding) ---------------------------------------

namespace {

const corpus::Part* find_part(const corpus::Corpus& c,
                              std::string_view narrative) {
    for (const auto& domain_sets : c.sets) {
        for (const auto& set : domain_sets) {
            for (const auto& part : set.parts) {
                if (part.narrative == narrative) return &part;
            }
        }
    }
    return nullptr;
}

const corpus::QAPair* find_qa(const corpus::Corpus& c,
                              std::string_view narrative,
                              std::string_view question) {
    const corpus::Part* part = find_part(c, narrative);
    if (part == nullptr) return nullptr;
    for (const auto& qa : part->qa_pairs) {
        if (qa.question == question) return &qa;
    }
    return nullptr;
}

std::string oracle_answer(const corpus::Corpus& c,
                          const session::RoundPayload& payload) {
    const corpus::QAPair* qa =
        find_qa(c, payload.narrative, payload.question);
    if (qa == nullptr) {
        throw TargetError(
            "oracle lookup failed: the payload does not match the serving "
            "corpus");
    }
    return qa->canonical_answer;
}

const std::vector<std::string>& annotated_entities(
    const corpus::Corpus& c, const session::RoundPayload& payload) {
    const corpus::Part* part = find_part(c, payload.narrative);
    if (part == nullptr) {
        throw TargetError(
            "entity lookup failed: the payload does not match the serving "
            "corpus");
    }
    if (part->entity_annotations.empty()) {
        throw std::invalid_argument(
            "this corpus carries no entity annotations; random/keyword "
            "strategies need an annotated test corpus");
    }
    return part->entity_annotations;
}

}  // namespace

// --- keyword baseline ---------------------------------------------------------

namespace {

std::vector<std::string> content_tokens(std::string_view text) {
    static const std::set<std::string> kStopWords = {
        "the",   "a",     "an",    "of",    "in",    "on",     "at",
        "to",    "for",   "and",   "or",    "is",    "was",    "were",
        "which", "what",  "who",   "that",  "this",  "with",   "by",
        "from",  "as",    "it",    "its",   "their", "his",    "her",
        "be",    "been",  "are",   "did",   "does",  "do",     "not",
        "no",    "how",   "many",  "much",  "during", "while", "than",
        "then",  "after", "before", "between", "into", "over", "under",
        "all",   "any",   "each",  "every", "other", "same",   "had",
        "has",   "have",  "when",  "where", "why",   "whose"};

    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&]() {
        if (current.empty()) return;
        std::string norm = normalize_answer(current);
        if (!norm.empty() && kStopWords.find(norm) == kStopWords.end()) {
            tokens.push_back(std::move(norm));
        }
        current.clear();
    };
    for (char ch : text) {
        bool space = ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r';
        bool punct = ch == '.' || ch == ',' || ch == ';' || ch == ':' ||
                     ch == '(' || ch == ')' || ch == '"' || ch == '\'' ||
                     ch == '!' || ch == '?' || ch == '[' || ch == ']';
        if (space || punct) {
            flush();
        } else {
            current.push_back(ch);
        }
    }
    flush();
    return tokens;
}

std::vector<std::string> all_tokens(std::string_view text) {
    // Same tokenization but stopwords kept: positions must reflect the
    // actual text layout for windowed co-occurrence.
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&]() {
        if (!current.empty()) {
            tokens.push_back(normalize_answer(current));
            current.clear();
        }
    };
    for (char ch : text) {
        bool space = ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r';
        bool punct = ch == '.' || ch == ',' || ch == ';' || ch == ':' ||
                     ch == '(' || ch == ')' || ch == '"' || ch == '\'' ||
                     ch == '!' || ch == '?' || ch == '[' || ch == ']';
        if (space || punct) {
            flush();
        } else {
            current.push_back(ch);
        }
    }
    flush();
    return tokens;
}

}  // namespace

std::string keyword_guess(std::string_view narrative, std::string_view question,
                          const std::vector<std::string>& entities,
                          int window) {
    if (entities.empty()) {
        throw std::invalid_argument("keyword_guess: entity list is empty");
    }
    if (window < 1) {
        throw std::invalid_argument("keyword_guess: window must be >= 1");
    }

    const std::vector<std::string> text = all_tokens(narrative);
    const std::vector<std::string> qwords_v = content_tokens(question);
    const std::set<std::string> qwords(qwords_v.begin(), qwords_v.end());

    constexpr std::size_t kNoMention = std::numeric_limits<std::size_t>::max();
    std::size_t best_idx = 0;
    long best_score = -1;
    std::size_t best_first = kNoMention;

    for (std::size_t ei = 0; ei < entities.size(); ++ei) {
        const std::string norm_entity = normalize_answer(entities[ei]);
        long score = 0;
        std::size_t first_mention = kNoMention;
        for (std::size_t ti = 0; ti < text.size(); ++ti) {
            if (text[ti] != norm_entity) continue;
            if (first_mention == kNoMention) first_mention = ti;
            std::size_t lo = ti >= static_cast<std::size_t>(window)
                                 ? ti - static_cast<std::size_t>(window)
                                 : 0;
            std::size_t hi = std::min(text.size() - 1,
                                      ti + static_cast<std::size_t>(window));
            for (std::size_t wi = lo; wi <= hi; ++wi) {
                if (wi != ti && qwords.count(text[wi]) > 0) ++score;
            }
        }
        bool better = score > best_score ||
                      (score == best_score && first_mention < best_first);
        if (better) {
            best_idx = ei;
            best_score = score;
            best_first = first_mention;
        }
    }
    return entities[best_idx];
}

// --- LLM strategy -------------------------------------------------------------

std::string llm_answer(const std::vector<TranscriptEntry>& prior,
                       const session::RoundPayload& current,
                       CompletionClient& client) {
    std::vector<ChatMessage> messages;
    messages.push_back(
        {"system",
         "You are completing a timed multi-round reading-comprehension "
         "challenge. Each round presents a narrative and one question; later "
         "narratives refer back to earlier ones. Reply with the shortest "
         "exact answer string only — no explanation."});
    for (const TranscriptEntry& t : prior) {
        messages.push_back({"user", t.payload.narrative + "\n\nQuestion: " +
                                        t.payload.question});
        messages.push_back({"assistant", t.answer});
    }
    messages.push_back({"user", current.narrative + "\n\nQuestion: " +
                                    current.question});
    std::string raw = client.complete(messages);
    std::string_view first = trim(raw);
    if (auto nl = first.find('\n'); nl != std::string_view::npos) {
        first = trim(first.substr(0, nl));
    }
    return std::string(first);
}

// --- targets -------------------------------------------------------------------

session::RoundPayload InprocTarget::start(std::optional<std::string> domain) {
    try {
        return service_.start(domain ? std::optional<std::string_view>(*domain)
                                     : std::nullopt);
    } catch (const std::exception& e) {
        throw TargetError(std::string("start failed: ") + e.what());
    }
}

AnswerReply InprocTarget::answer(const std::string& id,
                                 const std::string& text) {
    auto outcome = service_.answer(id, text);
    if (outcome.error.has_value()) {
        throw TargetError(*outcome.error == session::SubmitError::unknown_session
                              ? "answer failed: unknown session"
                              : "answer failed: submission already in flight");
    }
    AnswerReply reply;
    reply.next = std::move(outcome.next);
    reply.verdict = outcome.verdict;
    reply.pass_token = std::move(outcome.pass_token);
    return reply;
}

void InprocTarget::wait(double seconds) {
    if (seconds <= 0.0) return;
    if (manual_ != nullptr) {
        manual_->advance(seconds);
    } else {
        std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    }
}

double InprocTarget::now_s() const {
    return std::chrono::duration<double>(
               service_.clock().now().time_since_epoch())
        .count();
}

HttpTarget::HttpTarget(std::string base_url, std::string prefix,
                       double timeout_s)
    : base_url_(std::move(base_url)),
      prefix_(std::move(prefix)),
      timeout_s_(timeout_s) {}

namespace {

session::RoundPayload payload_from_json(const json& j) {
    session::RoundPayload p;
    try {
        p.session_id = j.at("session_id").get<std::string>();
        p.round = j.at("round").get<int>();
        p.narrative = j.at("narrative").get<std::string>();
        p.question = j.at("question").get<std::string>();
        p.tau_ms = j.at("tau_ms").get<int>();
        p.total_timeout_ms = j.at("total_timeout_ms").get<int>();
    } catch (const json::exception& e) {
        throw TargetError(std::string("malformed round payload: ") + e.what());
    }
    return p;
}

session::Verdict verdict_from_json(const json& j) {
    session::Verdict v;
    std::string verdict = j.value("verdict", "");
    if (verdict == "accept") {
        v.accept = true;
        return v;
    }
    if (verdict != "reject") {
        throw TargetError("malformed verdict: " + j.dump());
    }
    std::string reason = j.value("reason", "");
    if (reason == "wrong_answer") {
        v.reason = session::RejectReason::wrong_answer;
    } else if (reason == "timeout") {
        v.reason = session::RejectReason::timeout;
    } else if (reason == "session_timeout") {
        v.reason = session::RejectReason::session_timeout;
    } else if (reason == "replay") {
        v.reason = session::RejectReason::replay;
    } else {
        throw TargetError("unknown reject reason: " + reason);
    }
    return v;
}

}  // namespace

session::RoundPayload HttpTarget::start(std::optional<std::string> domain) {
    httplib::Client cli(base_url_);
    auto timeout = std::chrono::duration<double>(timeout_s_);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    std::string body = domain ? json{{"domain", *domain}}.dump() : "";
    auto res = cli.Post(prefix_ + "/session", body, "application/json");
    if (!res) {
        throw TargetError("start failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 201) {
        throw TargetError("start failed: HTTP " + std::to_string(res->status) +
                          " " + res->body);
    }
    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw TargetError("start returned non-JSON body");
    return payload_from_json(j);
}

AnswerReply HttpTarget::answer(const std::string& id, const std::string& text) {
    httplib::Client cli(base_url_);
    auto timeout = std::chrono::duration<double>(timeout_s_);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    auto res = cli.Post(prefix_ + "/session/" + id + "/answer",
                        json{{"answer", text}}.dump(), "application/json");
    if (!res) {
        throw TargetError("answer failed: " + httplib::to_string(res.error()));
    }
    json j = json::parse(res->body, nullptr, false);
    if (res->status != 200 && res->status != 409) {
        throw TargetError("answer failed: HTTP " + std::to_string(res->status) +
                          " " + res->body);
    }
    if (j.is_discarded()) throw TargetError("answer returned non-JSON body");
    AnswerReply reply;
    if (j.contains("verdict")) {
        reply.verdict = verdict_from_json(j);
        if (auto it = j.find("pass_token"); it != j.end() && it->is_string()) {
            reply.pass_token = it->get<std::string>();
        }
        return reply;
    }
    reply.next = payload_from_json(j);
    return reply;
}

void HttpTarget::wait(double seconds) {
    if (seconds > 0.0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    }
}

double HttpTarget::now_s() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// --- session driver -------------------------------------------------------------

namespace {

struct Decision {
    std::string answer;
    double delay_s = 0.0;  // strategy-inherent latency
};

Decision decide(const ProverProfile& profile,
                const std::vector<TranscriptEntry>& prior,
                const session::RoundPayload& payload, Rng& rng) {
    Decision d;
    if (const auto* o = std::get_if<OracleStrategy>(&profile.strategy)) {
        d.answer = oracle_answer(*o->corpus, payload);
    } else if (const auto* r =
                   std::get_if<RandomEntityStrategy>(&profile.strategy)) {
        const auto& entities = annotated_entities(*r->corpus, payload);
        std::uniform_int_distribution<std::size_t> pick(0, entities.size() - 1);
        d.answer = entities[pick(rng)];
    } else if (const auto* k =
                   std::get_if<KeywordScriptStrategy>(&profile.strategy)) {
        const auto& entities = annotated_entities(*k->corpus, payload);
        d.answer = keyword_guess(payload.narrative, payload.question, entities,
                                 k->window);
    } else if (const auto* h =
                   std::get_if<DelayedHumanStrategy>(&profile.strategy)) {
        d.answer = oracle_answer(*h->corpus, payload);
        timing::HumanSimParams one = h->sim;
        one.n_samples = 1;
        d.delay_s = timing::simulate_human(one, rng()).front();
    } else {
        const auto& l = std::get<LlmBackedStrategy>(profile.strategy);
        d.answer = llm_answer(prior, payload, *l.client);
    }
    return d;
}

}  // namespace

SessionOutcome run_session(const ProverProfile& profile, VerifierTarget& target,
                           Rng& rng) {
    profile.validate();

    SessionOutcome out;
    session::RoundPayload payload = target.start(std::nullopt);
    for (;;) {
        const double received_at = target.now_s();
        Decision d = decide(profile, out.transcript, payload, rng);
        double delay = d.delay_s + profile.per_round_delay_s.value_or(0.0);
        if (delay > 0.0) target.wait(delay);

        AnswerReply reply = target.answer(payload.session_id, d.answer);
        TranscriptEntry entry;
        entry.payload = payload;
        entry.answer = d.answer;
        entry.t_eff_s = target.now_s() - received_at;
        out.transcript.push_back(std::move(entry));

        if (reply.verdict.has_value()) {
            out.verdict = *reply.verdict;
            out.pass_token = std::move(reply.pass_token);
            if (out.verdict.accept) {
                out.rounds_completed = static_cast<int>(out.transcript.size());
            } else {
                out.rounds_completed =
                    static_cast<int>(out.transcript.size()) - 1;
            }
            return out;
        }
        if (!reply.next.has_value()) {
            throw TargetError("verifier returned neither payload nor verdict");
        }
        payload = std::move(*reply.next);
    }
}

TrialResult run_trials(const ProverProfile& profile, VerifierTarget& target,
                       int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("run_trials: n must be >= 1");
    profile.validate();

    const std::uint64_t base = rng();
    TrialResult result;
    result.outcomes.reserve(static_cast<std::size_t>(n));
    std::vector<session::Verdict> verdicts;
    verdicts.reserve(static_cast<std::size_t>(n));

    for (int i = 0; i < n; ++i) {
        Rng session_rng(derive_subseed(base, static_cast<std::uint64_t>(i)));
        SessionOutcome outcome = run_session(profile, target, session_rng);
        verdicts.push_back(outcome.verdict);

        json line{{"session", i},
                  {"verdict", outcome.verdict.accept ? "accept" : "reject"},
                  {"rounds_completed", outcome.rounds_completed},
                  {"t_eff_s", outcome.round_t_eff_s()}};
        if (outcome.verdict.reason.has_value()) {
            line["reason"] =
                std::string(session::to_string(*outcome.verdict.reason));
        }
        result.log_lines.push_back(line.dump());
        result.outcomes.push_back(std::move(outcome));
    }
    result.advantage = session::empirical_advantage(verdicts);
    return result;
}

}  // namespace agentgate::prover
