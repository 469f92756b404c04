#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "agentgate/rng.hpp"

namespace agentgate::corpus {

enum class ReasoningType {
    negation,
    comparison,
    temporal,
    multi_hop,
    conditional,
    causal,
};

enum class AnswerType {
    entity,
    numeric,
    label,
};

std::string_view to_string(ReasoningType t);
std::string_view to_string(AnswerType t);
// Throw std::invalid_argument on unknown names.
ReasoningType reasoning_type_from_string(std::string_view s);
AnswerType answer_type_from_string(std::string_view s);

struct DomainDef {
    std::string id;            // stable key, e.g. "biochemistry"
    std::string display_name;  // e.g. "Biochemistry"
    std::string ford_field;    // OECD FORD major field, e.g. "1. Natural Sci."
    std::string description;
    std::vector<std::string> entity_examples;
    std::vector<std::string> reasoning_examples;

    bool operator==(const DomainDef&) const = default;
};

struct QAPair {
    std::string question;
    std::string canonical_answer;
    // Accepted surface forms; variants[0] is always the canonical answer.
    std::vector<std::string> variants;
    ReasoningType reasoning_type = ReasoningType::negation;
    AnswerType answer_type = AnswerType::entity;

    bool operator==(const QAPair&) const = default;
};

struct Part {
    std::string narrative;
    int token_count = 0;  // approx tokens; computed from prose when absent
    std::vector<QAPair> qa_pairs;
    // Optional evaluation-corpus annotation: candidate entities mentioned in
    // the narrative. Never shown to provers by the verifier; baseline
    // strategies that "guess an entity" draw from this list.
    std::vector<std::string> entity_annotations;

    bool operator==(const Part&) const = default;
};

// One admission challenge's material: exactly three narrative parts that
// form a single continuing scenario.
struct NarrativeSet {
    std::string domain_id;
    std::vector<Part> parts;

    bool operator==(const NarrativeSet&) const = default;
};

struct Corpus {
    std::vector<DomainDef> domains;
    // sets[i] holds the narrative sets for domains[i].
    std::vector<std::vector<NarrativeSet>> sets;

    const DomainDef* find_domain(std::string_view id) const;
    const std::vector<NarrativeSet>* sets_for(std::string_view domain_id) const;
    std::size_t total_sets() const;
    bool empty() const { return total_sets() == 0; }
};

// The per-session draw: a narrative set plus one chosen question index per
// part. The pointer aliases the Corpus (or another owner) and must not
// outlive it.
struct SessionChallenge {
    const NarrativeSet* set = nullptr;
    std::array<int, 3> chosen_qa{0, 0, 0};
};

struct LoadOptions {
    int max_answer_length = 20;  // code points, per canonical answer/variant
    int min_questions_per_part = 1;
    int max_questions_per_part = 12;
};

class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- JSON parsing / serialization -----------------------------------------

// Structural parse of one narrative-set object: required fields, types, and
// enum names only. Missing "answers" defaults to [answer]; token_count is
// computed from the narrative when absent. Throws CorpusError with a
// location-prefixed message. Bounds (lengths, question counts, part count
// of 3) are enforced separately so generated candidates can be parsed first
// and judged afterwards.
NarrativeSet parse_narrative_set(const nlohmann::json& j,
                                 std::string_view location = {});

// Full invariant check used for serving corpora: exactly 3 parts, question
// counts within bounds, answers within max_answer_length, variants[0] equal
// to the canonical answer, every variant non-empty after trimming, positive
// token counts. Throws CorpusError citing set/part/QA coordinates.
void enforce_set_invariants(const NarrativeSet& set, const LoadOptions& opts,
                            std::string_view location);

nlohmann::json set_to_json(const NarrativeSet& set);
nlohmann::json corpus_to_json(const Corpus& c);

// Loads a corpus from a .json file (one set object, or an array of them) or
// from a directory of such files (sorted by filename). Domains are created
// in first-appearance order; descriptions stay empty unless the id matches
// a catalog entry supplied by the caller. Throws CorpusError on any invalid
// set, citing file/set/part/QA coordinates.
Corpus load_corpus(const std::filesystem::path& path,
                   const LoadOptions& opts = {},
                   const std::vector<DomainDef>* catalog = nullptr);

// Parses corpus JSON previously produced by corpus_to_json (round-trip).
Corpus corpus_from_json(const nlohmann::json& j, const LoadOptions& opts = {});

// --- matching ---------------------------------------------------------------

// True when the submitted text, after normalization, exactly equals any
// normalized accepted variant. No partial credit, no fuzzy matching.
bool answers_match(std::string_view submitted, const QAPair& qa);

// --- sampling ---------------------------------------------------------------

// Uniform draw over eligible sets; optional domain filter. Throws
// std::invalid_argument for an unknown domain, CorpusError when no set is
// eligible.
const NarrativeSet& sample_narrative_set(const Corpus& c,
                                         std::optional<std::string_view> domain,
                                         Rng& rng);

// Picks one question per part, each independently uniform over that part's
// QA pairs.
SessionChallenge assemble_challenge(const NarrativeSet& set, Rng& rng);

// --- bookkeeping ------------------------------------------------------------

// Number of distinct challenge configurations for D domains of N sets when
// every part has q questions: D * N * q^3. Throws std::invalid_argument on
// non-positive arguments or overflow.
std::int64_t config_count(int domains, int sets_per_domain,
                          int questions_per_part);

// Whitespace-word count divided by words_per_token, rounded up.
int approx_token_count(std::string_view prose, double words_per_token = 0.75);

}  // namespace agentgate::corpus
