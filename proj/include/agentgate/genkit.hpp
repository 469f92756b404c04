#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "agentgate/completion.hpp"
#include "agentgate/corpus.hpp"

namespace agentgate::genkit {

// Bounds handed to the generation prompt and enforced by the validator.
struct GenParams {
    int min_narrative_tokens = 350;
    int max_narrative_tokens = 1150;
    int total_min_tokens = 1050;
    int total_max_tokens = 3450;
    int min_entities = 4;
    int max_entities = 6;
    int min_misleading_paragraphs = 1;
    int min_numeric_values = 3;
    int min_info_pieces = 3;
    int min_questions = 3;
    int max_questions = 3;
    int max_answer_length = 20;
    int min_reasoning_types = 3;

    // Throws std::invalid_argument: all positive, mins <= maxes.
    void validate() const;

    static GenParams from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

class GenParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The five challenge domains, one per OECD FORD major field 1-5 (field 6,
// Humanities & the Arts, fails the entity-density / determinism criteria
// and is excluded by design).
const std::vector<corpus::DomainDef>& domain_catalog();

// Fills every $-placeholder in the generation prompt template from params
// and appends the domain suffix (description, entity examples, reasoning
// patterns). Throws std::logic_error if any placeholder would survive.
std::string build_generation_prompt(const GenParams& params,
                                    const corpus::DomainDef& domain);

// Strict parse of generator output: bare JSON only (no markdown fences or
// surrounding prose), required fields, valid enums, exactly 3 parts.
// Quantitative bounds are validate_generated's job, so a structurally sound
// but out-of-spec candidate parses fine and gets judged afterwards.
// Throws GenParseError.
corpus::NarrativeSet parse_generated(std::string_view text);

struct ValidationIssue {
    std::string rule;      // stable rule id, e.g. "answer_length"
    std::string location;  // "part 2, qa 1" style coordinates
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> violations;
    // Rules that cannot be checked mechanically from the text (misleading
    // paragraph, information scattering) — they need human or model review.
    std::vector<std::string> advisories;

    bool ok() const { return violations.empty(); }
};

// Checks every mechanically checkable structural rule; never throws on
// content (bad content just becomes violations).
ValidationReport validate_generated(const corpus::NarrativeSet& set,
                                    const GenParams& params);

struct CrossValidationEntry {
    int part = 0;  // 1..3
    int qa = 0;    // index within the part
    bool keep = true;
    std::string model_answer;
};

struct CrossValidationReport {
    std::vector<CrossValidationEntry> entries;

    int discarded() const {
        int n = 0;
        for (const auto& e : entries) {
            if (!e.keep) ++n;
        }
        return n;
    }
};

// Asks an independent model every question against the narrative prefix it
// would legitimately see (parts 1..i). A QA whose model answer fails the
// normalized match is flagged "ambiguous — discard". The set itself is
// never mutated. Endpoint failures propagate as CompletionError.
CrossValidationReport cross_validate(const corpus::NarrativeSet& set,
                                     CompletionClient& client);

// Deterministic offline three-part fixture set: named candidate entities
// with scattered attributes, one revised preliminary conclusion per part,
// numeric distractors, and exact short answers. Built to pass
// validate_generated under the same params. These narratives exist for
// protocol tests; no claim is made about their resistance to human or
// scripted solvers.
corpus::NarrativeSet synth_fixture_set(std::uint64_t seed,
                                       const GenParams& params = {});

}  // namespace agentgate::genkit
