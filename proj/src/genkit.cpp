#include "agentgate/genkit.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "agentgate/normalize.hpp"

namespace agentgate::genkit {

using corpus::AnswerType;
using corpus::DomainDef;
using corpus::NarrativeSet;
using corpus::Part;
using corpus::QAPair;
using corpus::ReasoningType;
using nlohmann::json;

void GenParams::validate() const {
    auto positive = [](int v, const char* name) {
        if (v < 1) {
            throw std::invalid_argument(std::string("GenParams: ") + name +
                                        " must be >= 1");
        }
    };
    positive(min_narrative_tokens, "min_narrative_tokens");
    positive(max_narrative_tokens, "max_narrative_tokens");
    positive(total_min_tokens, "total_min_tokens");
    positive(total_max_tokens, "total_max_tokens");
    positive(min_entities, "min_entities");
    positive(max_entities, "max_entities");
    positive(min_misleading_paragraphs, "min_misleading_paragraphs");
    positive(min_numeric_values, "min_numeric_values");
    positive(min_info_pieces, "min_info_pieces");
    positive(min_questions, "min_questions");
    positive(max_questions, "max_questions");
    positive(max_answer_length, "max_answer_length");
    positive(min_reasoning_types, "min_reasoning_types");
    auto ordered = [](int lo, int hi, const char* what) {
        if (lo > hi) {
            throw std::invalid_argument(std::string("GenParams: ") + what +
                                        " range inverted");
        }
    };
    ordered(min_narrative_tokens, max_narrative_tokens, "narrative token");
    ordered(total_min_tokens, total_max_tokens, "total token");
    ordered(min_entities, max_entities, "entity count");
    ordered(min_questions, max_questions, "question count");
}

GenParams GenParams::from_json(const json& j) {
    GenParams p;
    auto integer = [&j](const char* key, int& out) {
        if (auto it = j.find(key); it != j.end()) out = it->get<int>();
    };
    integer("min_narrative_tokens", p.min_narrative_tokens);
    integer("max_narrative_tokens", p.max_narrative_tokens);
    integer("total_min_tokens", p.total_min_tokens);
    integer("total_max_tokens", p.total_max_tokens);
    integer("min_entities", p.min_entities);
    integer("max_entities", p.max_entities);
    integer("min_misleading_paragraphs", p.min_misleading_paragraphs);
    integer("min_numeric_values", p.min_numeric_values);
    integer("min_info_pieces", p.min_info_pieces);
    integer("min_questions", p.min_questions);
    integer("max_questions", p.max_questions);
    integer("max_answer_length", p.max_answer_length);
    integer("min_reasoning_types", p.min_reasoning_types);
    p.validate();
    return p;
}

json GenParams::to_json() const {
    return json{{"min_narrative_tokens", min_narrative_tokens},
                {"max_narrative_tokens", max_narrative_tokens},
                {"total_min_tokens", total_min_tokens},
                {"total_max_tokens", total_max_tokens},
                {"min_entities", min_entities},
                {"max_entities", max_entities},
                {"min_misleading_paragraphs", min_misleading_paragraphs},
                {"min_numeric_values", min_numeric_values},
                {"min_info_pieces", min_info_pieces},
                {"min_questions", min_questions},
                {"max_questions", max_questions},
                {"max_answer_length", max_answer_length},
                {"min_reasoning_types", min_reasoning_types}};
}

const std::vector<DomainDef>& domain_catalog() {
    static const std::vector<DomainDef> catalog = {
        {"biochemistry",
         "Biochemistry",
         "1. Natural Sci.",
         "Enzyme kinetics, assay results, inhibitor profiles, metabolic "
         "pathways",
         {"Enzymes", "compounds", "metabolic intermediates",
          "receptor subtypes"},
         {"Kinetic anomaly persistence", "inhibition mechanism attribution",
          "replicate confirmation"}},
        {"cybersecurity",
         "Cybersecurity",
         "2. Eng. & Tech.",
         "Threat intelligence, vulnerability analysis, incident response, "
         "network forensics",
         {"CVEs", "IP addresses", "malware families", "attack vectors",
          "threat actors"},
         {"Attack attribution", "false positive elimination",
          "lateral movement tracing"}},
        {"clinical_trials",
         "Clinical Trials",
         "3. Medical",
         "Drug efficacy, adverse events, patient cohorts, endpoint analysis",
         {"Drug candidates", "adverse events", "patient subgroups",
          "biomarkers"},
         {"Efficacy signal vs. confounding", "adverse event attribution",
          "subgroup analysis"}},
        {"food_safety",
         "Food Safety",
         "4. Agricultural",
         "Contaminant screening, microbiological testing, batch "
         "traceability, regulatory compliance",
         {"Pathogens", "chemical residues", "food batches", "testing methods",
          "tolerance limits"},
         {"Contamination source tracing", "threshold exceedance attribution",
          "cross-batch comparison"}},
        {"financial_markets",
         "Financial Markets",
         "5. Social Sci.",
         "Macroeconomic indicators, equity indices, yield curves, credit "
         "spreads",
         {"Economic indicators", "funds", "currency pairs", "sector indices"},
         {"Sustained deviation vs. noise", "trend reversal attribution",
          "cross-market correlation"}},
    };
    return catalog;
}

namespace {

constexpr std::string_view kPromptTemplate =
    R"PROMPT(# Generate Three-Part NLU Challenge.

Generate a three-part narrative sequence in the specified domain. The challenge must satisfy three properties:

1. A capable LLM agent can answer correctly through careful reading and reasoning.
2. A script without NLU cannot extract the answer through pattern matching, regex, or keyword search.
3. A human cannot answer within the time budget due to information density and working memory demands.

## Three-Part Structure

- **Part 1**: Standalone technical narrative. Answerable from Part 1 text alone.
- **Part 2**: Follow-up that references Part 1's findings via **anaphoric expressions** (e.g., "the enzyme previously identified as anomalous"). May build on, contradict, or reuse Part 1's conclusions. Questions require knowing Part 1's answers.
- **Part 3**: Synthesis referencing **both** prior parts via indirect references. Questions require both prior answers.

Parts 2 and 3 must NEVER explicitly state prior answers — only indirect references that require prior knowledge to resolve.

## Per-Part Narrative Constraints

Each part: **$min_narrative_tokens–$max_narrative_tokens tokens**. Total: ${total_min_tokens}–${total_max_tokens} tokens.

1. **Entity density**: $min_entities–$max_entities candidate entities. ALL described in positive/neutral terms — no explicit labels ("confirmed", "ruled out", "target", "most likely"). Distinctions must be IMPLICIT through temporal persistence, replication scope, causal attribution, or deviation scope.
2. **Misleading content**: ≥$min_misleading_paragraphs paragraph(s) per part presenting a preliminary conclusion later contradicted or revised.
3. **Numeric embedding**: ≥$min_numeric_values numeric values per part naturally in prose; mix of relevant and distractor.
4. **Information scattering**: Key info across ≥$min_info_pieces non-adjacent paragraphs. Each answer requires multi-paragraph synthesis.
5. **Format variety**: Vary document format freely (lab report, memo, audit log, email thread, field notes, incident report, etc.). Parts may use different formats.
6. **Anti-parsing**: Use synonyms/paraphrases for key terms; refer to same entity by different names across paragraphs; embed info in subordinate clauses; use domain jargon requiring comprehension.

## Questions

**$min_questions–$max_questions questions per part**. Each must:
- Require multi-step reasoning, not keyword search
- Have exactly ONE deterministic, unambiguous answer (short string, ≤$max_answer_length chars)
- Describe WHAT to find semantically, not WHERE in the text
- Use a different reasoning type from others in the same part

Answer type diversity per part: ≥1 entity name, ≥1 numeric value, ≥1 label/classification.

Reasoning types (≥$min_reasoning_types per part): `negation`, `comparison`, `temporal`, `multi_hop`, `conditional`, `causal`.

## Answer Format Rules

Each question MUST include an `answers` array listing ALL acceptable answer variants (2–5 entries). The first entry is the canonical answer (also stored in `answer`). Include variants that a capable reader might reasonably produce:

- **Entity names**: Include the abbreviated identifier AND the full name as used in the narrative. If the name contains a Greek letter (e.g., α, ε, γ), include both the Unicode form and the ASCII spelled-out form.
  - Example: `["LDH-γ", "LDH-gamma", "lactate dehydrogenase gamma"]`
  - Example: `["HK-II", "HK-2", "hexokinase II", "hexokinase type II"]`
- **Numeric values**: If the answer is a number that appears with units in the narrative, include both the bare number and the number with its unit. For percentages, include both with and without the `%` sign.
  - Example: `["18.6", "18.6 µM", "18.6 uM"]`
  - Example: `["67", "67%"]`
- **Labels/classifications**: Include the primary term. If the narrative uses synonyms or longer phrasing, include those.
  - Example: `["uncompetitive", "uncompetitive inhibition"]`
  - Example: `["buffer pH", "pH"]`

IMPORTANT: The `answer` field must match the FIRST entry in `answers`. Keep all entries ≤$max_answer_length chars. Avoid overly permissive variants — only include forms a careful reader would produce.

## Output

Return ONLY a JSON object (no markdown fences, no extra text):

{
  "domain": "<domain_name>",
  "parts": [
    {
      "narrative": "<Part N text>",
      "questions": [
        {
          "question": "<reasoning question>",
          "answer": "<canonical short answer, max $max_answer_length chars>",
          "answers": ["<canonical>", "<variant1>", "<variant2>"],
          "reasoning_type": "<negation|comparison|temporal|multi_hop|conditional|causal>",
          "answer_type": "<entity|numeric|label>"
        }
      ]
    }
  ]
}
)PROMPT";

void replace_all(std::string& text, std::string_view needle,
                 std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += ", ";
        out += items[i];
    }
    return out;
}

}  // namespace

std::string build_generation_prompt(const GenParams& params,
                                    const DomainDef& domain) {
    params.validate();

    std::vector<std::pair<std::string, int>> values = {
        {"min_narrative_tokens", params.min_narrative_tokens},
        {"max_narrative_tokens", params.max_narrative_tokens},
        {"total_min_tokens", params.total_min_tokens},
        {"total_max_tokens", params.total_max_tokens},
        {"min_entities", params.min_entities},
        {"max_entities", params.max_entities},
        {"min_misleading_paragraphs", params.min_misleading_paragraphs},
        {"min_numeric_values", params.min_numeric_values},
        {"min_info_pieces", params.min_info_pieces},
        {"min_questions", params.min_questions},
        {"max_questions", params.max_questions},
        {"max_answer_length", params.max_answer_length},
        {"min_reasoning_types", params.min_reasoning_types},
    };
    // Longest name first so no placeholder is clobbered by a prefix of it.
    std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
        return a.first.size() > b.first.size();
    });

    std::string text(kPromptTemplate);
    for (const auto& [name, value] : values) {
        std::string v = std::to_string(value);
        replace_all(text, "${" + name + "}", v);
        replace_all(text, "$" + name, v);
    }

    // A surviving placeholder means the template and the parameter set have
    // drifted apart; that is a programming error, not bad input.
    std::size_t pos = 0;
    while ((pos = text.find('$', pos)) != std::string::npos) {
        if (pos + 1 < text.size()) {
            char c = text[pos + 1];
            if (c == '{' || c == '_' || (c >= 'a' && c <= 'z')) {
                throw std::logic_error(
                    "build_generation_prompt: unsubstituted placeholder at "
                    "offset " +
                    std::to_string(pos));
            }
        }
        ++pos;
    }

    std::ostringstream suffix;
    suffix << "\n## Domain\n\n"
           << domain.description << "\n\n"
           << "Typical entities in this domain: "
           << join(domain.entity_examples) << "\n\n"
           << "Typical reasoning patterns: " << join(domain.reasoning_examples)
           << "\n";
    return text + suffix.str();
}

NarrativeSet parse_generated(std::string_view text) {
    std::string_view body = trim(text);
    if (body.empty()) throw GenParseError("empty generator output");
    if (body.starts_with("```")) {
        throw GenParseError(
            "output is wrapped in markdown fences; expected a bare JSON "
            "object");
    }
    if (body.front() != '{') {
        throw GenParseError("output must start with a bare JSON object");
    }
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw GenParseError(std::string("output is not valid JSON: ") +
                            e.what());
    }
    NarrativeSet set;
    try {
        set = corpus::parse_narrative_set(j, "generated set");
    } catch (const corpus::CorpusError& e) {
        throw GenParseError(e.what());
    }
    if (set.parts.size() != 3) {
        throw GenParseError("expected exactly 3 parts, got " +
                            std::to_string(set.parts.size()));
    }
    return set;
}

namespace {

bool valid_reasoning(ReasoningType t) {
    switch (t) {
        case ReasoningType::negation:
        case ReasoningType::comparison:
        case ReasoningType::temporal:
        case ReasoningType::multi_hop:
        case ReasoningType::conditional:
        case ReasoningType::causal:
            return true;
    }
    return false;
}

bool valid_answer_type(AnswerType t) {
    switch (t) {
        case AnswerType::entity:
        case AnswerType::numeric:
        case AnswerType::label:
            return true;
    }
    return false;
}

std::string part_loc(std::size_t pi) {
    return "part " + std::to_string(pi + 1);
}

std::string qa_loc(std::size_t pi, std::size_t qi) {
    return part_loc(pi) + ", qa " + std::to_string(qi);
}

}  // namespace

ValidationReport validate_generated(const NarrativeSet& set,
                                    const GenParams& params) {
    params.validate();
    ValidationReport report;
    auto violation = [&report](std::string rule, std::string location,
                               std::string detail) {
        report.violations.push_back(
            {std::move(rule), std::move(location), std::move(detail)});
    };

    if (set.parts.size() != 3) {
        violation("part_count", "set",
                  "expected 3 parts, got " + std::to_string(set.parts.size()));
    }

    int total_tokens = 0;
    for (std::size_t pi = 0; pi < set.parts.size(); ++pi) {
        const Part& part = set.parts[pi];

        int tokens = corpus::approx_token_count(part.narrative);
        total_tokens += tokens;
        if (tokens < params.min_narrative_tokens ||
            tokens > params.max_narrative_tokens) {
            violation("part_token_range", part_loc(pi),
                      "narrative is ~" + std::to_string(tokens) +
                          " tokens, outside [" +
                          std::to_string(params.min_narrative_tokens) + ", " +
                          std::to_string(params.max_narrative_tokens) + "]");
        }

        int nq = static_cast<int>(part.qa_pairs.size());
        if (nq < params.min_questions || nq > params.max_questions) {
            violation("question_count", part_loc(pi),
                      std::to_string(nq) + " questions, outside [" +
                          std::to_string(params.min_questions) + ", " +
                          std::to_string(params.max_questions) + "]");
        }

        bool has_entity = false, has_numeric = false, has_label = false;
        std::set<ReasoningType> reasoning_seen;
        for (std::size_t qi = 0; qi < part.qa_pairs.size(); ++qi) {
            const QAPair& qa = part.qa_pairs[qi];

            if (!valid_reasoning(qa.reasoning_type) ||
                !valid_answer_type(qa.answer_type)) {
                violation("enum_valid", qa_loc(pi, qi),
                          "reasoning_type or answer_type outside the "
                          "recognized values");
            } else {
                reasoning_seen.insert(qa.reasoning_type);
                has_entity |= qa.answer_type == AnswerType::entity;
                has_numeric |= qa.answer_type == AnswerType::numeric;
                has_label |= qa.answer_type == AnswerType::label;
            }

            if (qa.variants.empty() ||
                qa.variants.front() != qa.canonical_answer) {
                violation("variant_first", qa_loc(pi, qi),
                          "answers[0] must equal the canonical answer");
            }
            for (const std::string& v : qa.variants) {
                if (trim(v).empty()) {
                    violation("variant_first", qa_loc(pi, qi),
                              "blank answer variant");
                    continue;
                }
                auto len = codepoint_count(v);
                if (len > static_cast<std::size_t>(params.max_answer_length)) {
                    violation("answer_length", qa_loc(pi, qi),
                              "variant '" + v + "' is " + std::to_string(len) +
                                  " characters, max " +
                                  std::to_string(params.max_answer_length));
                }
            }
            if (qa.variants.empty()) {
                auto len = codepoint_count(qa.canonical_answer);
                if (len > static_cast<std::size_t>(params.max_answer_length)) {
                    violation("answer_length", qa_loc(pi, qi),
                              "canonical answer is " + std::to_string(len) +
                                  " characters, max " +
                                  std::to_string(params.max_answer_length));
                }
            }
        }

        if (!part.qa_pairs.empty()) {
            if (!(has_entity && has_numeric && has_label)) {
                violation("answer_type_diversity", part_loc(pi),
                          "need at least one entity, one numeric and one "
                          "label answer");
            }
            if (static_cast<int>(reasoning_seen.size()) <
                params.min_reasoning_types) {
                violation("reasoning_diversity", part_loc(pi),
                          std::to_string(reasoning_seen.size()) +
                              " distinct reasoning types, need >= " +
                              std::to_string(params.min_reasoning_types));
            }
        }
    }

    if (total_tokens < params.total_min_tokens ||
        total_tokens > params.total_max_tokens) {
        violation("total_token_range", "set",
                  "set is ~" + std::to_string(total_tokens) +
                      " tokens, outside [" +
                      std::to_string(params.total_min_tokens) + ", " +
                      std::to_string(params.total_max_tokens) + "]");
    }

    report.advisories = {
        "misleading_content: >= " +
            std::to_string(params.min_misleading_paragraphs) +
            " revised preliminary conclusion(s) per part cannot be checked "
            "mechanically; needs reviewer or model judgment",
        "info_scattering: key information spread over >= " +
            std::to_string(params.min_info_pieces) +
            " non-adjacent paragraphs cannot be checked mechanically; needs "
            "reviewer or model judgment",
        "entity_density: " + std::to_string(params.min_entities) + "-" +
            std::to_string(params.max_entities) +
            " uniformly positive candidate entities cannot be checked "
            "mechanically; needs reviewer or model judgment",
    };
    return report;
}

CrossValidationReport cross_validate(const NarrativeSet& set,
                                     CompletionClient& client) {
    CrossValidationReport report;
    std::string prefix;
    for (std::size_t pi = 0; pi < set.parts.size(); ++pi) {
        if (pi > 0) prefix += "\n\n";
        prefix += set.parts[pi].narrative;
        for (std::size_t qi = 0; qi < set.parts[pi].qa_pairs.size(); ++qi) {
            const QAPair& qa = set.parts[pi].qa_pairs[qi];
            std::vector<ChatMessage> messages = {
                {"system",
                 "You are validating reading-comprehension questions. Read "
                 "the narrative and answer with the shortest exact answer "
                 "string. No explanation, no punctuation around the answer."},
                {"user", prefix + "\n\nQuestion: " + qa.question},
            };
            std::string raw = client.complete(messages);
            std::string_view first = trim(raw);
            if (auto nl = first.find('\n'); nl != std::string_view::npos) {
                first = trim(first.substr(0, nl));
            }
            CrossValidationEntry entry;
            entry.part = static_cast<int>(pi) + 1;
            entry.qa = static_cast<int>(qi);
            entry.model_answer = std::string(first);
            entry.keep = corpus::answers_match(first, qa);
            report.entries.push_back(std::move(entry));
        }
    }
    return report;
}

// --- deterministic fixture generator ---------------------------------------

namespace {

const std::vector<std::string>& name_prefixes() {
    static const std::vector<std::string> v = {"AXR", "BLN", "CRV", "DMT",
                                               "ENF", "FSK", "GRD", "HLX",
                                               "JTR", "KVS", "LMD", "NRT"};
    return v;
}

const std::vector<std::string>& tier_labels() {
    static const std::vector<std::string> v = {"amber",  "crimson", "cobalt",
                                               "ivory",  "umber",   "viridian"};
    return v;
}

const std::vector<std::string>& filler_sentences() {
    static const std::vector<std::string> v = {
        "Ambient humidity in the instrument bay stayed between 41% and 46% "
        "for the duration of the campaign, well inside the qualification "
        "envelope recorded during commissioning.",
        "The acquisition chain was operated from the secondary console "
        "because the primary console was reserved for the firmware "
        "regression window scheduled by the maintenance group.",
        "Chain-of-custody stamps were applied to every raw capture before "
        "transfer to cold storage, and the archival checksums were verified "
        "twice by independent operators.",
        "Reference cells were rotated according to the quarterly plan, with "
        "cell 7 retired at mid-campaign after reaching its cumulative "
        "exposure allowance.",
        "Power conditioning logs show two brownout notifications, both "
        "absorbed by the line-interactive units without any measurable "
        "disturbance on the supervised channels.",
        "The review board noted that documentation for the auxiliary "
        "manifold lagged one revision behind the deployed hardware and "
        "opened a tracking item to reconcile the drawings.",
        "Thermal mapping of the enclosure repeated the pattern seen in "
        "previous quarters: a mild gradient toward the cable gland plate "
        "with no excursion past the amber watch limit.",
        "Operator shift notes describe routine handovers, one rescheduled "
        "calibration slot, and no deviations from the approved run sheet "
        "beyond those catalogued above.",
        "Spares consumption remained nominal; only one pre-amplifier module "
        "was exchanged, and the exchanged unit passed its bench check after "
        "connector re-seating.",
        "Network telemetry from the logging subnet recorded no packet loss "
        "events larger than the burst allowance, and clock discipline stayed "
        "within a millisecond of the site reference.",
    };
    return v;
}

std::string number_word(int n) {
    static const char* words[] = {"zero", "one", "two",   "three", "four",
                                  "five", "six", "seven", "eight", "nine"};
    if (n >= 0 && n <= 9) return words[n];
    return std::to_string(n);
}

template <typename T>
const T& pick(const std::vector<T>& pool, Rng& rng) {
    std::uniform_int_distribution<std::size_t> d(0, pool.size() - 1);
    return pool[d(rng)];
}

int pick_int(int lo, int hi, Rng& rng) {
    std::uniform_int_distribution<int> d(lo, hi);
    return d(rng);
}

std::string anaphoric_reference(int part_index) {
    if (part_index == 1) {
        return "the unit isolated by the initial replication review";
    }
    return "the units singled out in the two preceding reviews";
}

}  // namespace

NarrativeSet synth_fixture_set(std::uint64_t seed, const GenParams& params) {
    params.validate();
    if (params.max_questions < 3) {
        throw std::invalid_argument(
            "synth_fixture_set: needs room for 3 questions per part (one "
            "entity, one numeric, one label)");
    }

    Rng rng(derive_subseed(seed, 0xa6e17f));

    // Build a stable roster of unit names; each part answers with a
    // different unit and drops it from the follow-up roster, so later parts
    // can reference it anaphorically without restating it.
    int k1 = std::clamp(params.min_entities + 2, params.min_entities,
                        params.max_entities);
    std::vector<std::string> roster;
    {
        std::vector<std::string> prefixes = name_prefixes();
        std::shuffle(prefixes.begin(), prefixes.end(), rng);
        for (int i = 0; i < k1 + 3 && i < static_cast<int>(prefixes.size());
             ++i) {
            roster.push_back(prefixes[static_cast<std::size_t>(i)] + "-" +
                             std::to_string(pick_int(10, 89, rng)));
        }
    }
    std::vector<std::string> active(roster.begin(), roster.begin() + k1);
    std::vector<std::string> reserve(roster.begin() + k1, roster.end());

    std::vector<std::string> tiers = tier_labels();
    std::shuffle(tiers.begin(), tiers.end(), rng);

    NarrativeSet set;
    set.domain_id = "synthetic_diagnostics";

    static const char* kPartFormats[3] = {"FIELD SCREENING MEMO",
                                          "FOLLOW-UP AUDIT LOG",
                                          "SYNTHESIS REVIEW NOTE"};

    for (int p = 0; p < 3; ++p) {
        // Keep the candidate pool inside the declared density bounds.
        while (static_cast<int>(active.size()) < params.min_entities &&
               !reserve.empty()) {
            active.push_back(reserve.back());
            reserve.pop_back();
        }
        if (static_cast<int>(active.size()) > params.max_entities) {
            active.resize(static_cast<std::size_t>(params.max_entities));
        }

        std::size_t answer_idx = static_cast<std::size_t>(
            pick_int(0, static_cast<int>(active.size()) - 1, rng));
        std::string answer_unit = active[answer_idx];
        std::size_t decoy_idx = static_cast<std::size_t>(
            pick_int(0, static_cast<int>(active.size()) - 1, rng));
        if (decoy_idx == answer_idx) {
            decoy_idx = (decoy_idx + 1) % active.size();
        }
        std::string decoy_unit = active[decoy_idx];

        int n_rep = pick_int(3, 6, rng);
        std::string tier = tiers[static_cast<std::size_t>(p)];
        int drift_pct = pick_int(2, 9, rng);
        int baseline = pick_int(110, 480, rng);
        int run_base = pick_int(2100, 7900, rng);

        std::ostringstream prose;
        prose << kPartFormats[p] << " — screening campaign segment "
              << (p + 1) << " of 3.\n\n";

        if (p == 0) {
            prose << "The campaign placed " << active.size()
                  << " monitored units under a common acquisition plan: ";
        } else {
            prose << "Following the removal of "
                  << anaphoric_reference(p)
                  << " from the active roster for bench investigation, the "
                     "continuing plan covered "
                  << active.size() << " units: ";
        }
        for (std::size_t i = 0; i < active.size(); ++i) {
            if (i > 0) prose << (i + 1 == active.size() ? " and " : ", ");
            prose << active[i];
        }
        prose << ". Each unit entered the segment with a clean acceptance "
                 "record and a baseline reading near "
              << baseline
              << " counts, and the run ledger for the segment opened at "
                 "sequence "
              << run_base << ".\n\n";

        prose << "Observations accumulated evenly across the roster. ";
        for (std::size_t i = 0; i < active.size(); ++i) {
            const std::string& unit = active[i];
            if (i == answer_idx) {
                prose << unit
                      << " registered a small offset during the first pass, "
                         "and the same offset reappeared in every one of the "
                      << number_word(n_rep)
                      << " independent replicate runs commissioned for the "
                         "segment. ";
            } else {
                switch (i % 4) {
                    case 0:
                        prose << unit
                              << " produced one early excursion that "
                                 "self-corrected before the replicate series "
                                 "began and never returned. ";
                        break;
                    case 1:
                        prose << unit
                              << " tracked its baseline within tolerance "
                                 "once the fixture seating was re-torqued "
                                 "during the scheduled pause. ";
                        break;
                    case 2:
                        prose << unit
                              << " showed a single-run deviation that the "
                                 "bench log attributes to a transient supply "
                                 "dip, absent from all later passes. ";
                        break;
                    default:
                        prose << unit
                              << " stayed baseline-normal on every re-test "
                                 "and required no annotation beyond the "
                                 "routine ledger entry. ";
                        break;
                }
            }
        }
        prose << "\n\n";

        prose << "An interim note circulated midway through the segment "
                 "attributed the recurring offset to "
              << decoy_unit << ", citing " << drift_pct
              << "% calibration drift on its reference channel. The "
                 "attribution was withdrawn in the following shift after the "
                 "drift self-corrected on re-test and the offset continued "
                 "to appear elsewhere.\n\n";

        prose << "At segment close the review board assigned the " << tier
              << " tier to the unit whose deviation had persisted across "
                 "the full replicate series, noting that "
              << number_word(n_rep)
              << " independent confirmations exceeded the two-run minimum "
                 "that site policy requires before any tier is recorded.\n\n";

        // Pad with neutral QC prose until the part clears the declared
        // minimum length. Plenty of headroom remains below the maximum.
        std::string narrative = prose.str();
        const auto& fillers = filler_sentences();
        std::size_t fi =
            static_cast<std::size_t>(pick_int(0, static_cast<int>(fillers.size()) - 1, rng));
        while (corpus::approx_token_count(narrative) <
               params.min_narrative_tokens) {
            narrative += fillers[fi % fillers.size()];
            narrative += ' ';
            ++fi;
        }
        if (corpus::approx_token_count(narrative) >
            params.max_narrative_tokens) {
            throw std::logic_error(
                "synth_fixture_set: generated part exceeds the maximum "
                "narrative length; widen the token bounds");
        }

        Part part;
        part.narrative = narrative;
        part.token_count = corpus::approx_token_count(narrative);
        part.entity_annotations = active;

        std::string hyphenless = answer_unit;
        hyphenless.erase(std::remove(hyphenless.begin(), hyphenless.end(), '-'),
                         hyphenless.end());

        static const std::vector<ReasoningType> entity_pool = {
            ReasoningType::negation, ReasoningType::multi_hop,
            ReasoningType::causal};
        static const std::vector<ReasoningType> numeric_pool = {
            ReasoningType::comparison, ReasoningType::temporal,
            ReasoningType::conditional};
        ReasoningType rt_entity = pick(entity_pool, rng);
        ReasoningType rt_numeric = pick(numeric_pool, rng);
        std::vector<ReasoningType> rest;
        for (ReasoningType t :
             {ReasoningType::negation, ReasoningType::comparison,
              ReasoningType::temporal, ReasoningType::multi_hop,
              ReasoningType::conditional, ReasoningType::causal}) {
            if (t != rt_entity && t != rt_numeric) rest.push_back(t);
        }
        ReasoningType rt_label = pick(rest, rng);

        QAPair q_entity;
        q_entity.question =
            "Which monitored unit showed the offset that persisted through "
            "every independent replicate run while all other flagged "
            "readings were explained away?";
        q_entity.canonical_answer = answer_unit;
        q_entity.variants = {answer_unit, hyphenless};
        q_entity.reasoning_type = rt_entity;
        q_entity.answer_type = AnswerType::entity;

        QAPair q_numeric;
        q_numeric.question =
            "How many independent replicate runs confirmed the persistent "
            "offset in this segment?";
        q_numeric.canonical_answer = std::to_string(n_rep);
        q_numeric.variants = {std::to_string(n_rep), number_word(n_rep)};
        q_numeric.reasoning_type = rt_numeric;
        q_numeric.answer_type = AnswerType::numeric;

        QAPair q_label;
        q_label.question =
            "Which alert tier did the review board record for the unit "
            "whose deviation survived the full replicate series?";
        q_label.canonical_answer = tier;
        q_label.variants = {tier, tier + " tier"};
        q_label.reasoning_type = rt_label;
        q_label.answer_type = AnswerType::label;

        part.qa_pairs = {std::move(q_entity), std::move(q_numeric),
                         std::move(q_label)};
        set.parts.push_back(std::move(part));

        active.erase(active.begin() + static_cast<std::ptrdiff_t>(answer_idx));
    }

    return set;
}

}  // namespace agentgate::genkit
