#include "agentgate/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "agentgate/normalize.hpp"

namespace agentgate::corpus {

using nlohmann::json;

namespace {

[[noreturn]] void fail(std::string_view location, std::string_view what) {
    std::string msg;
    if (!location.empty()) {
        msg.append(location);
        msg.append(": ");
    }
    msg.append(what);
    throw CorpusError(msg);
}

std::string locate(std::string_view base, std::string_view element, int idx) {
    std::ostringstream os;
    if (!base.empty()) os << base << ", ";
    os << element << ' ' << idx;
    return os.str();
}

const json& require_field(const json& j, const char* key,
                          std::string_view location) {
    auto it = j.find(key);
    if (it == j.end()) {
        fail(location, std::string("missing field '") + key + "'");
    }
    return *it;
}

std::string require_string(const json& j, const char* key,
                           std::string_view location) {
    const json& v = require_field(j, key, location);
    if (!v.is_string()) {
        fail(location, std::string("field '") + key + "' must be a string");
    }
    return v.get<std::string>();
}

}  // namespace

std::string_view to_string(ReasoningType t) {
    switch (t) {
        case ReasoningType::negation: return "negation";
        case ReasoningType::comparison: return "comparison";
        case ReasoningType::temporal: return "temporal";
        case ReasoningType::multi_hop: return "multi_hop";
        case ReasoningType::conditional: return "conditional";
        case ReasoningType::causal: return "causal";
    }
    return "unknown";
}

std::string_view to_string(AnswerType t) {
    switch (t) {
        case AnswerType::entity: return "entity";
        case AnswerType::numeric: return "numeric";
        case AnswerType::label: return "label";
    }
    return "unknown";
}

ReasoningType reasoning_type_from_string(std::string_view s) {
    if (s == "negation") return ReasoningType::negation;
    if (s == "comparison") return ReasoningType::comparison;
    if (s == "temporal") return ReasoningType::temporal;
    if (s == "multi_hop") return ReasoningType::multi_hop;
    if (s == "conditional") return ReasoningType::conditional;
    if (s == "causal") return ReasoningType::causal;
    throw std::invalid_argument("unknown reasoning_type: " + std::string(s));
}

AnswerType answer_type_from_string(std::string_view s) {
    if (s == "entity") return AnswerType::entity;
    if (s == "numeric") return AnswerType::numeric;
    if (s == "label") return AnswerType::label;
    throw std::invalid_argument("unknown answer_type: " + std::string(s));
}

const DomainDef* Corpus::find_domain(std::string_view id) const {
    for (const auto& d : domains) {
        if (d.id == id) return &d;
    }
    return nullptr;
}

const std::vector<NarrativeSet>* Corpus::sets_for(
    std::string_view domain_id) const {
    for (std::size_t i = 0; i < domains.size(); ++i) {
        if (domains[i].id == domain_id) return &sets[i];
    }
    return nullptr;
}

std::size_t Corpus::total_sets() const {
    std::size_t n = 0;
    for (const auto& v : sets) n += v.size();
    return n;
}

NarrativeSet parse_narrative_set(const json& j, std::string_view location) {
    if (!j.is_object()) fail(location, "narrative set must be a JSON object");
    NarrativeSet set;
    set.domain_id = require_string(j, "domain", location);
    if (set.domain_id.empty()) fail(location, "'domain' must be non-empty");

    const json& parts = require_field(j, "parts", location);
    if (!parts.is_array()) fail(location, "'parts' must be an array");

    for (std::size_t pi = 0; pi < parts.size(); ++pi) {
        std::string ploc = locate(location, "part", static_cast<int>(pi) + 1);
        const json& pj = parts[pi];
        if (!pj.is_object()) fail(ploc, "part must be a JSON object");
        Part part;
        part.narrative = require_string(pj, "narrative", ploc);
        if (auto it = pj.find("token_count"); it != pj.end()) {
            if (!it->is_number_integer()) {
                fail(ploc, "'token_count' must be an integer");
            }
            part.token_count = it->get<int>();
        } else {
            part.token_count = approx_token_count(part.narrative);
        }
        if (auto it = pj.find("entities"); it != pj.end()) {
            if (!it->is_array()) fail(ploc, "'entities' must be an array");
            for (const auto& e : *it) {
                if (!e.is_string()) fail(ploc, "'entities' must hold strings");
                part.entity_annotations.push_back(e.get<std::string>());
            }
        }

        const json& questions = require_field(pj, "questions", ploc);
        if (!questions.is_array()) fail(ploc, "'questions' must be an array");
        for (std::size_t qi = 0; qi < questions.size(); ++qi) {
            std::string qloc = locate(ploc, "qa", static_cast<int>(qi));
            const json& qj = questions[qi];
            if (!qj.is_object()) fail(qloc, "question must be a JSON object");
            QAPair qa;
            qa.question = require_string(qj, "question", qloc);
            qa.canonical_answer = require_string(qj, "answer", qloc);
            if (auto it = qj.find("answers"); it != qj.end()) {
                if (!it->is_array() || it->empty()) {
                    fail(qloc, "'answers' must be a non-empty array");
                }
                for (const auto& a : *it) {
                    if (!a.is_string()) fail(qloc, "'answers' must hold strings");
                    qa.variants.push_back(a.get<std::string>());
                }
            } else {
                qa.variants = {qa.canonical_answer};
            }
            try {
                qa.reasoning_type = reasoning_type_from_string(
                    require_string(qj, "reasoning_type", qloc));
                qa.answer_type = answer_type_from_string(
                    require_string(qj, "answer_type", qloc));
            } catch (const std::invalid_argument& e) {
                fail(qloc, e.what());
            }
            part.qa_pairs.push_back(std::move(qa));
        }
        set.parts.push_back(std::move(part));
    }
    return set;
}

void enforce_set_invariants(const NarrativeSet& set, const LoadOptions& opts,
                            std::string_view location) {
    if (set.parts.size() != 3) {
        fail(location, "narrative set must have exactly 3 parts, got " +
                           std::to_string(set.parts.size()));
    }
    for (std::size_t pi = 0; pi < set.parts.size(); ++pi) {
        std::string ploc = locate(location, "part", static_cast<int>(pi) + 1);
        const Part& part = set.parts[pi];
        if (trim(part.narrative).empty()) fail(ploc, "empty narrative");
        if (part.token_count < 1) fail(ploc, "token_count must be >= 1");
        int nq = static_cast<int>(part.qa_pairs.size());
        if (nq < opts.min_questions_per_part ||
            nq > opts.max_questions_per_part) {
            fail(ploc, "question count " + std::to_string(nq) +
                           " outside [" +
                           std::to_string(opts.min_questions_per_part) + ", " +
                           std::to_string(opts.max_questions_per_part) + "]");
        }
        for (std::size_t qi = 0; qi < part.qa_pairs.size(); ++qi) {
            std::string qloc = locate(ploc, "qa", static_cast<int>(qi));
            const QAPair& qa = part.qa_pairs[qi];
            if (trim(qa.question).empty()) fail(qloc, "empty question");
            if (qa.variants.empty()) fail(qloc, "no accepted answers");
            if (qa.variants.front() != qa.canonical_answer) {
                fail(qloc, "answers[0] must equal the canonical answer");
            }
            for (const std::string& v : qa.variants) {
                if (trim(v).empty()) fail(qloc, "blank answer variant");
                auto n = codepoint_count(v);
                if (n > static_cast<std::size_t>(opts.max_answer_length)) {
                    fail(qloc, "answer variant '" + v + "' has " +
                                   std::to_string(n) + " characters, max " +
                                   std::to_string(opts.max_answer_length));
                }
            }
        }
    }
}

json set_to_json(const NarrativeSet& set) {
    json parts = json::array();
    for (const Part& p : set.parts) {
        json pj{{"narrative", p.narrative}, {"token_count", p.token_count}};
        if (!p.entity_annotations.empty()) pj["entities"] = p.entity_annotations;
        json qs = json::array();
        for (const QAPair& qa : p.qa_pairs) {
            qs.push_back(json{{"question", qa.question},
                              {"answer", qa.canonical_answer},
                              {"answers", qa.variants},
                              {"reasoning_type", to_string(qa.reasoning_type)},
                              {"answer_type", to_string(qa.answer_type)}});
        }
        pj["questions"] = std::move(qs);
        parts.push_back(std::move(pj));
    }
    return json{{"domain", set.domain_id}, {"parts", std::move(parts)}};
}

json corpus_to_json(const Corpus& c) {
    json sets = json::array();
    for (const auto& domain_sets : c.sets) {
        for (const NarrativeSet& s : domain_sets) {
            sets.push_back(set_to_json(s));
        }
    }
    return sets;
}

namespace {

void add_set(Corpus& c, NarrativeSet set,
             const std::vector<DomainDef>* catalog) {
    for (std::size_t i = 0; i < c.domains.size(); ++i) {
        if (c.domains[i].id == set.domain_id) {
            c.sets[i].push_back(std::move(set));
            return;
        }
    }
    DomainDef def;
    def.id = set.domain_id;
    def.display_name = set.domain_id;
    if (catalog != nullptr) {
        for (const DomainDef& d : *catalog) {
            if (d.id == set.domain_id) {
                def = d;
                break;
            }
        }
    }
    c.domains.push_back(std::move(def));
    c.sets.emplace_back();
    c.sets.back().push_back(std::move(set));
}

void load_sets_from_json(Corpus& c, const json& j, const LoadOptions& opts,
                         std::string_view file_label,
                         const std::vector<DomainDef>* catalog) {
    auto one = [&](const json& sj, std::string loc) {
        NarrativeSet set = parse_narrative_set(sj, loc);
        enforce_set_invariants(set, opts, loc);
        add_set(c, std::move(set), catalog);
    };
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            one(j[i], locate(file_label, "set", static_cast<int>(i)));
        }
    } else {
        one(j, std::string(file_label));
    }
}

json parse_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw CorpusError("cannot open " + p.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw CorpusError(p.string() + ": " + e.what());
    }
    return j;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& opts,
                   const std::vector<DomainDef>* catalog) {
    Corpus c;
    std::error_code ec;
    if (std::filesystem::is_directory(path, ec)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            load_sets_from_json(c, parse_json_file(f), opts,
                                f.filename().string(), catalog);
        }
    } else if (std::filesystem::is_regular_file(path, ec)) {
        load_sets_from_json(c, parse_json_file(path), opts,
                            path.filename().string(), catalog);
    } else {
        throw CorpusError("no such file or directory: " + path.string());
    }
    return c;
}

Corpus corpus_from_json(const json& j, const LoadOptions& opts) {
    Corpus c;
    load_sets_from_json(c, j, opts, "corpus", nullptr);
    return c;
}

bool answers_match(std::string_view submitted, const QAPair& qa) {
    std::string norm = normalize_answer(submitted);
    for (const std::string& v : qa.variants) {
        if (norm == normalize_answer(v)) return true;
    }
    return false;
}

const NarrativeSet& sample_narrative_set(
    const Corpus& c, std::optional<std::string_view> domain, Rng& rng) {
    std::vector<const NarrativeSet*> eligible;
    if (domain.has_value()) {
        const auto* sets = c.sets_for(*domain);
        if (sets == nullptr) {
            throw std::invalid_argument("unknown domain: " +
                                        std::string(*domain));
        }
        for (const auto& s : *sets) eligible.push_back(&s);
    } else {
        for (const auto& domain_sets : c.sets) {
            for (const auto& s : domain_sets) eligible.push_back(&s);
        }
    }
    if (eligible.empty()) throw CorpusError("no eligible narrative sets");
    std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
    return *eligible[pick(rng)];
}

SessionChallenge assemble_challenge(const NarrativeSet& set, Rng& rng) {
    if (set.parts.size() != 3) {
        throw std::invalid_argument("narrative set must have exactly 3 parts");
    }
    SessionChallenge ch;
    ch.set = &set;
    for (int i = 0; i < 3; ++i) {
        const auto& qs = set.parts[i].qa_pairs;
        if (qs.empty()) {
            throw std::invalid_argument("part " + std::to_string(i + 1) +
                                        " has no questions");
        }
        std::uniform_int_distribution<std::size_t> pick(0, qs.size() - 1);
        ch.chosen_qa[i] = static_cast<int>(pick(rng));
    }
    return ch;
}

std::int64_t config_count(int domains, int sets_per_domain,
                          int questions_per_part) {
    if (domains <= 0 || sets_per_domain <= 0 || questions_per_part <= 0) {
        throw std::invalid_argument("config_count: arguments must be positive");
    }
    auto checked_mul = [](std::int64_t a, std::int64_t b) {
        if (a > std::numeric_limits<std::int64_t>::max() / b) {
            throw std::invalid_argument("config_count: overflow");
        }
        return a * b;
    };
    std::int64_t q = questions_per_part;
    std::int64_t r = checked_mul(q, q);
    r = checked_mul(r, q);
    r = checked_mul(r, sets_per_domain);
    r = checked_mul(r, domains);
    return r;
}

int approx_token_count(std::string_view prose, double words_per_token) {
    if (words_per_token <= 0.0) {
        throw std::invalid_argument("words_per_token must be positive");
    }
    std::size_t words = 0;
    bool in_word = false;
    for (char ch : prose) {
        bool space = ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' ||
                     ch == '\f' || ch == '\v';
        if (!space && !in_word) ++words;
        in_word = !space;
    }
    return static_cast<int>(
        std::ceil(static_cast<double>(words) / words_per_token));
}

}  // namespace agentgate::corpus
