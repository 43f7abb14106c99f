#include "meddial/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "meddial/unicode.hpp"
#include "meddial/util.hpp"

namespace meddial {

using nlohmann::json;

std::string_view to_string(EntityType t) {
    switch (t) {
    case EntityType::Disease: return "disease";
    case EntityType::Symptom: return "symptom";
    case EntityType::Medicine: return "medicine";
    case EntityType::Examination: return "examination";
    case EntityType::Attribute: return "attribute";
    }
    return "symptom";
}

std::optional<EntityType> entity_type_from(std::string_view s) {
    const std::string lower = to_lower_ascii(trim(s));
    if (lower == "disease") return EntityType::Disease;
    if (lower == "symptom") return EntityType::Symptom;
    if (lower == "medicine") return EntityType::Medicine;
    if (lower == "examination") return EntityType::Examination;
    if (lower == "attribute") return EntityType::Attribute;
    return std::nullopt;
}

std::string_view to_string(EntityState s) {
    switch (s) {
    case EntityState::Positive: return "pos";
    case EntityState::Negative: return "neg";
    case EntityState::Unknown: return "unk";
    }
    return "unk";
}

std::optional<EntityState> entity_state_from(std::string_view s) {
    const std::string lower = to_lower_ascii(trim(s));
    if (lower == "pos") return EntityState::Positive;
    if (lower == "neg") return EntityState::Negative;
    if (lower == "unk") return EntityState::Unknown;
    return std::nullopt;
}

std::string_view to_string(Role r) {
    return r == Role::Patient ? "patient" : "doctor";
}

namespace {

constexpr std::string_view kActionNames[kPhysicianActionCount] = {
    "Chitchat",
    "Inform",
    "Inquire",
    "ProvideDailyPrecaution",
    "StateRequiredMedicalTest",
    "MakeDiagnosis",
    "PrescribeMedications",
};

constexpr std::string_view kActionLabels[kPhysicianActionCount] = {
    "闲聊",
    "告知",
    "问诊",
    "日常注意",
    "检查建议",
    "诊断",
    "用药建议",
};

// Lowercase identifier with spaces/underscores/hyphens removed.
std::string action_key(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        if (c == ' ' || c == '_' || c == '-') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

} // namespace

std::string_view action_name(PhysicianAction a) {
    return kActionNames[static_cast<int>(a)];
}

std::string_view action_label(PhysicianAction a) {
    return kActionLabels[static_cast<int>(a)];
}

std::optional<PhysicianAction> action_from(std::string_view s) {
    const std::string t = trim(s);
    for (int i = 0; i < kPhysicianActionCount; ++i) {
        if (t == kActionLabels[i]) return static_cast<PhysicianAction>(i);
    }
    const std::string key = action_key(t);
    for (int i = 0; i < kPhysicianActionCount; ++i) {
        if (key == action_key(kActionNames[i])) return static_cast<PhysicianAction>(i);
    }
    // Spelled-out variants used by some corpora.
    if (key == "provideadailyprecaution") return PhysicianAction::ProvideDailyPrecaution;
    if (key == "statearequiredmedicaltest") return PhysicianAction::StateRequiredMedicalTest;
    if (key == "makeadiagnosis") return PhysicianAction::MakeDiagnosis;
    if (key == "prescribemedication") return PhysicianAction::PrescribeMedications;
    return std::nullopt;
}

std::string_view to_string(Split s) {
    switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
    }
    return "train";
}

std::optional<Split> split_from(std::string_view s) {
    const std::string lower = to_lower_ascii(trim(s));
    if (lower == "train") return Split::Train;
    if (lower == "valid" || lower == "dev" || lower == "validation") return Split::Valid;
    if (lower == "test") return Split::Test;
    return std::nullopt;
}

void Lexicon::add(std::string_view surface, std::string_view canonical, EntityType type) {
    const std::string surf = trim(surface);
    const std::string canon = trim(canonical);
    if (surf.empty()) {
        throw data_error("EmptySurface", "lexicon surface form is empty");
    }
    if (canon.empty()) {
        throw data_error("EmptyCanonical", "lexicon canonical is empty for surface '" + surf + "'");
    }
    if (by_surface_.count(surf)) {
        throw data_error("DuplicateSurface", "duplicate lexicon surface '" + surf + "'");
    }
    if (const auto it = canonical_types_.find(canon);
        it != canonical_types_.end() && it->second != type) {
        throw data_error("CanonicalTypeConflict",
                         "canonical '" + canon + "' declared with two entity types");
    }

    const int entry_id = static_cast<int>(entries_.size());
    entries_.push_back(Entry{surf, canon, type});
    by_surface_.emplace(surf, entry_id);
    canonical_types_.emplace(canon, type);

    int node = 0;
    for (const char c : surf) {
        const auto b = static_cast<unsigned char>(c);
        auto it = trie_[static_cast<std::size_t>(node)].next.find(b);
        if (it == trie_[static_cast<std::size_t>(node)].next.end()) {
            const int fresh = static_cast<int>(trie_.size());
            trie_[static_cast<std::size_t>(node)].next.emplace(b, fresh);
            trie_.emplace_back();
            node = fresh;
        } else {
            node = it->second;
        }
    }
    trie_[static_cast<std::size_t>(node)].entry = entry_id;
}

bool Lexicon::has_canonical(const std::string& name) const {
    return canonical_types_.count(name) > 0;
}

std::optional<EntityType> Lexicon::canonical_type(const std::string& name) const {
    const auto it = canonical_types_.find(name);
    if (it == canonical_types_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> Lexicon::canonicals() const {
    std::vector<std::string> out;
    out.reserve(canonical_types_.size());
    for (const auto& [name, type] : canonical_types_) {
        (void)type;
        out.push_back(name);
    }
    return out;
}

std::vector<Lexicon::Match> Lexicon::scan(std::string_view text) const {
    std::vector<Match> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        // Longest trie match starting at pos.
        int node = 0;
        int best_entry = -1;
        std::size_t best_len = 0;
        for (std::size_t i = pos; i < text.size(); ++i) {
            const auto b = static_cast<unsigned char>(text[i]);
            const auto it = trie_[static_cast<std::size_t>(node)].next.find(b);
            if (it == trie_[static_cast<std::size_t>(node)].next.end()) break;
            node = it->second;
            if (trie_[static_cast<std::size_t>(node)].entry >= 0) {
                best_entry = trie_[static_cast<std::size_t>(node)].entry;
                best_len = i - pos + 1;
            }
        }
        if (best_entry >= 0) {
            const Entry& e = entries_[static_cast<std::size_t>(best_entry)];
            out.push_back(Match{pos, best_len, e.canonical, e.type});
            pos += best_len;
        } else {
            pos += utf8_seq_len(text, pos);
        }
    }
    return out;
}

std::vector<EntityMention> Lexicon::annotate(std::string_view text) const {
    std::vector<EntityMention> out;
    std::unordered_set<std::string> seen;
    for (const Match& m : scan(text)) {
        if (seen.insert(m.canonical).second) {
            out.push_back(EntityMention{m.canonical, m.type, std::nullopt});
        }
    }
    return out;
}

Lexicon parse_lexicon(std::string_view tsv, const std::string& origin) {
    Lexicon lex;
    std::size_t line_no = 0;
    for (const std::string& raw : split(tsv, '\n')) {
        ++line_no;
        std::string line = raw;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto cols = split(line, '\t');
        if (cols.size() != 3) {
            throw data_error("MalformedRow", origin + ":" + std::to_string(line_no) +
                                                 ": expected 3 tab-separated columns, got " +
                                                 std::to_string(cols.size()));
        }
        const auto type = entity_type_from(cols[2]);
        if (!type) {
            throw data_error("UnknownEntityType", origin + ":" + std::to_string(line_no) +
                                                      ": unknown entity type '" + cols[2] + "'");
        }
        try {
            lex.add(cols[0], cols[1], *type);
        } catch (const Error& e) {
            throw data_error(e.code(), origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("FileNotReadable", "cannot open lexicon file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_lexicon(buf.str(), path.string());
}

std::vector<EntityMention> annotate_entities(std::string_view text, const Lexicon& lex) {
    return lex.annotate(text);
}

namespace {

std::vector<EntityMention> parse_gold_entities(const json& arr, const Lexicon& lex,
                                               const std::string& where) {
    std::vector<EntityMention> out;
    std::unordered_set<std::string> seen;
    for (const auto& item : arr) {
        if (!item.is_object() || !item.contains("name") || !item["name"].is_string()) {
            throw data_error("MalformedEntity", where + ": entity items need a string 'name'");
        }
        EntityMention m;
        m.canonical = trim(item["name"].get<std::string>());
        const auto lex_type = lex.canonical_type(m.canonical);
        if (!lex_type) {
            throw data_error("UnknownEntity",
                             where + ": entity '" + m.canonical + "' not in lexicon");
        }
        if (item.contains("type")) {
            if (!item["type"].is_string() || !entity_type_from(item["type"].get<std::string>())) {
                throw data_error("UnknownEntityType",
                                 where + ": bad entity type for '" + m.canonical + "'");
            }
        }
        m.etype = *lex_type; // lexicon is the single source of truth for types
        if (item.contains("state")) {
            if (!item["state"].is_string()) {
                throw data_error("UnknownEntityState", where + ": entity state must be a string");
            }
            const auto st = entity_state_from(item["state"].get<std::string>());
            if (!st) {
                throw data_error("UnknownEntityState", where + ": bad entity state '" +
                                                           item["state"].get<std::string>() + "'");
            }
            m.state = st;
        }
        if (seen.insert(m.canonical).second) out.push_back(std::move(m));
    }
    return out;
}

void merge_into(Utterance& dst, Utterance&& src) {
    if (!dst.text.empty() && !src.text.empty()) dst.text += " ";
    dst.text += src.text;
    std::unordered_set<std::string> seen;
    for (const auto& e : dst.entities) seen.insert(e.canonical);
    for (auto& e : src.entities) {
        if (seen.insert(e.canonical).second) dst.entities.push_back(std::move(e));
    }
    for (const auto a : src.actions) {
        if (std::find(dst.actions.begin(), dst.actions.end(), a) == dst.actions.end()) {
            dst.actions.push_back(a);
        }
    }
}

Dialogue parse_dialogue(const json& obj, const Lexicon& lex, bool respect_gold,
                        const std::string& where) {
    if (!obj.is_object()) throw data_error("MalformedDialogue", where + ": expected an object");
    if (!obj.contains("id") || !obj["id"].is_string()) {
        throw data_error("MalformedDialogue", where + ": missing string 'id'");
    }
    Dialogue d;
    d.id = obj["id"].get<std::string>();
    if (obj.contains("split")) {
        const auto sp = obj["split"].is_string() ? split_from(obj["split"].get<std::string>())
                                                 : std::nullopt;
        if (!sp) throw data_error("UnknownSplit", where + ": bad split");
        d.split = *sp;
    }
    if (!obj.contains("turns") || !obj["turns"].is_array() || obj["turns"].empty()) {
        throw data_error("MalformedDialogue", where + ": 'turns' must be a non-empty array");
    }

    for (const auto& t : obj["turns"]) {
        const std::string turn_where = where + " dialogue '" + d.id + "'";
        if (!t.is_object() || !t.contains("role") || !t["role"].is_string() ||
            !t.contains("text") || !t["text"].is_string()) {
            throw data_error("MalformedTurn", turn_where + ": turns need string 'role' and 'text'");
        }
        const std::string role_s = to_lower_ascii(t["role"].get<std::string>());
        Utterance u;
        if (role_s == "patient") u.role = Role::Patient;
        else if (role_s == "doctor") u.role = Role::Doctor;
        else throw data_error("UnknownRole", turn_where + ": unknown role '" + role_s + "'");
        u.text = t["text"].get<std::string>();

        if (respect_gold && t.contains("entities")) {
            if (!t["entities"].is_array()) {
                throw data_error("MalformedEntity", turn_where + ": 'entities' must be an array");
            }
            u.entities = parse_gold_entities(t["entities"], lex, turn_where);
        } else {
            u.entities = lex.annotate(u.text);
        }

        if (t.contains("actions")) {
            if (!t["actions"].is_array()) {
                throw data_error("UnknownAction", turn_where + ": 'actions' must be an array");
            }
            std::vector<PhysicianAction> actions;
            for (const auto& a : t["actions"]) {
                if (!a.is_string()) {
                    throw data_error("UnknownAction", turn_where + ": actions must be strings");
                }
                const auto act = action_from(a.get<std::string>());
                if (!act) {
                    throw data_error("UnknownAction", turn_where + ": unknown action '" +
                                                          a.get<std::string>() + "'");
                }
                if (std::find(actions.begin(), actions.end(), *act) == actions.end()) {
                    actions.push_back(*act);
                }
            }
            if (!actions.empty() && u.role == Role::Patient) {
                throw data_error("PatientHasAction",
                                 turn_where + ": patient turn carries physician actions");
            }
            if (respect_gold) u.actions = std::move(actions);
        }

        if (!d.turns.empty() && d.turns.back().role == u.role) {
            merge_into(d.turns.back(), std::move(u));
        } else {
            d.turns.push_back(std::move(u));
        }
    }

    if (d.turns.front().role != Role::Patient) {
        throw data_error("DialogueNotPatientFirst",
                         where + ": dialogue '" + d.id + "' must start with a patient turn");
    }
    return d;
}

} // namespace

std::vector<Dialogue> parse_corpus(std::string_view jsonl, const Lexicon& lex, bool respect_gold,
                                   const std::string& origin) {
    std::vector<Dialogue> out;
    std::size_t line_no = 0;
    for (const std::string& raw : split(jsonl, '\n')) {
        ++line_no;
        std::string line = raw;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw data_error("InvalidJson", where + ": " + e.what());
        }
        out.push_back(parse_dialogue(obj, lex, respect_gold, where));
    }
    return out;
}

std::vector<Dialogue> load_corpus(const std::filesystem::path& path, const Lexicon& lex,
                                  bool respect_gold) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("FileNotReadable", "cannot open corpus file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_corpus(buf.str(), lex, respect_gold, path.string());
}

std::string serialize_dialogue(const Dialogue& d) {
    json turns = json::array();
    for (const Utterance& u : d.turns) {
        json entities = json::array();
        for (const EntityMention& m : u.entities) {
            json e = {{"name", m.canonical}, {"type", std::string(to_string(m.etype))}};
            if (m.state) e["state"] = std::string(to_string(*m.state));
            entities.push_back(std::move(e));
        }
        json actions = json::array();
        for (const auto a : u.actions) actions.push_back(std::string(action_name(a)));
        turns.push_back({{"role", std::string(to_string(u.role))},
                         {"text", u.text},
                         {"entities", std::move(entities)},
                         {"actions", std::move(actions)}});
    }
    const json obj = {
        {"id", d.id}, {"split", std::string(to_string(d.split))}, {"turns", std::move(turns)}};
    return obj.dump();
}

std::string serialize_corpus(const std::vector<Dialogue>& dialogues) {
    std::string out;
    for (const Dialogue& d : dialogues) {
        out += serialize_dialogue(d);
        out += '\n';
    }
    return out;
}

FilterResult filter_kamed_multimodal(const std::vector<Dialogue>& dialogues,
                                     std::string_view placeholder) {
    FilterResult result;
    for (const Dialogue& d : dialogues) {
        const bool has_placeholder =
            !placeholder.empty() &&
            std::any_of(d.turns.begin(), d.turns.end(), [&](const Utterance& u) {
                return u.text.find(placeholder) != std::string::npos;
            });
        if (has_placeholder) {
            ++result.dropped;
        } else {
            result.retained.push_back(d);
        }
    }
    return result;
}

std::vector<std::size_t> eligible_eval_turns(const Dialogue& d) {
    std::vector<std::size_t> out;
    bool saw_patient = false;
    for (std::size_t i = 0; i < d.turns.size(); ++i) {
        const Utterance& u = d.turns[i];
        if (u.role == Role::Patient) {
            saw_patient = true;
            continue;
        }
        if (saw_patient && !u.entities.empty()) out.push_back(i);
    }
    return out;
}

} // namespace meddial
