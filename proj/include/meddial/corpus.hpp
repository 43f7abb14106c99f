#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "meddial/error.hpp"

namespace meddial {

enum class EntityType { Disease, Symptom, Medicine, Examination, Attribute };

std::string_view to_string(EntityType t);
std::optional<EntityType> entity_type_from(std::string_view s); // case-insensitive

enum class EntityState { Positive, Negative, Unknown };

std::string_view to_string(EntityState s);
std::optional<EntityState> entity_state_from(std::string_view s); // "pos" | "neg" | "unk"

struct EntityMention {
    std::string canonical;
    EntityType etype{EntityType::Symptom};
    std::optional<EntityState> state;

    bool operator==(const EntityMention&) const = default;
};

enum class Role { Patient, Doctor };

std::string_view to_string(Role r);

enum class PhysicianAction {
    Chitchat,
    Inform,
    Inquire,
    ProvideDailyPrecaution,
    StateRequiredMedicalTest,
    MakeDiagnosis,
    PrescribeMedications,
};

inline constexpr int kPhysicianActionCount = 7;
inline constexpr std::string_view kActionTableVersion = "act-v1";

// Stable English identifier, e.g. "ProvideDailyPrecaution".
std::string_view action_name(PhysicianAction a);
// Surface label rendered into encodings and targets, e.g. "问诊".
std::string_view action_label(PhysicianAction a);
// Accepts the English identifier (case-insensitive, spaces/underscores ignored)
// or the surface label.
std::optional<PhysicianAction> action_from(std::string_view s);

struct Utterance {
    Role role{Role::Patient};
    std::string text;
    std::vector<EntityMention> entities; // unique canonicals, first-occurrence order
    std::vector<PhysicianAction> actions; // empty for Patient

    bool operator==(const Utterance&) const = default;
};

enum class Split { Train, Valid, Test };

std::string_view to_string(Split s);
std::optional<Split> split_from(std::string_view s);

struct Dialogue {
    std::string id;
    Split split{Split::Train};
    std::vector<Utterance> turns; // alternate Patient/Doctor, Patient first

    bool operator==(const Dialogue&) const = default;
};

// Surface-form dictionary mapping mention strings to canonical entities.
// Matching is greedy leftmost-longest over UTF-8 text via a byte trie.
class Lexicon {
public:
    Lexicon() = default;

    // Throws on empty surface, duplicate surface, or a canonical seen with two types.
    void add(std::string_view surface, std::string_view canonical, EntityType type);

    std::size_t surface_count() const { return entries_.size(); }
    std::size_t canonical_count() const { return canonical_types_.size(); }
    bool empty() const { return entries_.empty(); }

    bool has_canonical(const std::string& name) const;
    std::optional<EntityType> canonical_type(const std::string& name) const;
    std::vector<std::string> canonicals() const; // sorted

    std::vector<EntityMention> annotate(std::string_view text) const;

    struct Match {
        std::size_t begin = 0;
        std::size_t length = 0; // bytes
        std::string canonical;
        EntityType type{EntityType::Symptom};
    };
    // Raw greedy matches with spans, before canonical dedup.
    std::vector<Match> scan(std::string_view text) const;

private:
    struct TrieNode {
        std::map<unsigned char, int> next;
        int entry = -1;
    };
    struct Entry {
        std::string surface;
        std::string canonical;
        EntityType type;
    };

    std::vector<TrieNode> trie_{TrieNode{}};
    std::vector<Entry> entries_;
    std::unordered_map<std::string, int> by_surface_;
    std::map<std::string, EntityType> canonical_types_;
};

// TSV: surface<TAB>canonical<TAB>type. Errors: MalformedRow, UnknownEntityType,
// DuplicateSurface, EmptySurface, CanonicalTypeConflict.
Lexicon load_lexicon(const std::filesystem::path& path);
Lexicon parse_lexicon(std::string_view tsv, const std::string& origin = "<memory>");

std::vector<EntityMention> annotate_entities(std::string_view text, const Lexicon& lex);

// One dialogue per JSONL line; see README for the schema. With respect_gold,
// per-turn "entities"/"actions" keys are kept verbatim; otherwise entities are
// re-annotated from the lexicon and actions are left empty. Consecutive
// same-role turns are merged (text joined with one space, entity sets unioned).
std::vector<Dialogue> load_corpus(const std::filesystem::path& path, const Lexicon& lex,
                                  bool respect_gold = true);
std::vector<Dialogue> parse_corpus(std::string_view jsonl, const Lexicon& lex,
                                   bool respect_gold, const std::string& origin = "<memory>");

std::string serialize_dialogue(const Dialogue& d);
std::string serialize_corpus(const std::vector<Dialogue>& dialogues);

inline constexpr std::string_view kKamedPlaceholderDefault =
    "The image/voice is not available for privacy concern";

struct FilterResult {
    std::vector<Dialogue> retained;
    std::size_t dropped = 0;
};

// Drops every dialogue in which any turn's text contains the placeholder.
FilterResult filter_kamed_multimodal(const std::vector<Dialogue>& dialogues,
                                     std::string_view placeholder = kKamedPlaceholderDefault);

// Doctor turns with at least one gold entity and a preceding patient turn.
std::vector<std::size_t> eligible_eval_turns(const Dialogue& d);

} // namespace meddial
