#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "meddial/corpus.hpp"

namespace meddial {

// Utterances are rewritten with inline entity/action markers so the model
// sees the clinical pathway alongside the raw text:
//   patient: [ENT] e1、e2 [TXT] text
//   doctor:  [ENT] e1 [ACT] a1、a2 [TXT] text
// Empty segments are elided entirely. The markers are reversible; see
// parse_encoded.
inline constexpr std::string_view kEncodingVersion = "enc-v1";
inline constexpr std::string_view kEntityMarker = "[ENT]";
inline constexpr std::string_view kActionMarker = "[ACT]";
inline constexpr std::string_view kTextMarker = "[TXT]";
inline constexpr std::string_view kItemSeparator = "、";

struct EncodedUtterance {
    Role role{Role::Patient};
    std::string rendered;
    std::vector<std::string> entities_used;
    std::vector<PhysicianAction> actions_used;

    bool operator==(const EncodedUtterance&) const = default;
};

EncodedUtterance encode_patient(const Utterance& u); // throws RoleMismatch on doctor turns
EncodedUtterance encode_doctor(const Utterance& u);  // throws RoleMismatch on patient turns
EncodedUtterance encode_utterance(const Utterance& u);

struct ParsedEncoding {
    std::vector<std::string> entities;
    std::vector<PhysicianAction> actions;
    std::string text;
};

// Inverse of the encoders; throws BadEncoding when the marker structure is
// missing or out of order.
ParsedEncoding parse_encoded(std::string_view rendered);

struct DialogueState {
    std::vector<std::string> cumulative_entities; // first-occurrence order
    std::vector<EncodedUtterance> encoded_history;
};

// Returns the extended state; inputs are never mutated.
DialogueState advance(DialogueState state, const Utterance& u);

// One generation site per doctor turn: the encoded history before the
// patient inquiry, the inquiry itself, and the entity context accumulated
// through it (the seed set for knowledge mining).
struct ResponsePoint {
    std::size_t doctor_turn = 0;
    DialogueState history;
    EncodedUtterance current;
    std::vector<std::string> entity_context;
};

std::vector<ResponsePoint> response_points(const Dialogue& d);

} // namespace meddial
