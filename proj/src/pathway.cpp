#include "meddial/pathway.hpp"

#include <algorithm>
#include <unordered_set>

#include "meddial/error.hpp"
#include "meddial/unicode.hpp"
#include "meddial/util.hpp"

namespace meddial {

namespace {

std::string render_entities(const std::vector<EntityMention>& entities) {
    std::vector<std::string> names;
    names.reserve(entities.size());
    for (const EntityMention& m : entities) names.push_back(m.canonical);
    return join(names, kItemSeparator);
}

std::string render_actions(const std::vector<PhysicianAction>& actions) {
    std::vector<std::string> labels;
    labels.reserve(actions.size());
    for (const auto a : actions) labels.emplace_back(action_label(a));
    return join(labels, kItemSeparator);
}

std::vector<std::string> entity_names(const std::vector<EntityMention>& entities) {
    std::vector<std::string> names;
    names.reserve(entities.size());
    for (const EntityMention& m : entities) names.push_back(m.canonical);
    return names;
}

} // namespace

EncodedUtterance encode_patient(const Utterance& u) {
    if (u.role != Role::Patient) {
        throw Error(ErrorKind::Usage, "RoleMismatch", "encode_patient on a doctor utterance");
    }
    EncodedUtterance enc;
    enc.role = Role::Patient;
    enc.entities_used = entity_names(u.entities);
    std::string& out = enc.rendered;
    if (!u.entities.empty()) {
        out.append(kEntityMarker).append(" ").append(render_entities(u.entities)).append(" ");
    }
    out.append(kTextMarker).append(" ").append(u.text);
    return enc;
}

EncodedUtterance encode_doctor(const Utterance& u) {
    if (u.role != Role::Doctor) {
        throw Error(ErrorKind::Usage, "RoleMismatch", "encode_doctor on a patient utterance");
    }
    EncodedUtterance enc;
    enc.role = Role::Doctor;
    enc.entities_used = entity_names(u.entities);
    enc.actions_used = u.actions;
    std::string& out = enc.rendered;
    if (!u.entities.empty()) {
        out.append(kEntityMarker).append(" ").append(render_entities(u.entities)).append(" ");
    }
    if (!u.actions.empty()) {
        out.append(kActionMarker).append(" ").append(render_actions(u.actions)).append(" ");
    }
    out.append(kTextMarker).append(" ").append(u.text);
    return enc;
}

EncodedUtterance encode_utterance(const Utterance& u) {
    return u.role == Role::Patient ? encode_patient(u) : encode_doctor(u);
}

namespace {

std::vector<std::string> parse_items(std::string_view segment) {
    std::vector<std::string> items;
    for (const std::string& raw : split_on(segment, kItemSeparator)) {
        std::string item = trim(raw);
        if (!item.empty()) items.push_back(std::move(item));
    }
    return items;
}

// Position of the next segment boundary " <marker> ", or npos.
std::size_t find_boundary(std::string_view s, std::string_view marker) {
    const std::string needle = " " + std::string(marker) + " ";
    return s.find(needle);
}

} // namespace

ParsedEncoding parse_encoded(std::string_view rendered) {
    ParsedEncoding out;
    std::string_view rest = rendered;

    auto starts_with_marker = [&](std::string_view marker) {
        return rest.size() > marker.size() + 1 && rest.substr(0, marker.size()) == marker &&
               rest[marker.size()] == ' ';
    };
    auto take_segment = [&](std::string_view marker) -> std::string_view {
        rest.remove_prefix(marker.size() + 1);
        std::size_t end = rest.size();
        for (const std::string_view next : {kActionMarker, kTextMarker}) {
            const std::size_t pos = find_boundary(rest, next);
            if (pos != std::string_view::npos) end = std::min(end, pos);
        }
        const std::string_view segment = rest.substr(0, end);
        rest.remove_prefix(std::min(rest.size(), end + 1)); // trailing space
        return segment;
    };

    if (starts_with_marker(kEntityMarker)) {
        out.entities = parse_items(take_segment(kEntityMarker));
    }
    if (starts_with_marker(kActionMarker)) {
        for (const std::string& label : parse_items(take_segment(kActionMarker))) {
            const auto act = action_from(label);
            if (!act) {
                throw data_error("BadEncoding", "unknown action label '" + label + "'");
            }
            out.actions.push_back(*act);
        }
    }
    if (rest.substr(0, kTextMarker.size()) != kTextMarker) {
        throw data_error("BadEncoding", "encoded utterance lacks a text segment");
    }
    rest.remove_prefix(kTextMarker.size());
    if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    out.text = std::string(rest);
    return out;
}

DialogueState advance(DialogueState state, const Utterance& u) {
    EncodedUtterance enc = encode_utterance(u);
    std::unordered_set<std::string> seen(state.cumulative_entities.begin(),
                                         state.cumulative_entities.end());
    for (const std::string& name : enc.entities_used) {
        if (seen.insert(name).second) state.cumulative_entities.push_back(name);
    }
    state.encoded_history.push_back(std::move(enc));
    return state;
}

std::vector<ResponsePoint> response_points(const Dialogue& d) {
    std::vector<ResponsePoint> out;
    DialogueState prev;  // turns [0, i-1)
    DialogueState state; // turns [0, i)
    for (std::size_t i = 0; i < d.turns.size(); ++i) {
        const Utterance& u = d.turns[i];
        if (u.role == Role::Doctor && i > 0 && d.turns[i - 1].role == Role::Patient) {
            ResponsePoint point;
            point.doctor_turn = i;
            point.current = encode_patient(d.turns[i - 1]);
            // History excludes the current inquiry; the entity context includes it.
            point.history = prev;
            point.entity_context = state.cumulative_entities;
            out.push_back(std::move(point));
        }
        prev = state;
        state = advance(std::move(state), u);
    }
    return out;
}

} // namespace meddial
