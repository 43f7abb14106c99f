#include "meddial/prompt.hpp"

#include <algorithm>

#include "meddial/error.hpp"
#include "meddial/parallel.hpp"
#include "meddial/unicode.hpp"
#include "meddial/util.hpp"

namespace meddial {

using nlohmann::json;

std::size_t codepoint_estimator(std::string_view text) {
    return codepoint_count(text);
}

std::size_t byte_estimator(std::string_view text) {
    return text.size();
}

TokenEstimator estimator_by_name(std::string_view name) {
    if (name == "codepoints" || name.empty()) return codepoint_estimator;
    if (name == "bytes") return byte_estimator;
    throw config_error("UnknownEstimator", "unknown token estimator '" + std::string(name) + "'");
}

std::size_t BudgetConfig::estimate(std::string_view text) const {
    if (token_estimator) return token_estimator(text);
    return estimator_by_name(estimator_name)(text);
}

const std::string& default_instruction() {
    static const std::string text =
        "你是一名经验丰富的医生,正在线上接诊患者。请结合下方提供的医学知识和对话历史,"
        "回复患者当前的咨询。请先给出回复中应提及的医学实体和本轮采取的医生动作,再给出回复正文,"
        "输出格式为:[ENTITIES] 实体1、实体2(若无填无) [ACTIONS] 动作1、动作2(若无填无) "
        "[RESPONSE] 回复正文。";
    return text;
}

PromptTemplate default_prompt_template() {
    PromptTemplate tpl;
    tpl.instruction = default_instruction();
    return tpl;
}

namespace {

std::string render_triplet_line(const Triplet& t) {
    return t.head + " - " + t.relation + " - " + t.tail;
}

std::string role_prefix(const PromptTemplate& tpl, Role role) {
    return role == Role::Patient ? tpl.patient_prefix : tpl.doctor_prefix;
}

// Assembles the prompt from the currently kept pieces. `history_from` is the
// index of the oldest retained history turn.
std::string assemble(const PromptTemplate& tpl, std::span<const std::string> knowledge_lines,
                     const DialogueState& state, std::size_t history_from,
                     const EncodedUtterance& current) {
    std::string out = tpl.instruction;
    if (!knowledge_lines.empty()) {
        out += "\n" + tpl.knowledge_header;
        for (const std::string& line : knowledge_lines) out += "\n" + line;
    }
    if (history_from < state.encoded_history.size()) {
        out += "\n" + tpl.history_header;
        for (std::size_t i = history_from; i < state.encoded_history.size(); ++i) {
            const EncodedUtterance& enc = state.encoded_history[i];
            out += "\n" + role_prefix(tpl, enc.role) + enc.rendered;
        }
    }
    out += "\n" + tpl.current_header;
    out += "\n" + role_prefix(tpl, Role::Patient) + current.rendered;
    return out;
}

} // namespace

PromptRecord build_prompt(const DialogueState& state, const KnowledgeBundle& bundle,
                          const EncodedUtterance& current, const BudgetConfig& cfg,
                          const PromptTemplate& tpl) {
    if (current.role != Role::Patient) {
        throw Error(ErrorKind::Usage, "RoleMismatch", "prompt must end on a patient encoding");
    }

    std::size_t direct_kept = bundle.direct.size();
    std::size_t potential_kept = bundle.potential.size();
    std::size_t history_from = 0;

    auto knowledge_lines = [&] {
        std::vector<std::string> lines;
        lines.reserve(direct_kept + potential_kept);
        for (std::size_t i = 0; i < direct_kept; ++i) {
            lines.push_back(render_triplet_line(bundle.direct[i]));
        }
        for (std::size_t i = 0; i < potential_kept; ++i) {
            lines.push_back(render_triplet_line(bundle.potential[i].triplet));
        }
        return lines;
    };

    std::string text = assemble(tpl, knowledge_lines(), state, history_from, current);
    std::size_t used = cfg.estimate(text);

    while (used > cfg.max_input_tokens) {
        if (potential_kept > 0) {
            --potential_kept; // lowest-ranked potential triplet goes first
        } else if (direct_kept > 0) {
            --direct_kept;
        } else if (history_from < state.encoded_history.size()) {
            ++history_from; // then the oldest history turn
        } else {
            throw Error(ErrorKind::Budget, "BudgetExhausted",
                        "instruction and current utterance need " + std::to_string(used) +
                            " tokens but the budget is " + std::to_string(cfg.max_input_tokens));
        }
        text = assemble(tpl, knowledge_lines(), state, history_from, current);
        used = cfg.estimate(text);
    }

    PromptRecord rec;
    rec.input_text = std::move(text);
    rec.budget_used = used;
    rec.direct_included = direct_kept;
    rec.potential_included = potential_kept;
    rec.truncated_turns = history_from;
    return rec;
}

std::string render_target(std::span<const std::string> entities,
                          std::span<const PhysicianAction> actions, std::string_view response) {
    std::string out{kTargetEntitiesMarker};
    out += " ";
    if (entities.empty()) {
        out += kEmptySegmentPlaceholder;
    } else {
        out += join({entities.begin(), entities.end()}, kItemSeparator);
    }
    out += " ";
    out += kTargetActionsMarker;
    out += " ";
    if (actions.empty()) {
        out += kEmptySegmentPlaceholder;
    } else {
        std::vector<std::string> labels;
        labels.reserve(actions.size());
        for (const auto a : actions) labels.emplace_back(action_label(a));
        out += join(labels, kItemSeparator);
    }
    out += " ";
    out += kTargetResponseMarker;
    out += " ";
    out += response;
    return out;
}

TrainRecord build_train_record(const PromptRecord& prompt, const Utterance& gold) {
    if (gold.role != Role::Doctor) {
        throw Error(ErrorKind::Usage, "RoleMismatch", "train target must be a doctor utterance");
    }
    std::vector<std::string> names;
    names.reserve(gold.entities.size());
    for (const EntityMention& m : gold.entities) names.push_back(m.canonical);
    return TrainRecord{prompt.input_text, render_target(names, gold.actions, gold.text)};
}

json default_finetune_meta() {
    return json{
        {"base_model", "chatglm3-6b"},
        {"lora",
         {{"r", 8},
          {"alpha", 32},
          {"dropout", 0.1},
          {"target_modules",
           json::array({"query_key_value", "dense", "dense_h_to_4h", "dense_4h_to_h"})}}},
        {"training",
         {{"batch_size", 64}, {"epochs", 20}, {"lr_start", 5e-4}, {"lr_end", 5e-5}}},
    };
}

std::size_t emit_trainset(std::span<const Dialogue> corpus, const KnowledgeGraph& kg,
                          const EmitOptions& opts, std::ostream& out) {
    const json finetune = opts.finetune_meta.is_null() ? default_finetune_meta()
                                                       : opts.finetune_meta;

    struct Unit {
        const Dialogue* dialogue;
        ResponsePoint point;
    };
    std::vector<Unit> units;
    for (const Dialogue& d : corpus) {
        for (ResponsePoint& point : response_points(d)) {
            units.push_back(Unit{&d, std::move(point)});
        }
    }

    const auto records = map_indexed(units, opts.workers, [&](const Unit& unit) {
        const Dialogue& d = *unit.dialogue;
        const ResponsePoint& point = unit.point;

        const KnowledgeBundle bundle = mine(kg, point.entity_context, opts.miner);
        PromptRecord prompt =
            build_prompt(point.history, bundle, point.current, opts.budget, opts.tpl);
        prompt.dialogue_id = d.id;
        prompt.turn_index = static_cast<int>(point.doctor_turn);

        const TrainRecord rec = build_train_record(prompt, d.turns[point.doctor_turn]);
        const json meta = {
            {"dialogue_id", d.id},
            {"turn", point.doctor_turn},
            {"seed", opts.seed},
            {"budget_used", prompt.budget_used},
            {"knowledge_included",
             {{"direct", prompt.direct_included}, {"potential", prompt.potential_included}}},
            {"truncated_turns", prompt.truncated_turns},
            {"miner",
             {{"top_n", opts.miner.top_n},
              {"max_triplets_direct", opts.miner.max_triplets_direct},
              {"max_triplets_potential", opts.miner.max_triplets_potential}}},
            {"budget",
             {{"max_input_tokens", opts.budget.max_input_tokens},
              {"max_output_tokens", opts.budget.max_output_tokens},
              {"token_estimator", opts.budget.estimator_name}}},
            {"finetune", finetune},
        };
        const json line = {{"input", rec.input_text}, {"target", rec.target_text}, {"meta", meta}};
        return line.dump();
    });

    for (const std::string& line : records) out << line << '\n';
    return records.size();
}

} // namespace meddial
