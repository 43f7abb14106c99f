#pragma once

#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "meddial/corpus.hpp"
#include "meddial/kg.hpp"
#include "meddial/miner.hpp"
#include "meddial/pathway.hpp"

#include <json.hpp>

namespace meddial {

using TokenEstimator = std::function<std::size_t(std::string_view)>;

std::size_t codepoint_estimator(std::string_view text);
std::size_t byte_estimator(std::string_view text);
TokenEstimator estimator_by_name(std::string_view name); // "codepoints" | "bytes"

struct BudgetConfig {
    std::size_t max_input_tokens = 1536;
    std::size_t max_output_tokens = 256;
    std::string estimator_name = "codepoints";
    TokenEstimator token_estimator; // defaults to codepoint_estimator

    std::size_t estimate(std::string_view text) const;
};

inline constexpr std::string_view kInstructionVersion = "inst-v1";

struct PromptTemplate {
    std::string instruction;        // defaults to the built-in instruction
    std::string knowledge_header = "【相关医学知识】";
    std::string history_header = "【对话历史】";
    std::string current_header = "【当前患者咨询】";
    std::string patient_prefix = "患者: ";
    std::string doctor_prefix = "医生: ";
};

const std::string& default_instruction();
PromptTemplate default_prompt_template();

struct PromptRecord {
    std::string dialogue_id;
    int turn_index = -1;
    std::string input_text;
    std::size_t budget_used = 0;
    std::size_t direct_included = 0;
    std::size_t potential_included = 0;
    std::size_t truncated_turns = 0;
};

// Assembles instruction + knowledge + history + current utterance. When the
// budget is exceeded, content is dropped in priority order: potential
// triplets (lowest rank first), then direct triplets (last first), then the
// oldest history turns. The instruction and current utterance always stay;
// if they alone exceed the budget this throws BudgetExhausted.
PromptRecord build_prompt(const DialogueState& state, const KnowledgeBundle& bundle,
                          const EncodedUtterance& current, const BudgetConfig& cfg,
                          const PromptTemplate& tpl = default_prompt_template());

inline constexpr std::string_view kTargetEntitiesMarker = "[ENTITIES]";
inline constexpr std::string_view kTargetActionsMarker = "[ACTIONS]";
inline constexpr std::string_view kTargetResponseMarker = "[RESPONSE]";
inline constexpr std::string_view kEmptySegmentPlaceholder = "无";

struct TrainRecord {
    std::string input_text;
    std::string target_text; // [ENTITIES] ... [ACTIONS] ... [RESPONSE] ...
};

// Target layout for supervised fine-tuning: entity list, action list, then
// the verbatim gold response. Empty lists render as the explicit placeholder
// so the three-segment structure always parses.
std::string render_target(std::span<const std::string> entities,
                          std::span<const PhysicianAction> actions, std::string_view response);

TrainRecord build_train_record(const PromptRecord& prompt, const Utterance& gold);

struct EmitOptions {
    MinerConfig miner;
    BudgetConfig budget;
    PromptTemplate tpl = default_prompt_template();
    uint64_t seed = 0;
    int workers = 1;
    nlohmann::json finetune_meta; // passthrough block; defaults applied when null
};

// Default passthrough hyperparameters recorded with each train record (LoRA
// adapter shape + trainer schedule); consumed by downstream trainers only.
nlohmann::json default_finetune_meta();

// One JSONL record per doctor turn across the corpus; returns the count.
std::size_t emit_trainset(std::span<const Dialogue> corpus, const KnowledgeGraph& kg,
                          const EmitOptions& opts, std::ostream& out);

} // namespace meddial
