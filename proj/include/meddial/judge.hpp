#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "meddial/corpus.hpp"
#include "meddial/gateway.hpp"
#include "meddial/prompt.hpp"
#include "meddial/records.hpp"

namespace meddial {

inline constexpr std::string_view kJudgeTemplateVersion = "judge-v1";
inline constexpr std::string_view kJudgeNoHistoryMarker = "(无历史对话)";

struct JudgeVerdict {
    int hallucination = -1; // 0-10, lower is better
    int consistency = -1;   // 0-10, higher is better
    std::string reasoning;
    bool valid = false;
    std::string raw; // judge output, kept for invalid verdicts
};

struct JudgeConfig {
    std::size_t sample_size = 500;
    uint64_t seed = 0;
    int max_retries = 1;
    BudgetConfig budget; // history truncation follows the same budget rules
    PoolConfig pool{1, 0};
};

// Renders the scoring prompt: reviewer role, dialogue history, the generated
// response, the reference response, both criteria definitions, and the
// strict-JSON answer contract.
std::string build_judge_prompt(std::span<const Utterance> history, std::string_view generated,
                               std::string_view gold, const BudgetConfig* budget = nullptr);

// Sends the prompt and parses a strict JSON verdict; re-asks up to
// max_retries times on parse or range failures, then reports valid=false.
JudgeVerdict judge_one(const std::string& prompt, GenerationBackend& backend, int max_retries = 1);

struct JudgeSampleResult {
    std::string dialogue_id;
    int turn = -1;
    JudgeVerdict verdict;
};

struct JudgeAggregate {
    double mean_hallucination = 0.0;
    double mean_consistency = 0.0;
    std::size_t valid_count = 0;
    std::size_t invalid_count = 0;
    std::size_t sample_count = 0;
    std::vector<JudgeSampleResult> results;
};

// Judges a seeded uniform sample of the predictions (all of them when fewer
// than sample_size). Means are over valid verdicts only; throws when no
// verdict is valid.
JudgeAggregate judge_run(std::span<const Prediction> predictions,
                         std::span<const Dialogue> corpus, const JudgeConfig& cfg,
                         GenerationBackend& backend);

nlohmann::json judge_aggregate_to_json(const JudgeAggregate& agg);
std::string judge_result_to_jsonl(const JudgeSampleResult& result);

} // namespace meddial
