#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "meddial/miner.hpp"

namespace meddial {

// One generated (or externally supplied) doctor reply, keyed to its turn.
struct Prediction {
    std::string dialogue_id;
    int turn = -1;
    std::string response;
    std::optional<std::vector<std::string>> entities; // canonical names, when structured
    std::vector<std::string> actions;                 // action names, informational
    std::string raw;                                  // unparsed model output
    std::string parse_mode;                           // "strict" | "fallback" | ""
};

std::string prediction_to_jsonl(const Prediction& p);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);
std::vector<Prediction> parse_predictions(std::string_view jsonl,
                                          const std::string& origin = "<memory>");

// Mined-knowledge record: {"dialogue_id", "turn", "direct": [[h,r,t]],
// "potential": [[h,r,t,via]], "nodes": [[name,score]]}.
struct MinedRecord {
    std::string dialogue_id;
    int turn = -1;
    KnowledgeBundle bundle;
};

std::string mined_to_jsonl(const MinedRecord& rec);

} // namespace meddial
