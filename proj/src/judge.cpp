#include "meddial/judge.hpp"

#include <algorithm>
#include <map>

#include "meddial/error.hpp"
#include "meddial/unicode.hpp"
#include "meddial/util.hpp"

namespace meddial {

using nlohmann::json;

std::string build_judge_prompt(std::span<const Utterance> history, std::string_view generated,
                               std::string_view gold, const BudgetConfig* budget) {
    const std::string head =
        "你将扮演一名经验丰富的医生,负责评估线上问诊中自动生成的医生回复的质量。\n"
        "请阅读以下对话历史、生成回复和参考回复,并按照评分标准打分。\n";
    const std::string criteria =
        "【评分标准】\n"
        "Hallucination(幻觉,0-10分):生成回复是否引入了与对话历史冲突或历史中未提及的信息。"
        "分数越低表示幻觉越少。\n"
        "Consistency(一致性,0-10分):生成回复与参考回复是否一致,包括关键信息和提出的问题。"
        "分数越高表示一致性越强。\n";
    const std::string contract =
        "请严格按以下 JSON 格式输出,不要输出任何其他内容:\n"
        "{\"hallucination\": <0-10整数>, \"consistency\": <0-10整数>, \"reasoning\": \"<简要理由>\"}";

    auto render_history = [&](std::size_t from) {
        std::string block = "【对话历史】\n";
        if (from >= history.size()) {
            block += std::string(kJudgeNoHistoryMarker) + "\n";
            return block;
        }
        for (std::size_t i = from; i < history.size(); ++i) {
            block += (history[i].role == Role::Patient ? "患者: " : "医生: ");
            block += history[i].text;
            block += '\n';
        }
        return block;
    };

    auto assemble = [&](std::size_t from) {
        std::string out = head;
        out += '\n';
        out += render_history(from);
        out += "\n【生成回复】\n";
        out += generated;
        out += "\n\n【参考回复】\n";
        out += gold;
        out += "\n\n";
        out += criteria;
        out += '\n';
        out += contract;
        return out;
    };

    std::size_t from = 0;
    std::string prompt = assemble(from);
    if (budget) {
        // Same truncation rule as response prompts: oldest history turns go first.
        while (budget->estimate(prompt) > budget->max_input_tokens && from < history.size()) {
            ++from;
            prompt = assemble(from);
        }
    }
    return prompt;
}

namespace {

bool in_range(int v) {
    return v >= 0 && v <= 10;
}

JudgeVerdict parse_verdict(const std::string& raw) {
    JudgeVerdict v;
    v.raw = raw;
    json obj;
    try {
        obj = json::parse(trim(raw));
    } catch (const json::parse_error&) {
        return v;
    }
    if (!obj.is_object() || !obj.contains("hallucination") || !obj.contains("consistency") ||
        !obj.contains("reasoning")) {
        return v;
    }
    if (!obj["hallucination"].is_number_integer() || !obj["consistency"].is_number_integer() ||
        !obj["reasoning"].is_string()) {
        return v;
    }
    const int h = obj["hallucination"].get<int>();
    const int c = obj["consistency"].get<int>();
    if (!in_range(h) || !in_range(c)) {
        return v;
    }
    v.hallucination = h;
    v.consistency = c;
    v.reasoning = obj["reasoning"].get<std::string>();
    v.valid = true;
    return v;
}

} // namespace

JudgeVerdict judge_one(const std::string& prompt, GenerationBackend& backend, int max_retries) {
    GenerationRequest req;
    req.input_text = prompt;
    JudgeVerdict verdict;
    for (int attempt = 0; attempt <= std::max(0, max_retries); ++attempt) {
        verdict = parse_verdict(backend.generate(req));
        if (verdict.valid) return verdict;
    }
    return verdict;
}

JudgeAggregate judge_run(std::span<const Prediction> predictions,
                         std::span<const Dialogue> corpus, const JudgeConfig& cfg,
                         GenerationBackend& backend) {
    if (cfg.sample_size == 0) {
        throw config_error("BadSampleSize", "judge sample_size must be positive");
    }

    std::map<std::string, const Dialogue*> by_id;
    for (const Dialogue& d : corpus) by_id.emplace(d.id, &d);

    // Judgeable predictions in deterministic (dialogue_id, turn) order.
    struct Target {
        const Prediction* prediction;
        const Dialogue* dialogue;
    };
    std::vector<Target> targets;
    for (const Prediction& p : predictions) {
        const auto it = by_id.find(p.dialogue_id);
        if (it == by_id.end()) continue;
        const Dialogue& d = *it->second;
        if (p.turn < 0 || static_cast<std::size_t>(p.turn) >= d.turns.size()) continue;
        if (d.turns[static_cast<std::size_t>(p.turn)].role != Role::Doctor) continue;
        targets.push_back(Target{&p, &d});
    }
    std::sort(targets.begin(), targets.end(), [](const Target& a, const Target& b) {
        if (a.prediction->dialogue_id != b.prediction->dialogue_id) {
            return a.prediction->dialogue_id < b.prediction->dialogue_id;
        }
        return a.prediction->turn < b.prediction->turn;
    });
    if (targets.empty()) {
        throw data_error("NoJudgeableSamples", "no prediction aligns with a corpus doctor turn");
    }

    const auto sampled = stable_sample(targets.size(), cfg.sample_size, cfg.seed);

    JudgeAggregate agg;
    agg.results.resize(sampled.size());
    RateLimiter limiter(cfg.pool.requests_per_minute);
    pooled_for(sampled.size(), cfg.pool.max_in_flight, [&](std::size_t slot) {
        const Target& target = targets[sampled[slot]];
        const Dialogue& d = *target.dialogue;
        const auto turn = static_cast<std::size_t>(target.prediction->turn);
        const std::span<const Utterance> history(d.turns.data(), turn);

        const std::string prompt = build_judge_prompt(history, target.prediction->response,
                                                      d.turns[turn].text, &cfg.budget);
        JudgeSampleResult& result = agg.results[slot];
        result.dialogue_id = target.prediction->dialogue_id;
        result.turn = target.prediction->turn;
        limiter.acquire();
        result.verdict = judge_one(prompt, backend, cfg.max_retries);
    });

    double h_sum = 0.0, c_sum = 0.0;
    for (const JudgeSampleResult& result : agg.results) {
        if (result.verdict.valid) {
            h_sum += result.verdict.hallucination;
            c_sum += result.verdict.consistency;
            ++agg.valid_count;
        } else {
            ++agg.invalid_count;
        }
    }
    agg.sample_count = agg.results.size();
    if (agg.valid_count == 0) {
        throw data_error("NoValidVerdicts", "every sampled verdict failed to parse");
    }
    agg.mean_hallucination = h_sum / static_cast<double>(agg.valid_count);
    agg.mean_consistency = c_sum / static_cast<double>(agg.valid_count);
    return agg;
}

json judge_aggregate_to_json(const JudgeAggregate& agg) {
    return json{{"mean_hallucination", agg.mean_hallucination},
                {"mean_consistency", agg.mean_consistency},
                {"valid_count", agg.valid_count},
                {"invalid_count", agg.invalid_count},
                {"sample_count", agg.sample_count},
                {"template_version", std::string(kJudgeTemplateVersion)}};
}

std::string judge_result_to_jsonl(const JudgeSampleResult& result) {
    json obj = {{"dialogue_id", result.dialogue_id},
                {"turn", result.turn},
                {"valid", result.verdict.valid}};
    if (result.verdict.valid) {
        obj["hallucination"] = result.verdict.hallucination;
        obj["consistency"] = result.verdict.consistency;
        obj["reasoning"] = result.verdict.reasoning;
    } else {
        obj["raw"] = result.verdict.raw;
    }
    return obj.dump();
}

} // namespace meddial
