#include <doctest.h>

#include <map>

#include "meddial/error.hpp"
#include "meddial/judge.hpp"
#include "testutil.hpp"

using namespace meddial;

namespace {

// Fixed response regardless of prompt.
class StaticBackend : public GenerationBackend {
public:
    explicit StaticBackend(std::string response) : response_(std::move(response)) {}
    std::string generate(const GenerationRequest&) override {
        ++calls;
        return response_;
    }
    std::string name() const override { return "static"; }
    int calls = 0;

private:
    std::string response_;
};

// Replies with script[i] for the i-th distinct prompt; retries of the same
// prompt see the same entry.
class ScriptedBackend : public GenerationBackend {
public:
    explicit ScriptedBackend(std::vector<std::string> script) : script_(std::move(script)) {}
    std::string generate(const GenerationRequest& req) override {
        const auto [it, fresh] = assigned_.try_emplace(req.input_text, assigned_.size());
        (void)fresh;
        return script_[it->second % script_.size()];
    }
    std::string name() const override { return "scripted"; }

private:
    std::vector<std::string> script_;
    std::map<std::string, std::size_t> assigned_;
};

Utterance turn_of(Role role, std::string text) {
    Utterance u;
    u.role = role;
    u.text = std::move(text);
    return u;
}

std::vector<Prediction> predictions_for(const std::vector<Dialogue>& corpus) {
    std::vector<Prediction> out;
    for (const Dialogue& d : corpus) {
        for (std::size_t i = 1; i < d.turns.size(); i += 2) {
            Prediction p;
            p.dialogue_id = d.id;
            p.turn = static_cast<int>(i);
            p.response = "生成的回复" + d.id;
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::vector<Dialogue> tiny_corpus(std::size_t n) {
    std::vector<Dialogue> corpus;
    for (std::size_t i = 0; i < n; ++i) {
        Dialogue d;
        d.id = "j" + std::to_string(i);
        d.turns = {turn_of(Role::Patient, "患者主诉" + std::to_string(i)),
                   turn_of(Role::Doctor, "医生答复" + std::to_string(i))};
        corpus.push_back(std::move(d));
    }
    return corpus;
}

} // namespace

TEST_CASE("build_judge_prompt structure") {
    const std::vector<Utterance> history = {turn_of(Role::Patient, "我胃痛"),
                                            turn_of(Role::Doctor, "多久了?")};

    SUBCASE("contains every section and both criteria") {
        const std::string prompt = build_judge_prompt(history, "生成回复文本", "参考回复文本");
        CHECK(prompt.find("【对话历史】") != std::string::npos);
        CHECK(prompt.find("【生成回复】") != std::string::npos);
        CHECK(prompt.find("【参考回复】") != std::string::npos);
        CHECK(prompt.find("Hallucination") != std::string::npos);
        CHECK(prompt.find("Consistency") != std::string::npos);
        CHECK(prompt.find("患者: 我胃痛") != std::string::npos);
        CHECK(prompt.find("医生: 多久了?") != std::string::npos);
        CHECK(prompt.find("hallucination") != std::string::npos); // JSON contract
    }
    SUBCASE("empty history renders the explicit marker") {
        const std::string prompt = build_judge_prompt({}, "g", "r");
        CHECK(prompt.find(std::string(kJudgeNoHistoryMarker)) != std::string::npos);
    }
    SUBCASE("budget truncation drops oldest turns first") {
        BudgetConfig budget;
        const std::string full = build_judge_prompt(history, "g", "r");
        budget.max_input_tokens = codepoint_estimator(full) - 1;
        const std::string truncated = build_judge_prompt(history, "g", "r", &budget);
        CHECK(truncated.find("患者: 我胃痛") == std::string::npos);
        CHECK(truncated.find("医生: 多久了?") != std::string::npos);
    }
    SUBCASE("golden fixture") {
        const std::string prompt = build_judge_prompt(history, "建议注意饮食。", "注意饮食,按时复查。");
        CHECK(prompt == testutil::read_file(testutil::golden("judge_prompt.txt")));
    }
}

TEST_CASE("judge_one") {
    SUBCASE("valid strict JSON verdict passes through") {
        StaticBackend backend(R"({"hallucination":1,"consistency":6,"reasoning":"ok"})");
        const JudgeVerdict v = judge_one("p", backend, 1);
        CHECK(v.valid);
        CHECK(v.hallucination == 1);
        CHECK(v.consistency == 6);
        CHECK(v.reasoning == "ok");
    }
    SUBCASE("prose is invalid after retries") {
        StaticBackend backend("我觉得这个回复还不错。");
        const JudgeVerdict v = judge_one("p", backend, 1);
        CHECK_FALSE(v.valid);
        CHECK(backend.calls == 2); // first try + one retry
        CHECK(v.raw == "我觉得这个回复还不错。");
    }
    SUBCASE("out-of-range score is invalid") {
        StaticBackend backend(R"({"hallucination":11,"consistency":6,"reasoning":"x"})");
        CHECK_FALSE(judge_one("p", backend, 0).valid);
    }
    SUBCASE("non-integer score is invalid") {
        StaticBackend backend(R"({"hallucination":1.5,"consistency":6,"reasoning":"x"})");
        CHECK_FALSE(judge_one("p", backend, 0).valid);
    }
    SUBCASE("missing reasoning key is invalid") {
        StaticBackend backend(R"({"hallucination":1,"consistency":6})");
        CHECK_FALSE(judge_one("p", backend, 0).valid);
    }
}

TEST_CASE("judge_run") {
    SUBCASE("uniform verdicts average exactly") {
        const auto corpus = tiny_corpus(4);
        const auto predictions = predictions_for(corpus);
        StaticBackend backend(R"({"hallucination":1,"consistency":6,"reasoning":"ok"})");
        JudgeConfig cfg;
        cfg.sample_size = 500;
        const JudgeAggregate agg = judge_run(predictions, corpus, cfg, backend);
        CHECK(agg.sample_count == 4);
        CHECK(agg.invalid_count == 0);
        CHECK(agg.mean_hallucination == doctest::Approx(1.0));
        CHECK(agg.mean_consistency == doctest::Approx(6.0));
    }
    SUBCASE("seeded sampling is reproducible and seed-sensitive") {
        const auto corpus = tiny_corpus(30);
        const auto predictions = predictions_for(corpus);
        StaticBackend backend(R"({"hallucination":2,"consistency":5,"reasoning":"ok"})");
        JudgeConfig cfg;
        cfg.sample_size = 10;
        cfg.seed = 99;
        const JudgeAggregate a = judge_run(predictions, corpus, cfg, backend);
        const JudgeAggregate b = judge_run(predictions, corpus, cfg, backend);
        REQUIRE(a.results.size() == 10);
        for (std::size_t i = 0; i < a.results.size(); ++i) {
            CHECK(a.results[i].dialogue_id == b.results[i].dialogue_id);
            CHECK(a.results[i].turn == b.results[i].turn);
        }
        cfg.seed = 100;
        const JudgeAggregate c = judge_run(predictions, corpus, cfg, backend);
        bool any_diff = false;
        for (std::size_t i = 0; i < a.results.size(); ++i) {
            if (a.results[i].dialogue_id != c.results[i].dialogue_id) any_diff = true;
        }
        CHECK(any_diff);
    }
    SUBCASE("means cover only the valid verdicts in a mixed fixture") {
        const auto corpus = tiny_corpus(10);
        const auto predictions = predictions_for(corpus);
        // 7 valid, 3 invalid; hand mean over valid: H 9/7 = 1.29, C 42/7 = 6.00
        ScriptedBackend backend({
            R"({"hallucination":1,"consistency":6,"reasoning":"a"})",
            R"({"hallucination":0,"consistency":7,"reasoning":"b"})",
            "这不是JSON",
            R"({"hallucination":2,"consistency":5,"reasoning":"c"})",
            R"({"hallucination":1,"consistency":6,"reasoning":"d"})",
            R"({"hallucination":11,"consistency":6,"reasoning":"range"})",
            R"({"hallucination":3,"consistency":4,"reasoning":"e"})",
            R"({"hallucination":0,"consistency":8,"reasoning":"f"})",
            R"({"hallucination":0.5,"consistency":8,"reasoning":"float"})",
            R"({"hallucination":2,"consistency":6,"reasoning":"g"})",
        });
        JudgeConfig cfg;
        cfg.sample_size = 500;
        cfg.pool = PoolConfig{1, 0}; // keep scripted assignment positional
        const JudgeAggregate agg = judge_run(predictions, corpus, cfg, backend);
        CHECK(agg.sample_count == 10);
        CHECK(agg.invalid_count == 3);
        CHECK(agg.valid_count == 7);
        CHECK(agg.mean_hallucination == doctest::Approx(9.0 / 7.0).epsilon(1e-9));
        CHECK(agg.mean_consistency == doctest::Approx(6.0).epsilon(1e-9));
    }
    SUBCASE("all-invalid set throws") {
        const auto corpus = tiny_corpus(2);
        const auto predictions = predictions_for(corpus);
        StaticBackend backend("prose only");
        JudgeConfig cfg;
        try {
            judge_run(predictions, corpus, cfg, backend);
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == "NoValidVerdicts");
        }
    }
}
