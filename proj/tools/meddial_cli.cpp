#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "meddial/error.hpp"
#include "meddial/pipeline.hpp"

using namespace meddial;

namespace {

struct CommonFlags {
    std::string config;
    std::string kg, lexicon, corpus, out;
    std::optional<uint64_t> seed;
    std::optional<int> workers;
    std::string profile;
    std::string split;
    std::string backend;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config,-c", flags.config, "run config JSON file");
    cmd->add_option("--kg", flags.kg, "knowledge graph TSV (overrides config)");
    cmd->add_option("--lexicon", flags.lexicon, "entity lexicon TSV (overrides config)");
    cmd->add_option("--corpus", flags.corpus, "dialogue corpus JSONL (overrides config)");
    cmd->add_option("--out", flags.out, "output directory (overrides config)");
    cmd->add_option("--seed", flags.seed, "run seed (overrides config)");
    cmd->add_option("--workers", flags.workers, "parallel workers (overrides config)");
    cmd->add_option("--profile", flags.profile, "dataset profile: meddg|kamed|custom");
    cmd->add_option("--split", flags.split, "restrict to one split: train|valid|test");
    cmd->add_option("--backend", flags.backend, "generation backend: mock|cassette|http");
}

RunConfig build_config(const CommonFlags& flags) {
    RunConfig cfg;
    if (!flags.config.empty()) cfg = load_run_config(flags.config);
    if (!flags.kg.empty()) cfg.kg_path = flags.kg;
    if (!flags.lexicon.empty()) cfg.lexicon_path = flags.lexicon;
    if (!flags.corpus.empty()) cfg.corpus_path = flags.corpus;
    if (!flags.out.empty()) cfg.output_dir = flags.out;
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.workers) cfg.workers = *flags.workers;
    if (!flags.profile.empty()) {
        const auto p = profile_from(flags.profile);
        if (!p) throw config_error("UnknownProfile", "unknown profile '" + flags.profile + "'");
        cfg.profile = *p;
        if (*p == DatasetProfile::KaMed) cfg.filter_multimodal = true;
    }
    if (!flags.split.empty()) {
        const auto sp = split_from(flags.split);
        if (!sp) throw config_error("UnknownSplit", "unknown split '" + flags.split + "'");
        cfg.split_filter = sp;
    }
    if (!flags.backend.empty()) {
        cfg.generation.backend = flags.backend;
        cfg.judge_endpoint.backend = flags.backend;
    }
    return cfg;
}

void print_error(const Error& e) {
    const nlohmann::json obj = {
        {"error", {{"code", e.code()}, {"message", std::string(e.what())}}}};
    std::cerr << obj.dump() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"knowledge-grounded medical dialogue pipeline"};
    app.require_subcommand(1);

    CommonFlags flags;

    // kg stats
    auto* kg_cmd = app.add_subcommand("kg", "knowledge graph utilities");
    kg_cmd->require_subcommand(1);
    auto* kg_stats_cmd = kg_cmd->add_subcommand("stats", "node/triplet/relation counts");
    add_common(kg_stats_cmd, flags);

    auto* mine_cmd = app.add_subcommand("mine", "mine per-turn knowledge bundles to JSONL");
    add_common(mine_cmd, flags);

    auto* encode_cmd = app.add_subcommand("encode", "dump encoded dialogue histories to JSONL");
    add_common(encode_cmd, flags);

    auto* prompt_cmd = app.add_subcommand("prompt", "print the rendered prompt for one turn");
    add_common(prompt_cmd, flags);
    std::string dialogue_id;
    int turn = -1;
    prompt_cmd->add_option("--dialogue", dialogue_id, "dialogue id")->required();
    prompt_cmd->add_option("--turn", turn, "doctor turn index")->required();

    auto* emit_cmd = app.add_subcommand("emit-trainset", "write supervised training records");
    add_common(emit_cmd, flags);

    auto* generate_cmd = app.add_subcommand("generate", "generate predictions for eval turns");
    add_common(generate_cmd, flags);
    bool all_turns = false;
    generate_cmd->add_flag("--all-turns", all_turns, "generate for every doctor turn");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "score predictions against gold turns");
    add_common(evaluate_cmd, flags);
    std::string predictions;
    evaluate_cmd->add_option("--predictions", predictions,
                             "predictions JSONL (default <out>/predictions.jsonl)");

    auto* judge_cmd = app.add_subcommand("judge", "LLM-judge scoring of predictions");
    add_common(judge_cmd, flags);
    judge_cmd->add_option("--predictions", predictions,
                          "predictions JSONL (default <out>/predictions.jsonl)");

    auto* chat_cmd = app.add_subcommand("chat", "interactive consultation REPL");
    add_common(chat_cmd, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = build_config(flags);
        if (all_turns) cfg.generate_all_turns = true;

        if (kg_stats_cmd->parsed()) {
            if (cfg.kg_path.empty()) throw config_error("MissingPath", "kg stats needs --kg");
            if (!std::filesystem::exists(cfg.kg_path)) {
                throw config_error("MissingPath",
                                   "kg path does not exist: " + cfg.kg_path.string());
            }
            const KnowledgeGraph kg = load_kg(cfg.kg_path);
            std::cout << kg_stats(kg).dump(2) << "\n";
            return 0;
        }

        if (mine_cmd->parsed()) {
            const auto in = load_inputs(cfg);
            const StepResult res = run_mine(cfg, in);
            std::cout << "wrote " << res.records << " records to " << res.output.string() << "\n";
            return 0;
        }
        if (encode_cmd->parsed()) {
            const auto in = load_inputs(cfg, /*need_kg=*/false);
            const StepResult res = run_encode(cfg, in);
            std::cout << "wrote " << res.records << " dialogues to " << res.output.string()
                      << "\n";
            return 0;
        }
        if (prompt_cmd->parsed()) {
            const auto in = load_inputs(cfg);
            std::cout << run_prompt(cfg, in, dialogue_id, turn) << "\n";
            return 0;
        }
        if (emit_cmd->parsed()) {
            const auto in = load_inputs(cfg);
            const StepResult res = run_emit_trainset(cfg, in);
            std::cout << "wrote " << res.records << " records to " << res.output.string() << "\n";
            return 0;
        }
        if (generate_cmd->parsed()) {
            const auto in = load_inputs(cfg);
            const StepResult res = run_generate(cfg, in);
            std::cout << "wrote " << res.records << " predictions to " << res.output.string()
                      << "\n";
            return 0;
        }
        if (evaluate_cmd->parsed()) {
            const auto in = load_inputs(cfg, /*need_kg=*/false);
            const std::filesystem::path pred_path =
                predictions.empty() ? cfg.output_dir / "predictions.jsonl"
                                    : std::filesystem::path(predictions);
            const EvaluateResult res = run_evaluate(cfg, in, pred_path);
            std::cout << res.table;
            std::cout << "report: " << res.report_path.string() << "\n";
            return 0;
        }
        if (judge_cmd->parsed()) {
            const auto in = load_inputs(cfg, /*need_kg=*/false);
            const std::filesystem::path pred_path =
                predictions.empty() ? cfg.output_dir / "predictions.jsonl"
                                    : std::filesystem::path(predictions);
            const JudgeRunResult res = run_judge(cfg, in, pred_path);
            std::cout << "hallucination " << res.aggregate.mean_hallucination << " consistency "
                      << res.aggregate.mean_consistency << " invalid "
                      << res.aggregate.invalid_count << "/" << res.aggregate.sample_count << "\n";
            std::cout << "verdicts: " << res.verdicts_path.string() << "\n";
            return 0;
        }
        if (chat_cmd->parsed()) {
            const auto in = load_inputs(cfg);
            run_chat(cfg, in, std::cin, std::cout);
            return 0;
        }
    } catch (const Error& e) {
        print_error(e);
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", {{"code", "Unexpected"}, {"message", e.what()}}}}
                         .dump()
                  << "\n";
        return 1;
    }
    return 0;
}
