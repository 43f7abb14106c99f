#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "meddial/corpus.hpp"
#include "meddial/embed.hpp"
#include "meddial/gateway.hpp"
#include "meddial/judge.hpp"
#include "meddial/kg.hpp"
#include "meddial/metrics.hpp"
#include "meddial/miner.hpp"
#include "meddial/prompt.hpp"
#include "meddial/records.hpp"

namespace meddial {

enum class DatasetProfile { MedDG, KaMed, Custom };

std::string_view to_string(DatasetProfile p);
std::optional<DatasetProfile> profile_from(std::string_view s);

struct EndpointSpec {
    std::string backend = "mock"; // mock | cassette | http
    uint64_t mock_seed = 0;
    std::filesystem::path cassette;
    std::filesystem::path record_to; // wrap with a recorder when set
    HttpEndpointConfig http;
    PoolConfig pool;
    double temperature = 0.0;
};

struct RunConfig {
    std::filesystem::path kg_path;
    std::filesystem::path lexicon_path;
    std::filesystem::path corpus_path;
    std::filesystem::path output_dir = ".";

    DatasetProfile profile = DatasetProfile::Custom;
    uint64_t seed = 0;
    int workers = 1;

    bool respect_gold = true;
    bool filter_multimodal = false; // enabled by the KaMed profile
    std::string kamed_placeholder{kKamedPlaceholderDefault};
    std::optional<Split> split_filter; // restrict to one split when set

    MinerConfig miner;
    BudgetConfig budget;
    PromptTemplate prompt_template = default_prompt_template();

    EndpointSpec generation;
    EndpointSpec judge_endpoint;
    std::size_t judge_sample_size = 500;
    int judge_max_retries = 1;

    bool generate_all_turns = false; // default: eligible evaluation turns only

    std::optional<EmbeddingEndpointConfig> similarity; // off unless configured
    bool similarity_mock = false;

    nlohmann::json finetune_meta; // passthrough; defaults when null
};

// Parses the JSON config file; referenced input paths must exist.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const nlohmann::json& obj,
                               const std::filesystem::path& base_dir = ".");

std::unique_ptr<GenerationBackend> make_backend(const EndpointSpec& spec,
                                                const std::vector<std::string>& mock_vocabulary);

// "mock" maps to the judge-shaped deterministic mock here.
std::unique_ptr<GenerationBackend> make_judge_backend(const EndpointSpec& spec);

// Loaded inputs shared across subcommands.
struct LoadedInputs {
    Lexicon lexicon;
    KnowledgeGraph kg;
    std::vector<Dialogue> corpus;
    std::size_t multimodal_dropped = 0;
};

LoadedInputs load_inputs(const RunConfig& cfg, bool need_kg = true, bool need_corpus = true);

// Writes "<output_dir>/manifest-<step>.json" recording the config snapshot
// and input content hashes. Timestamps are deliberately omitted so repeated
// runs stay byte-identical.
void write_manifest(const RunConfig& cfg, const std::string& step,
                    const std::vector<std::filesystem::path>& outputs);

struct StepResult {
    std::filesystem::path output;
    std::size_t records = 0;
};

nlohmann::json kg_stats(const KnowledgeGraph& kg);

StepResult run_mine(const RunConfig& cfg, const LoadedInputs& in);
StepResult run_encode(const RunConfig& cfg, const LoadedInputs& in);
std::string run_prompt(const RunConfig& cfg, const LoadedInputs& in,
                       const std::string& dialogue_id, int turn);
StepResult run_emit_trainset(const RunConfig& cfg, const LoadedInputs& in);
StepResult run_generate(const RunConfig& cfg, const LoadedInputs& in);

struct EvaluateResult {
    EvalReport report;
    std::filesystem::path report_path;
    std::string table;
};

EvaluateResult run_evaluate(const RunConfig& cfg, const LoadedInputs& in,
                            const std::filesystem::path& predictions_path);

struct JudgeRunResult {
    JudgeAggregate aggregate;
    std::filesystem::path verdicts_path;
    std::filesystem::path aggregate_path;
};

JudgeRunResult run_judge(const RunConfig& cfg, const LoadedInputs& in,
                         const std::filesystem::path& predictions_path);

// Interactive loop: patient lines in, mined knowledge + generated reply out.
void run_chat(const RunConfig& cfg, const LoadedInputs& in, std::istream& input,
              std::ostream& output);

// Exit code mapping used by the CLI: 0 ok, 2 config, 3 io, 4 endpoint,
// 5 data/usage, 1 unexpected.
int exit_code_for(const Error& e);

} // namespace meddial
