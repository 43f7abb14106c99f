#include "meddial/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "meddial/error.hpp"
#include "meddial/parallel.hpp"
#include "meddial/pathway.hpp"
#include "meddial/unicode.hpp"
#include "meddial/util.hpp"

namespace meddial {

using nlohmann::json;

std::string_view to_string(DatasetProfile p) {
    switch (p) {
    case DatasetProfile::MedDG: return "meddg";
    case DatasetProfile::KaMed: return "kamed";
    case DatasetProfile::Custom: return "custom";
    }
    return "custom";
}

std::optional<DatasetProfile> profile_from(std::string_view s) {
    const std::string lower = to_lower_ascii(trim(s));
    if (lower == "meddg") return DatasetProfile::MedDG;
    if (lower == "kamed") return DatasetProfile::KaMed;
    if (lower == "custom" || lower.empty()) return DatasetProfile::Custom;
    return std::nullopt;
}

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("FileNotReadable", "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("FileNotWritable", "cannot write " + path.string());
    out << content;
    if (!out) throw io_error("FileNotWritable", "write failed for " + path.string());
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::filesystem::path& p) {
    if (p.empty() || p.is_absolute()) return p;
    return base / p;
}

EndpointSpec endpoint_from_json(const json& obj, const std::filesystem::path& base) {
    EndpointSpec spec;
    if (obj.is_null()) return spec;
    if (obj.contains("backend")) spec.backend = obj["backend"].get<std::string>();
    if (obj.contains("mock_seed")) spec.mock_seed = obj["mock_seed"].get<uint64_t>();
    if (obj.contains("cassette")) {
        spec.cassette = resolve(base, obj["cassette"].get<std::string>());
    }
    if (obj.contains("record_to")) {
        spec.record_to = resolve(base, obj["record_to"].get<std::string>());
    }
    if (obj.contains("temperature")) spec.temperature = obj["temperature"].get<double>();
    if (obj.contains("base_url")) spec.http.base_url = obj["base_url"].get<std::string>();
    if (obj.contains("path")) spec.http.path = obj["path"].get<std::string>();
    if (obj.contains("model")) spec.http.model = obj["model"].get<std::string>();
    if (obj.contains("api_key_env")) spec.http.api_key_env = obj["api_key_env"].get<std::string>();
    if (obj.contains("system_prompt")) {
        spec.http.system_prompt = obj["system_prompt"].get<std::string>();
    }
    if (obj.contains("max_attempts")) spec.http.max_attempts = obj["max_attempts"].get<int>();
    if (obj.contains("retry_base_ms")) spec.http.retry_base_ms = obj["retry_base_ms"].get<int>();
    if (obj.contains("timeout_s")) spec.http.timeout_s = obj["timeout_s"].get<int>();
    if (obj.contains("max_in_flight")) spec.pool.max_in_flight = obj["max_in_flight"].get<int>();
    if (obj.contains("requests_per_minute")) {
        spec.pool.requests_per_minute = obj["requests_per_minute"].get<int>();
    }
    return spec;
}

json endpoint_to_json(const EndpointSpec& spec) {
    return json{{"backend", spec.backend},
                {"mock_seed", spec.mock_seed},
                {"cassette", spec.cassette.string()},
                {"model", spec.http.model},
                {"base_url", spec.http.base_url},
                {"max_in_flight", spec.pool.max_in_flight},
                {"requests_per_minute", spec.pool.requests_per_minute},
                {"temperature", spec.temperature}};
}

} // namespace

RunConfig run_config_from_json(const json& obj, const std::filesystem::path& base_dir) {
    if (!obj.is_object()) throw config_error("BadConfig", "config root must be a JSON object");
    RunConfig cfg;

    if (obj.contains("paths")) {
        const json& paths = obj["paths"];
        if (paths.contains("kg")) cfg.kg_path = resolve(base_dir, paths["kg"].get<std::string>());
        if (paths.contains("lexicon")) {
            cfg.lexicon_path = resolve(base_dir, paths["lexicon"].get<std::string>());
        }
        if (paths.contains("corpus")) {
            cfg.corpus_path = resolve(base_dir, paths["corpus"].get<std::string>());
        }
        if (paths.contains("output_dir")) {
            cfg.output_dir = resolve(base_dir, paths["output_dir"].get<std::string>());
        }
    }

    if (obj.contains("profile")) {
        const auto p = profile_from(obj["profile"].get<std::string>());
        if (!p) {
            throw config_error("UnknownProfile",
                               "unknown dataset profile '" + obj["profile"].get<std::string>() + "'");
        }
        cfg.profile = *p;
    }
    // Profile defaults first; explicit keys below override them.
    if (cfg.profile == DatasetProfile::KaMed) cfg.filter_multimodal = true;

    if (obj.contains("seed")) cfg.seed = obj["seed"].get<uint64_t>();
    if (obj.contains("workers")) cfg.workers = obj["workers"].get<int>();
    if (obj.contains("respect_gold")) cfg.respect_gold = obj["respect_gold"].get<bool>();
    if (obj.contains("filter_multimodal")) {
        cfg.filter_multimodal = obj["filter_multimodal"].get<bool>();
    }
    if (obj.contains("kamed_placeholder")) {
        cfg.kamed_placeholder = obj["kamed_placeholder"].get<std::string>();
    }
    if (obj.contains("split")) {
        const auto sp = split_from(obj["split"].get<std::string>());
        if (!sp) throw config_error("UnknownSplit", "bad split filter");
        cfg.split_filter = sp;
    }

    if (obj.contains("miner")) {
        const json& m = obj["miner"];
        if (m.contains("top_n")) cfg.miner.top_n = m["top_n"].get<int>();
        if (m.contains("max_triplets_direct")) {
            cfg.miner.max_triplets_direct = m["max_triplets_direct"].get<std::size_t>();
        }
        if (m.contains("max_triplets_potential")) {
            cfg.miner.max_triplets_potential = m["max_triplets_potential"].get<std::size_t>();
        }
        if (cfg.miner.top_n < 0) throw config_error("BadMinerConfig", "top_n must be >= 0");
    }

    if (obj.contains("budget")) {
        const json& b = obj["budget"];
        if (b.contains("max_input_tokens")) {
            cfg.budget.max_input_tokens = b["max_input_tokens"].get<std::size_t>();
        }
        if (b.contains("max_output_tokens")) {
            cfg.budget.max_output_tokens = b["max_output_tokens"].get<std::size_t>();
        }
        if (b.contains("token_estimator")) {
            cfg.budget.estimator_name = b["token_estimator"].get<std::string>();
            estimator_by_name(cfg.budget.estimator_name); // validate
        }
        if (cfg.budget.max_input_tokens == 0 || cfg.budget.max_output_tokens == 0) {
            throw config_error("BadBudget", "budget token limits must be positive");
        }
    }

    if (obj.contains("instruction_template")) {
        cfg.prompt_template.instruction =
            slurp(resolve(base_dir, obj["instruction_template"].get<std::string>()));
    }

    cfg.generation = endpoint_from_json(obj.value("generation", json()), base_dir);
    cfg.judge_endpoint = endpoint_from_json(obj.value("judge", json()), base_dir);
    if (obj.contains("judge") && obj["judge"].contains("sample_size")) {
        cfg.judge_sample_size = obj["judge"]["sample_size"].get<std::size_t>();
        if (cfg.judge_sample_size == 0) {
            throw config_error("BadSampleSize", "judge sample_size must be positive");
        }
    }
    if (obj.contains("judge") && obj["judge"].contains("max_retries")) {
        cfg.judge_max_retries = obj["judge"]["max_retries"].get<int>();
    }

    if (obj.contains("generate_all_turns")) {
        cfg.generate_all_turns = obj["generate_all_turns"].get<bool>();
    }

    if (obj.contains("similarity")) {
        const json& s = obj["similarity"];
        if (s.contains("mock") && s["mock"].get<bool>()) {
            cfg.similarity_mock = true;
            cfg.similarity = EmbeddingEndpointConfig{};
        } else {
            EmbeddingEndpointConfig e;
            if (s.contains("base_url")) e.base_url = s["base_url"].get<std::string>();
            if (s.contains("path")) e.path = s["path"].get<std::string>();
            if (s.contains("model")) e.model = s["model"].get<std::string>();
            if (s.contains("api_key_env")) e.api_key_env = s["api_key_env"].get<std::string>();
            cfg.similarity = e;
        }
    }

    if (obj.contains("finetune")) cfg.finetune_meta = obj["finetune"];

    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    json obj;
    try {
        obj = json::parse(slurp(path));
    } catch (const json::parse_error& e) {
        throw config_error("BadConfig", path.string() + ": " + e.what());
    }
    return run_config_from_json(obj, path.parent_path());
}

std::unique_ptr<GenerationBackend> make_backend(const EndpointSpec& spec,
                                                const std::vector<std::string>& mock_vocabulary) {
    std::unique_ptr<GenerationBackend> backend;
    if (spec.backend == "mock") {
        backend = std::make_unique<MockBackend>(spec.mock_seed, mock_vocabulary);
    } else if (spec.backend == "cassette") {
        if (spec.cassette.empty()) {
            throw config_error("MissingCassette", "cassette backend needs a cassette path");
        }
        backend = std::make_unique<CassetteBackend>(CassetteBackend::load(spec.cassette));
    } else if (spec.backend == "http") {
        backend = std::make_unique<HttpBackend>(spec.http);
    } else {
        throw config_error("UnknownBackend", "unknown backend '" + spec.backend + "'");
    }
    if (!spec.record_to.empty()) {
        backend = std::make_unique<CassetteRecorder>(
            std::shared_ptr<GenerationBackend>(std::move(backend)), spec.record_to);
    }
    return backend;
}

std::unique_ptr<GenerationBackend> make_judge_backend(const EndpointSpec& spec) {
    if (spec.backend == "mock") {
        std::unique_ptr<GenerationBackend> backend =
            std::make_unique<MockJudgeBackend>(spec.mock_seed);
        if (!spec.record_to.empty()) {
            backend = std::make_unique<CassetteRecorder>(
                std::shared_ptr<GenerationBackend>(std::move(backend)), spec.record_to);
        }
        return backend;
    }
    return make_backend(spec, {});
}

LoadedInputs load_inputs(const RunConfig& cfg, bool need_kg, bool need_corpus) {
    if (cfg.lexicon_path.empty()) {
        throw config_error("MissingPath", "config needs paths.lexicon");
    }
    if (!std::filesystem::exists(cfg.lexicon_path)) {
        throw config_error("MissingPath", "lexicon path does not exist: " + cfg.lexicon_path.string());
    }
    LoadedInputs in;
    in.lexicon = load_lexicon(cfg.lexicon_path);

    if (need_kg) {
        if (cfg.kg_path.empty()) throw config_error("MissingPath", "config needs paths.kg");
        if (!std::filesystem::exists(cfg.kg_path)) {
            throw config_error("MissingPath", "kg path does not exist: " + cfg.kg_path.string());
        }
        in.kg = load_kg(cfg.kg_path);
    }
    if (need_corpus) {
        if (cfg.corpus_path.empty()) throw config_error("MissingPath", "config needs paths.corpus");
        if (!std::filesystem::exists(cfg.corpus_path)) {
            throw config_error("MissingPath",
                               "corpus path does not exist: " + cfg.corpus_path.string());
        }
        in.corpus = load_corpus(cfg.corpus_path, in.lexicon, cfg.respect_gold);
        if (cfg.filter_multimodal) {
            FilterResult filtered = filter_kamed_multimodal(in.corpus, cfg.kamed_placeholder);
            in.corpus = std::move(filtered.retained);
            in.multimodal_dropped = filtered.dropped;
        }
        if (cfg.split_filter) {
            std::erase_if(in.corpus,
                          [&](const Dialogue& d) { return d.split != *cfg.split_filter; });
        }
    }
    return in;
}

namespace {

json config_snapshot(const RunConfig& cfg) {
    return json{
        {"paths",
         {{"kg", cfg.kg_path.string()},
          {"lexicon", cfg.lexicon_path.string()},
          {"corpus", cfg.corpus_path.string()},
          {"output_dir", cfg.output_dir.string()}}},
        {"profile", std::string(to_string(cfg.profile))},
        {"seed", cfg.seed},
        {"workers", cfg.workers},
        {"respect_gold", cfg.respect_gold},
        {"filter_multimodal", cfg.filter_multimodal},
        {"miner",
         {{"top_n", cfg.miner.top_n},
          {"max_triplets_direct", cfg.miner.max_triplets_direct},
          {"max_triplets_potential", cfg.miner.max_triplets_potential}}},
        {"budget",
         {{"max_input_tokens", cfg.budget.max_input_tokens},
          {"max_output_tokens", cfg.budget.max_output_tokens},
          {"token_estimator", cfg.budget.estimator_name}}},
        {"generation", endpoint_to_json(cfg.generation)},
        {"judge", endpoint_to_json(cfg.judge_endpoint)},
        {"judge_sample_size", cfg.judge_sample_size},
        {"instruction_version", std::string(kInstructionVersion)},
        {"encoding_version", std::string(kEncodingVersion)},
        {"action_table_version", std::string(kActionTableVersion)},
    };
}

json hash_entry(const std::filesystem::path& path) {
    if (path.empty() || !std::filesystem::exists(path)) return nullptr;
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return json{{"path", path.string()}, {"fnv1a64", fnv1a64_hex(buf.str())}};
}

} // namespace

void write_manifest(const RunConfig& cfg, const std::string& step,
                    const std::vector<std::filesystem::path>& outputs) {
    json out_list = json::array();
    for (const auto& p : outputs) out_list.push_back(p.string());
    const json manifest = {
        {"step", step},
        {"config", config_snapshot(cfg)},
        {"inputs",
         {{"kg", hash_entry(cfg.kg_path)},
          {"lexicon", hash_entry(cfg.lexicon_path)},
          {"corpus", hash_entry(cfg.corpus_path)}}},
        {"outputs", std::move(out_list)},
    };
    std::filesystem::create_directories(cfg.output_dir);
    write_file(cfg.output_dir / ("manifest-" + step + ".json"), manifest.dump(2) + "\n");
}

json kg_stats(const KnowledgeGraph& kg) {
    json hist = json::object();
    for (const auto& [rel, count] : kg.relation_histogram()) hist[rel] = count;
    return json{{"nodes", kg.node_count()},
                {"triplets", kg.triplet_count()},
                {"relations", kg.relation_histogram().size()},
                {"relation_histogram", std::move(hist)}};
}

namespace {

struct GenerationUnit {
    const Dialogue* dialogue;
    ResponsePoint point;
};

std::vector<GenerationUnit> collect_units(const std::vector<Dialogue>& corpus,
                                          bool eligible_only) {
    std::vector<GenerationUnit> units;
    for (const Dialogue& d : corpus) {
        std::vector<std::size_t> wanted;
        if (eligible_only) {
            wanted = eligible_eval_turns(d);
        }
        for (ResponsePoint& point : response_points(d)) {
            if (eligible_only &&
                std::find(wanted.begin(), wanted.end(), point.doctor_turn) == wanted.end()) {
                continue;
            }
            units.push_back(GenerationUnit{&d, std::move(point)});
        }
    }
    return units;
}

} // namespace

StepResult run_mine(const RunConfig& cfg, const LoadedInputs& in) {
    const auto units = collect_units(in.corpus, /*eligible_only=*/false);
    const auto lines = map_indexed(units, cfg.workers, [&](const GenerationUnit& unit) {
        MinedRecord rec;
        rec.dialogue_id = unit.dialogue->id;
        rec.turn = static_cast<int>(unit.point.doctor_turn);
        rec.bundle = mine(in.kg, unit.point.entity_context, cfg.miner);
        return mined_to_jsonl(rec);
    });

    std::filesystem::create_directories(cfg.output_dir);
    const auto path = cfg.output_dir / "mined.jsonl";
    std::string blob;
    for (const std::string& line : lines) blob += line + "\n";
    write_file(path, blob);
    write_manifest(cfg, "mine", {path});
    return StepResult{path, lines.size()};
}

StepResult run_encode(const RunConfig& cfg, const LoadedInputs& in) {
    const auto lines = map_indexed(in.corpus, cfg.workers, [&](const Dialogue& d) {
        DialogueState state;
        json turns = json::array();
        for (const Utterance& u : d.turns) {
            state = advance(std::move(state), u);
            const EncodedUtterance& enc = state.encoded_history.back();
            json actions = json::array();
            for (const auto a : enc.actions_used) actions.push_back(std::string(action_name(a)));
            turns.push_back({{"role", std::string(to_string(enc.role))},
                             {"rendered", enc.rendered},
                             {"entities", enc.entities_used},
                             {"actions", std::move(actions)}});
        }
        const json obj = {{"dialogue_id", d.id},
                          {"turns", std::move(turns)},
                          {"cumulative_entities", state.cumulative_entities}};
        return obj.dump();
    });

    std::filesystem::create_directories(cfg.output_dir);
    const auto path = cfg.output_dir / "encoded.jsonl";
    std::string blob;
    for (const std::string& line : lines) blob += line + "\n";
    write_file(path, blob);
    write_manifest(cfg, "encode", {path});
    return StepResult{path, lines.size()};
}

namespace {

PromptRecord prompt_for_point(const RunConfig& cfg, const LoadedInputs& in,
                              const Dialogue& d, const ResponsePoint& point) {
    const KnowledgeBundle bundle = mine(in.kg, point.entity_context, cfg.miner);
    PromptRecord prompt =
        build_prompt(point.history, bundle, point.current, cfg.budget, cfg.prompt_template);
    prompt.dialogue_id = d.id;
    prompt.turn_index = static_cast<int>(point.doctor_turn);
    return prompt;
}

} // namespace

std::string run_prompt(const RunConfig& cfg, const LoadedInputs& in,
                       const std::string& dialogue_id, int turn) {
    for (const Dialogue& d : in.corpus) {
        if (d.id != dialogue_id) continue;
        for (const ResponsePoint& point : response_points(d)) {
            if (static_cast<int>(point.doctor_turn) == turn) {
                return prompt_for_point(cfg, in, d, point).input_text;
            }
        }
        throw data_error("NoSuchTurn", "dialogue '" + dialogue_id + "' has no doctor turn " +
                                           std::to_string(turn));
    }
    throw data_error("NoSuchDialogue", "no dialogue with id '" + dialogue_id + "'");
}

StepResult run_emit_trainset(const RunConfig& cfg, const LoadedInputs& in) {
    EmitOptions opts;
    opts.miner = cfg.miner;
    opts.budget = cfg.budget;
    opts.tpl = cfg.prompt_template;
    opts.seed = cfg.seed;
    opts.workers = cfg.workers;
    opts.finetune_meta = cfg.finetune_meta;

    std::filesystem::create_directories(cfg.output_dir);
    const auto path = cfg.output_dir / "trainset.jsonl";
    std::ostringstream buf;
    const std::size_t count = emit_trainset(in.corpus, in.kg, opts, buf);
    write_file(path, buf.str());
    write_manifest(cfg, "emit-trainset", {path});
    return StepResult{path, count};
}

StepResult run_generate(const RunConfig& cfg, const LoadedInputs& in) {
    const auto units = collect_units(in.corpus, !cfg.generate_all_turns);

    // Prompts build in parallel; requests go through the bounded pool.
    const auto prompts = map_indexed(units, cfg.workers, [&](const GenerationUnit& unit) {
        return prompt_for_point(cfg, in, *unit.dialogue, unit.point);
    });

    std::vector<GenerationRequest> requests;
    requests.reserve(prompts.size());
    for (const PromptRecord& p : prompts) {
        GenerationRequest req;
        req.input_text = p.input_text;
        req.max_new_tokens = cfg.budget.max_output_tokens;
        req.temperature = cfg.generation.temperature;
        req.seed = cfg.seed;
        requests.push_back(std::move(req));
    }

    const auto backend = make_backend(cfg.generation, in.lexicon.canonicals());
    const auto raws = generate_batch(*backend, requests, cfg.generation.pool);

    std::string blob;
    for (std::size_t i = 0; i < units.size(); ++i) {
        const StructuredResponse parsed = parse_structured(raws[i], in.lexicon);
        Prediction p;
        p.dialogue_id = units[i].dialogue->id;
        p.turn = static_cast<int>(units[i].point.doctor_turn);
        p.response = parsed.response_text;
        p.entities = parsed.predicted_entities;
        for (const auto a : parsed.predicted_actions) p.actions.emplace_back(action_name(a));
        p.raw = parsed.raw;
        p.parse_mode = parsed.parse_mode == ParseMode::Strict ? "strict" : "fallback";
        blob += prediction_to_jsonl(p) + "\n";
    }

    std::filesystem::create_directories(cfg.output_dir);
    const auto path = cfg.output_dir / "predictions.jsonl";
    write_file(path, blob);
    write_manifest(cfg, "generate", {path});
    return StepResult{path, units.size()};
}

EvaluateResult run_evaluate(const RunConfig& cfg, const LoadedInputs& in,
                            const std::filesystem::path& predictions_path) {
    const auto predictions = load_predictions(predictions_path);
    std::map<std::pair<std::string, int>, const Prediction*> by_key;
    for (const Prediction& p : predictions) by_key[{p.dialogue_id, p.turn}] = &p;

    struct EvalUnit {
        const Dialogue* dialogue;
        std::size_t turn;
        const Prediction* prediction;
    };
    std::vector<EvalUnit> units;
    std::size_t missing = 0;
    for (const Dialogue& d : in.corpus) {
        for (const std::size_t turn : eligible_eval_turns(d)) {
            const auto it = by_key.find({d.id, static_cast<int>(turn)});
            if (it == by_key.end()) {
                ++missing;
                continue;
            }
            units.push_back(EvalUnit{&d, turn, it->second});
        }
    }
    if (units.empty()) {
        throw data_error("NoEvaluableSamples",
                         "no prediction matches an eligible doctor turn");
    }
    if (missing > 0) {
        std::cerr << "warning: " << missing << " eligible turn(s) lack predictions\n";
    }

    auto samples = map_indexed(units, cfg.workers, [&](const EvalUnit& unit) {
        const Utterance& gold = unit.dialogue->turns[unit.turn];
        std::vector<std::string> gold_entities;
        for (const EntityMention& m : gold.entities) gold_entities.push_back(m.canonical);

        // Explicit entities win; otherwise fall back to dictionary annotation
        // of the free-text response (how unstructured baselines get scored).
        std::vector<std::string> pred_entities;
        if (unit.prediction->entities) {
            for (const std::string& name : *unit.prediction->entities) {
                if (in.lexicon.has_canonical(name) &&
                    std::find(pred_entities.begin(), pred_entities.end(), name) ==
                        pred_entities.end()) {
                    pred_entities.push_back(name);
                }
            }
        } else {
            for (const EntityMention& m : annotate_entities(unit.prediction->response, in.lexicon)) {
                pred_entities.push_back(m.canonical);
            }
        }
        return score_sample(unit.dialogue->id, static_cast<int>(unit.turn),
                            unit.prediction->response, gold.text, gold_entities, pred_entities);
    });

    if (cfg.similarity) {
        std::vector<std::string> cands, refs;
        cands.reserve(units.size());
        refs.reserve(units.size());
        for (const EvalUnit& unit : units) {
            cands.push_back(unit.prediction->response);
            refs.push_back(unit.dialogue->turns[unit.turn].text);
        }
        std::unique_ptr<EmbeddingBackend> embed_backend;
        if (cfg.similarity_mock) {
            embed_backend = std::make_unique<MockEmbeddingBackend>();
        } else {
            embed_backend = std::make_unique<HttpEmbeddingBackend>(*cfg.similarity);
        }
        const auto sims = embedding_similarity(*embed_backend, cands, refs);
        for (std::size_t i = 0; i < samples.size(); ++i) samples[i].similarity = sims[i];
    }

    EvaluateResult result;
    result.report = aggregate(std::move(samples));
    result.table = render_table(result.report);

    json report_json = report_to_json(result.report);
    report_json["meta"] = {{"seed", cfg.seed},
                           {"predictions", predictions_path.filename().string()},
                           {"missing_predictions", missing}};

    std::filesystem::create_directories(cfg.output_dir);
    result.report_path = cfg.output_dir / "eval_report.json";
    write_file(result.report_path, report_json.dump(2) + "\n");
    write_manifest(cfg, "evaluate", {result.report_path});
    return result;
}

JudgeRunResult run_judge(const RunConfig& cfg, const LoadedInputs& in,
                         const std::filesystem::path& predictions_path) {
    const auto predictions = load_predictions(predictions_path);

    JudgeConfig jcfg;
    jcfg.sample_size = cfg.judge_sample_size;
    jcfg.seed = cfg.seed;
    jcfg.max_retries = cfg.judge_max_retries;
    jcfg.budget = cfg.budget;
    jcfg.pool = cfg.judge_endpoint.pool;

    const auto backend = make_judge_backend(cfg.judge_endpoint);
    const JudgeAggregate agg = judge_run(predictions, in.corpus, jcfg, *backend);

    std::filesystem::create_directories(cfg.output_dir);
    JudgeRunResult result;
    result.aggregate = agg;
    result.verdicts_path = cfg.output_dir / "judge_verdicts.jsonl";
    result.aggregate_path = cfg.output_dir / "judge_aggregate.json";

    std::string blob;
    for (const JudgeSampleResult& r : agg.results) blob += judge_result_to_jsonl(r) + "\n";
    write_file(result.verdicts_path, blob);

    json agg_json = judge_aggregate_to_json(agg);
    agg_json["meta"] = {{"seed", cfg.seed}, {"predictions", predictions_path.filename().string()}};
    write_file(result.aggregate_path, agg_json.dump(2) + "\n");
    write_manifest(cfg, "judge", {result.verdicts_path, result.aggregate_path});
    return result;
}

void run_chat(const RunConfig& cfg, const LoadedInputs& in, std::istream& input,
              std::ostream& output) {
    const auto backend = make_backend(cfg.generation, in.lexicon.canonicals());

    DialogueState state;
    output << "meddial chat - type a patient message, 'exit' to quit\n";
    std::string line;
    while (true) {
        output << "患者> " << std::flush;
        if (!std::getline(input, line)) break;
        const std::string text = trim(line);
        if (text.empty()) continue;
        if (text == "exit" || text == "quit") break;

        Utterance patient;
        patient.role = Role::Patient;
        patient.text = text;
        patient.entities = annotate_entities(text, in.lexicon);

        DialogueState with_patient = advance(state, patient);
        const KnowledgeBundle bundle = mine(in.kg, with_patient.cumulative_entities, cfg.miner);

        output << "[知识] direct=" << bundle.direct.size()
               << " potential=" << bundle.potential.size() << "\n";
        for (const Triplet& t : bundle.direct) {
            output << "  " << t.head << " - " << t.relation << " - " << t.tail << "\n";
        }
        for (const PotentialTriplet& p : bundle.potential) {
            output << "  " << p.triplet.head << " - " << p.triplet.relation << " - "
                   << p.triplet.tail << " (via " << p.via << ")\n";
        }

        const PromptRecord prompt =
            build_prompt(state, bundle, encode_patient(patient), cfg.budget, cfg.prompt_template);

        GenerationRequest req;
        req.input_text = prompt.input_text;
        req.max_new_tokens = cfg.budget.max_output_tokens;
        req.temperature = cfg.generation.temperature;
        req.seed = cfg.seed;

        const StructuredResponse parsed = parse_structured(backend->generate(req), in.lexicon);
        output << "医生> " << parsed.response_text << "\n";

        Utterance doctor;
        doctor.role = Role::Doctor;
        doctor.text = parsed.response_text;
        for (const std::string& name : parsed.predicted_entities) {
            doctor.entities.push_back(
                EntityMention{name, in.lexicon.canonical_type(name).value_or(EntityType::Symptom),
                              std::nullopt});
        }
        doctor.actions = parsed.predicted_actions;

        state = advance(std::move(with_patient), doctor);
    }
    output << "bye\n";
}

int exit_code_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Io: return 3;
    case ErrorKind::Endpoint: return 4;
    case ErrorKind::Data:
    case ErrorKind::Budget:
    case ErrorKind::Usage: return 5;
    }
    return 1;
}

} // namespace meddial
