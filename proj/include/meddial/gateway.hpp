#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "meddial/corpus.hpp"

namespace meddial {

struct GenerationRequest {
    std::string input_text;
    std::size_t max_new_tokens = 256;
    double temperature = 0.0; // greedy-equivalent by default
    uint64_t seed = 0;        // consumed by the mock backend only
};

class GenerationBackend {
public:
    virtual ~GenerationBackend() = default;
    virtual std::string generate(const GenerationRequest& req) = 0;
    virtual std::string name() const = 0;
};

std::string generate(const GenerationRequest& req, GenerationBackend& backend);

// Deterministic stand-in: output is a pure function of (input hash, seed).
// With a vocabulary it weaves canonical entity names into the reply so
// downstream entity metrics see non-trivial predictions.
class MockBackend : public GenerationBackend {
public:
    explicit MockBackend(uint64_t seed = 0, std::vector<std::string> vocabulary = {});
    std::string generate(const GenerationRequest& req) override;
    std::string name() const override { return "mock"; }

private:
    uint64_t seed_;
    std::vector<std::string> vocabulary_;
};

// Replays recorded responses keyed by the request-hash of the input text.
// Cassette format: JSONL of {"request_hash": str, "response": str}.
class CassetteBackend : public GenerationBackend {
public:
    static CassetteBackend load(const std::filesystem::path& path);
    std::string generate(const GenerationRequest& req) override;
    std::string name() const override { return "cassette"; }

    static std::string request_hash(std::string_view input_text);

private:
    std::unordered_map<std::string, std::string> responses_;
};

// Wraps another backend and appends every exchange to a cassette file.
class CassetteRecorder : public GenerationBackend {
public:
    CassetteRecorder(std::shared_ptr<GenerationBackend> inner, std::filesystem::path path);
    std::string generate(const GenerationRequest& req) override;
    std::string name() const override { return "record:" + inner_->name(); }

private:
    std::shared_ptr<GenerationBackend> inner_;
    std::filesystem::path path_;
    std::mutex write_mutex_;
};

struct HttpEndpointConfig {
    std::string base_url;                       // e.g. http://localhost:8000/v1
    std::string path = "/chat/completions";
    std::string model;
    std::string api_key_env = "MEDDIAL_API_KEY"; // key comes from the environment only
    std::string system_prompt;                   // optional leading system message
    int max_attempts = 3;
    int retry_base_ms = 500; // doubles per attempt
    int timeout_s = 60;
};

// OpenAI-compatible chat-completions client. Transient failures (connect
// errors, timeouts, 429, 5xx) retry with exponential backoff up to
// max_attempts; errors carry the attempt count.
class HttpBackend : public GenerationBackend {
public:
    explicit HttpBackend(HttpEndpointConfig cfg);
    std::string generate(const GenerationRequest& req) override;
    std::string name() const override { return "http:" + cfg_.model; }

    // Injectable for tests; defaults to std::this_thread::sleep_for.
    std::function<void(int /*ms*/)> sleeper;

private:
    HttpEndpointConfig cfg_;
};

enum class ParseMode { Strict, Fallback };

struct StructuredResponse {
    std::vector<std::string> predicted_entities; // lexicon canonicals only
    std::vector<PhysicianAction> predicted_actions;
    std::string response_text;
    std::string raw;
    ParseMode parse_mode = ParseMode::Fallback;
};

// Strict when the [ENTITIES]/[ACTIONS]/[RESPONSE] markers appear in order:
// the segments are split, entity names filtered to lexicon canonicals, and
// the placeholder maps to an empty list. Anything else falls back to the
// whole raw string as the response. Never throws.
StructuredResponse parse_structured(std::string_view raw, const Lexicon& lex);

// Deterministic judge-shaped mock: emits a strict-JSON verdict derived from
// the prompt hash. Used wherever the judge endpoint is configured as "mock".
class MockJudgeBackend : public GenerationBackend {
public:
    explicit MockJudgeBackend(uint64_t seed = 0) : seed_(seed) {}
    std::string generate(const GenerationRequest& req) override;
    std::string name() const override { return "mock-judge"; }

private:
    uint64_t seed_;
};

struct PoolConfig {
    int max_in_flight = 4;
    int requests_per_minute = 0; // 0 = unlimited
};

// Rolling sixty-second window limiter shared by a request pool.
class RateLimiter {
public:
    explicit RateLimiter(int per_minute) : limit_(per_minute) {}
    void acquire();

private:
    int limit_;
    std::mutex mutex_;
    std::deque<std::chrono::steady_clock::time_point> recent_;
};

// Runs fn(0..count-1) on up to max_in_flight threads. Results are indexed by
// input position, so callers see deterministic ordering.
void pooled_for(std::size_t count, int max_in_flight, const std::function<void(std::size_t)>& fn);

// Runs requests through a bounded worker pool; results come back in request
// order regardless of completion order.
std::vector<std::string> generate_batch(GenerationBackend& backend,
                                        std::span<const GenerationRequest> requests,
                                        const PoolConfig& pool);

} // namespace meddial
