#include "meddial/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "meddial/error.hpp"
#include "meddial/prompt.hpp"
#include "meddial/unicode.hpp"
#include "meddial/util.hpp"

namespace meddial {

using nlohmann::json;

std::string generate(const GenerationRequest& req, GenerationBackend& backend) {
    return backend.generate(req);
}

MockBackend::MockBackend(uint64_t seed, std::vector<std::string> vocabulary)
    : seed_(seed), vocabulary_(std::move(vocabulary)) {}

std::string MockBackend::generate(const GenerationRequest& req) {
    const uint64_t h = fnv1a64(req.input_text) ^ ((seed_ ^ req.seed) * 0x9E3779B97F4A7C15ull);

    std::string entities;
    if (!vocabulary_.empty() && (h % 4) != 0) {
        const std::size_t first = static_cast<std::size_t>(h >> 8) % vocabulary_.size();
        entities = vocabulary_[first];
        if ((h % 4) == 2 && vocabulary_.size() > 1) {
            const std::size_t second =
                (first + 1 + static_cast<std::size_t>(h >> 16) % (vocabulary_.size() - 1)) %
                vocabulary_.size();
            entities += std::string(kItemSeparator) + vocabulary_[second];
        }
    } else {
        entities = kEmptySegmentPlaceholder;
    }

    const auto action = static_cast<PhysicianAction>(h % kPhysicianActionCount);
    std::string body = "根据您描述的情况,建议";
    if (entities != kEmptySegmentPlaceholder) {
        body += "关注" + entities + ",";
    }
    body += "必要时及时复诊。(" + fnv1a64_hex(req.input_text).substr(0, 8) + ")";

    return std::string(kTargetEntitiesMarker) + " " + entities + " " +
           std::string(kTargetActionsMarker) + " " + std::string(action_label(action)) + " " +
           std::string(kTargetResponseMarker) + " " + body;
}

std::string CassetteBackend::request_hash(std::string_view input_text) {
    return fnv1a64_hex(input_text);
}

CassetteBackend CassetteBackend::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("FileNotReadable", "cannot open cassette " + path.string());
    }
    CassetteBackend backend;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw data_error("InvalidJson",
                             path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!obj.contains("request_hash") || !obj.contains("response")) {
            throw data_error("MalformedCassette", path.string() + ":" + std::to_string(line_no) +
                                                      ": need request_hash and response");
        }
        backend.responses_[obj["request_hash"].get<std::string>()] =
            obj["response"].get<std::string>();
    }
    return backend;
}

std::string CassetteBackend::generate(const GenerationRequest& req) {
    const auto it = responses_.find(request_hash(req.input_text));
    if (it == responses_.end()) {
        throw endpoint_error("CassetteMiss",
                             "no recorded response for request hash " +
                                 request_hash(req.input_text));
    }
    return it->second;
}

CassetteRecorder::CassetteRecorder(std::shared_ptr<GenerationBackend> inner,
                                   std::filesystem::path path)
    : inner_(std::move(inner)), path_(std::move(path)) {}

std::string CassetteRecorder::generate(const GenerationRequest& req) {
    const std::string response = inner_->generate(req);
    std::lock_guard<std::mutex> lock(write_mutex_);
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) {
        throw io_error("FileNotWritable", "cannot append to cassette " + path_.string());
    }
    const json line = {{"request_hash", CassetteBackend::request_hash(req.input_text)},
                       {"response", response}};
    out << line.dump() << '\n';
    return response;
}

HttpBackend::HttpBackend(HttpEndpointConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) {
        throw config_error("MissingBaseUrl", "http backend needs a base_url");
    }
    sleeper = [](int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
}

std::string HttpBackend::generate(const GenerationRequest& req) {
    json messages = json::array();
    if (!cfg_.system_prompt.empty()) {
        messages.push_back({{"role", "system"}, {"content", cfg_.system_prompt}});
    }
    messages.push_back({{"role", "user"}, {"content", req.input_text}});
    const json payload = {{"model", cfg_.model},
                          {"messages", std::move(messages)},
                          {"temperature", req.temperature},
                          {"max_tokens", req.max_new_tokens}};
    const std::string body = payload.dump();

    const char* key = cfg_.api_key_env.empty() ? nullptr : std::getenv(cfg_.api_key_env.c_str());

    std::string last_error = "unknown";
    std::string last_code = "Transport";
    for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
        httplib::Client client(cfg_.base_url);
        client.set_connection_timeout(cfg_.timeout_s, 0);
        client.set_read_timeout(cfg_.timeout_s, 0);
        httplib::Headers headers;
        if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);

        auto res = client.Post(cfg_.path, headers, body, "application/json");
        if (!res) {
            last_code = res.error() == httplib::Error::ConnectionTimeout ||
                                res.error() == httplib::Error::Read
                            ? "Timeout"
                            : "Transport";
            last_error = httplib::to_string(res.error());
        } else if (res->status == 429) {
            last_code = "RateLimited";
            last_error = "status 429";
        } else if (res->status >= 500) {
            last_code = "Transport";
            last_error = "status " + std::to_string(res->status);
        } else if (res->status != 200) {
            throw endpoint_error("Transport", "endpoint returned status " +
                                                  std::to_string(res->status) + " after " +
                                                  std::to_string(attempt) + " attempt(s): " +
                                                  res->body.substr(0, 200));
        } else {
            json parsed;
            try {
                parsed = json::parse(res->body);
            } catch (const json::parse_error&) {
                throw endpoint_error("Transport", "endpoint returned unparseable JSON after " +
                                                      std::to_string(attempt) + " attempt(s)");
            }
            if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
                parsed["choices"].empty() || !parsed["choices"][0].contains("message") ||
                !parsed["choices"][0]["message"].contains("content")) {
                throw endpoint_error("Transport", "endpoint response lacks choices[0].message");
            }
            return parsed["choices"][0]["message"]["content"].get<std::string>();
        }

        if (attempt < cfg_.max_attempts) {
            sleeper(cfg_.retry_base_ms * (1 << (attempt - 1)));
        }
    }
    throw endpoint_error(last_code, "generation failed after " +
                                        std::to_string(cfg_.max_attempts) + " attempt(s): " +
                                        last_error);
}

namespace {

std::vector<std::string> parse_item_list(std::string_view segment) {
    std::vector<std::string> items;
    for (const std::string& raw : split_on(segment, kItemSeparator)) {
        std::string item = trim(raw);
        if (item.empty() || item == kEmptySegmentPlaceholder) continue;
        items.push_back(std::move(item));
    }
    return items;
}

} // namespace

StructuredResponse parse_structured(std::string_view raw, const Lexicon& lex) {
    StructuredResponse out;
    out.raw = std::string(raw);
    out.response_text = out.raw;

    const std::size_t ents_pos = raw.find(kTargetEntitiesMarker);
    if (ents_pos == std::string_view::npos) return out;
    const std::size_t acts_pos = raw.find(kTargetActionsMarker, ents_pos);
    if (acts_pos == std::string_view::npos) return out;
    const std::size_t resp_pos = raw.find(kTargetResponseMarker, acts_pos);
    if (resp_pos == std::string_view::npos) return out;

    const auto segment = [&](std::size_t from, std::size_t to) {
        return raw.substr(from, to - from);
    };
    const std::string_view ents_seg =
        segment(ents_pos + kTargetEntitiesMarker.size(), acts_pos);
    const std::string_view acts_seg = segment(acts_pos + kTargetActionsMarker.size(), resp_pos);
    std::string_view resp_seg = raw.substr(resp_pos + kTargetResponseMarker.size());
    if (!resp_seg.empty() && resp_seg.front() == ' ') resp_seg.remove_prefix(1);

    out.parse_mode = ParseMode::Strict;
    for (const std::string& name : parse_item_list(ents_seg)) {
        // Unknown strings stay visible in `raw` but never enter the canonical list.
        if (!lex.has_canonical(name)) continue;
        if (std::find(out.predicted_entities.begin(), out.predicted_entities.end(), name) ==
            out.predicted_entities.end()) {
            out.predicted_entities.push_back(name);
        }
    }
    for (const std::string& label : parse_item_list(acts_seg)) {
        const auto act = action_from(label);
        if (!act) continue;
        if (std::find(out.predicted_actions.begin(), out.predicted_actions.end(), *act) ==
            out.predicted_actions.end()) {
            out.predicted_actions.push_back(*act);
        }
    }
    out.response_text = std::string(resp_seg);
    return out;
}

std::string MockJudgeBackend::generate(const GenerationRequest& req) {
    const uint64_t h = fnv1a64(req.input_text) ^ (seed_ * 0x9E3779B97F4A7C15ull);
    const json verdict = {{"hallucination", static_cast<int>(h % 11)},
                          {"consistency", static_cast<int>((h >> 8) % 11)},
                          {"reasoning", "deterministic mock verdict " +
                                            fnv1a64_hex(req.input_text).substr(0, 8)}};
    return verdict.dump();
}

void RateLimiter::acquire() {
    if (limit_ <= 0) return;
    while (true) {
        std::chrono::milliseconds wait{0};
        {
            std::lock_guard<std::mutex> lock(mutex_);
            const auto now = std::chrono::steady_clock::now();
            while (!recent_.empty() && now - recent_.front() > std::chrono::minutes(1)) {
                recent_.pop_front();
            }
            if (recent_.size() < static_cast<std::size_t>(limit_)) {
                recent_.push_back(now);
                return;
            }
            wait = std::chrono::duration_cast<std::chrono::milliseconds>(
                recent_.front() + std::chrono::minutes(1) - now);
        }
        std::this_thread::sleep_for(std::max(wait, std::chrono::milliseconds(10)));
    }
}

void pooled_for(std::size_t count, int max_in_flight,
                const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    const int workers = std::max(1, std::min<int>(max_in_flight, static_cast<int>(count)));

    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error = nullptr;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error) return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();

    if (first_error) std::rethrow_exception(first_error);
}

std::vector<std::string> generate_batch(GenerationBackend& backend,
                                        std::span<const GenerationRequest> requests,
                                        const PoolConfig& pool) {
    std::vector<std::string> results(requests.size());
    RateLimiter limiter(pool.requests_per_minute);
    pooled_for(requests.size(), pool.max_in_flight, [&](std::size_t i) {
        limiter.acquire();
        results[i] = backend.generate(requests[i]);
    });
    return results;
}

} // namespace meddial
