#include "meddial/embed.hpp"

#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "meddial/error.hpp"
#include "meddial/metrics.hpp"
#include "meddial/util.hpp"

namespace meddial {

using nlohmann::json;

std::vector<std::vector<float>> MockEmbeddingBackend::embed(std::span<const std::string> texts) {
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (const std::string& text : texts) {
        // Mean-pool per-token hash projections so shared tokens pull the
        // vectors together, mimicking semantic overlap.
        std::vector<float> vec(dim_, 0.0f);
        const auto tokens = tokenize(text);
        for (const std::string& tok : tokens) {
            uint64_t h = fnv1a64(tok);
            for (std::size_t d = 0; d < dim_; ++d) {
                h = h * 6364136223846793005ull + 1442695040888963407ull;
                vec[d] += static_cast<float>(static_cast<int64_t>(h >> 32) % 1000) / 1000.0f;
            }
        }
        if (!tokens.empty()) {
            for (float& v : vec) v /= static_cast<float>(tokens.size());
        }
        out.push_back(std::move(vec));
    }
    return out;
}

HttpEmbeddingBackend::HttpEmbeddingBackend(EmbeddingEndpointConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) {
        throw config_error("MissingBaseUrl", "embedding backend needs a base_url");
    }
}

std::vector<std::vector<float>> HttpEmbeddingBackend::embed(std::span<const std::string> texts) {
    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(cfg_.timeout_s, 0);
    client.set_read_timeout(cfg_.timeout_s, 0);
    httplib::Headers headers;
    const char* key = cfg_.api_key_env.empty() ? nullptr : std::getenv(cfg_.api_key_env.c_str());
    if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);

    json input = json::array();
    for (const std::string& t : texts) input.push_back(t);
    const json payload = {{"model", cfg_.model}, {"input", std::move(input)}};

    auto res = client.Post(cfg_.path, headers, payload.dump(), "application/json");
    if (!res || res->status != 200) {
        throw endpoint_error("Transport", "embedding endpoint failed: " +
                                              (res ? "status " + std::to_string(res->status)
                                                   : httplib::to_string(res.error())));
    }
    json parsed;
    try {
        parsed = json::parse(res->body);
    } catch (const json::parse_error&) {
        throw endpoint_error("Transport", "embedding endpoint returned unparseable JSON");
    }
    if (!parsed.contains("data") || !parsed["data"].is_array() ||
        parsed["data"].size() != texts.size()) {
        throw endpoint_error("Transport", "embedding endpoint returned wrong item count");
    }
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (const auto& item : parsed["data"]) {
        out.push_back(item.at("embedding").get<std::vector<float>>());
    }
    return out;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.empty() || b.empty() || a.size() != b.size()) return 0.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<double> embedding_similarity(EmbeddingBackend& backend,
                                         std::span<const std::string> candidates,
                                         std::span<const std::string> references) {
    if (candidates.size() != references.size()) {
        throw Error(ErrorKind::Usage, "SizeMismatch",
                    "similarity needs aligned candidate/reference lists");
    }
    std::vector<std::string> all(candidates.begin(), candidates.end());
    all.insert(all.end(), references.begin(), references.end());
    const auto vectors = backend.embed(all);

    std::vector<double> out(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        out[i] = cosine_similarity(vectors[i], vectors[candidates.size() + i]);
    }
    return out;
}

} // namespace meddial
