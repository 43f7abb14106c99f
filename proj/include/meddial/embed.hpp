#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace meddial {

// Optional text-similarity hook backed by an external embedding endpoint.
// Reports cosine similarity of mean-pooled embeddings; this is NOT BertScore
// and is labeled "embedding_similarity" everywhere it surfaces.
class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::vector<std::vector<float>> embed(std::span<const std::string> texts) = 0;
};

// Deterministic hash-projection embeddings for tests and offline runs.
class MockEmbeddingBackend : public EmbeddingBackend {
public:
    explicit MockEmbeddingBackend(std::size_t dim = 32) : dim_(dim) {}
    std::vector<std::vector<float>> embed(std::span<const std::string> texts) override;

private:
    std::size_t dim_;
};

struct EmbeddingEndpointConfig {
    std::string base_url;
    std::string path = "/embeddings";
    std::string model;
    std::string api_key_env = "MEDDIAL_API_KEY";
    int timeout_s = 60;
};

class HttpEmbeddingBackend : public EmbeddingBackend {
public:
    explicit HttpEmbeddingBackend(EmbeddingEndpointConfig cfg);
    std::vector<std::vector<float>> embed(std::span<const std::string> texts) override;

private:
    EmbeddingEndpointConfig cfg_;
};

double cosine_similarity(std::span<const float> a, std::span<const float> b);

// Pairwise similarity of candidates[i] vs references[i].
std::vector<double> embedding_similarity(EmbeddingBackend& backend,
                                         std::span<const std::string> candidates,
                                         std::span<const std::string> references);

} // namespace meddial
