#pragma once

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "meddial/kg.hpp"
#include "meddial/util.hpp"

namespace testutil {

inline std::filesystem::path data_dir() {
    return std::filesystem::path(MEDDIAL_TEST_DATA_DIR);
}

inline std::filesystem::path fixture(const std::string& name) {
    return data_dir() / "fixtures" / name;
}

inline std::filesystem::path golden(const std::string& name) {
    return data_dir() / "golden" / name;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    REQUIRE(out.good());
    out << content;
}

// Fresh directory under the build tree; unique per call.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("meddial-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                      std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

// Random token sequences over a small vocabulary; collisions are frequent by
// design so n-gram overlaps are non-trivial.
inline std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t max_len) {
    static const std::vector<std::string> vocab = {
        "胃", "痛", "反", "酸", "烧", "心", "腹", "泻", "药", "查",
        "a", "b", "c", "ok", "x9"};
    const std::size_t len = meddial::uniform_below(rng, max_len + 1);
    std::vector<std::string> out;
    out.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
        out.push_back(vocab[meddial::uniform_below(rng, vocab.size())]);
    }
    return out;
}

// Random directed graph over a compact node pool.
inline meddial::KnowledgeGraph random_graph(std::mt19937_64& rng, std::size_t max_triplets,
                                            std::vector<std::string>* node_pool_out = nullptr) {
    const std::size_t pool_size = 4 + meddial::uniform_below(rng, 56);
    std::vector<std::string> pool;
    pool.reserve(pool_size);
    for (std::size_t i = 0; i < pool_size; ++i) {
        pool.push_back("n" + std::to_string(i));
    }
    const std::size_t count = meddial::uniform_below(rng, max_triplets + 1);
    std::vector<meddial::Triplet> triplets;
    triplets.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        meddial::Triplet t;
        t.head = pool[meddial::uniform_below(rng, pool.size())];
        t.tail = pool[meddial::uniform_below(rng, pool.size())];
        t.relation = "r" + std::to_string(meddial::uniform_below(rng, 8));
        triplets.push_back(std::move(t));
    }
    if (node_pool_out) *node_pool_out = pool;
    return meddial::KnowledgeGraph::from_triplets(std::move(triplets));
}

// Entity sets drawn from the pool plus names absent from the graph.
inline std::vector<std::string> random_entities(std::mt19937_64& rng,
                                                const std::vector<std::string>& pool,
                                                std::size_t max_size) {
    const std::size_t count = meddial::uniform_below(rng, max_size + 1);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < count; ++i) {
        if (meddial::uniform_below(rng, 10) == 0) {
            out.push_back("zz-absent-" + std::to_string(meddial::uniform_below(rng, 3)));
        } else if (!pool.empty()) {
            out.push_back(pool[meddial::uniform_below(rng, pool.size())]);
        }
    }
    return out;
}

} // namespace testutil
