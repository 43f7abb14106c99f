#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meddial/corpus.hpp"
#include "meddial/kg.hpp"

namespace meddial {

// Deterministic synthetic fixtures for tests, demos, and the benchmark.
// Everything is a pure function of the seed (mt19937_64 streams only).

struct SynthConfig {
    std::size_t entities = 24;       // lexicon canonicals, spread over all types
    std::size_t extra_nodes = 16;    // graph nodes outside the lexicon
    std::size_t triplets = 120;
    std::size_t dialogues = 50;
    std::size_t max_exchanges = 4;   // patient/doctor pairs per dialogue
    uint64_t seed = 7;
};

Lexicon make_synthetic_lexicon(const SynthConfig& cfg);
KnowledgeGraph make_synthetic_graph(const Lexicon& lex, const SynthConfig& cfg);
std::vector<Dialogue> make_synthetic_corpus(const Lexicon& lex, const SynthConfig& cfg);

} // namespace meddial
