#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "meddial/kg.hpp"

namespace meddial {

struct MinerConfig {
    int top_n = 5;                          // potential co-related node budget
    std::size_t max_triplets_direct = 30;   // output cap, keeps prompts bounded
    std::size_t max_triplets_potential = 20;
};

struct ScoredNode {
    std::string name;
    uint64_t score = 0; // summed connection frequency over the entity set

    bool operator==(const ScoredNode&) const = default;
};

struct PotentialTriplet {
    Triplet triplet;
    std::string via; // the potential node this triplet was selected through

    bool operator==(const PotentialTriplet&) const = default;
};

struct KnowledgeBundle {
    std::vector<Triplet> direct;               // triplets among mentioned entities
    std::vector<PotentialTriplet> potential;   // entity <-> potential-node triplets
    std::vector<ScoredNode> potential_nodes;   // ranked potential co-related nodes
};

// Triplets whose head and tail are both (distinct) mentioned entities, sorted
// by (head, relation, tail). Uncapped; mine() applies the config cap.
std::vector<Triplet> mine_direct(const KnowledgeGraph& g, std::span<const std::string> entities);

// Distinct triplets connecting k and e in either direction.
uint64_t entity_pair_freq(const KnowledgeGraph& g, const std::string& k, const std::string& e);

// Every candidate node (1-hop neighborhood minus the entity set) ranked by
// summed frequency, ties broken by distinct connected entities then name.
std::vector<ScoredNode> rank_potential_nodes(const KnowledgeGraph& g,
                                             std::span<const std::string> entities);

// Top-N prefix of rank_potential_nodes.
std::vector<ScoredNode> mine_potential_nodes(const KnowledgeGraph& g,
                                             std::span<const std::string> entities,
                                             const MinerConfig& cfg);

// Neighborhood triplets joining a potential node to a mentioned entity,
// ordered by potential-node rank then triplet order. Uncapped.
std::vector<PotentialTriplet> mine_potential_triplets(const KnowledgeGraph& g,
                                                      std::span<const std::string> entities,
                                                      std::span<const ScoredNode> potential);

KnowledgeBundle mine(const KnowledgeGraph& g, std::span<const std::string> entities,
                     const MinerConfig& cfg);

} // namespace meddial
