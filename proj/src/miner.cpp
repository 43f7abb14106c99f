#include "meddial/miner.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace meddial {

namespace {

std::unordered_set<std::string> entity_set(std::span<const std::string> entities) {
    return {entities.begin(), entities.end()};
}

} // namespace

std::vector<Triplet> mine_direct(const KnowledgeGraph& g, std::span<const std::string> entities) {
    const auto ents = entity_set(entities);
    std::vector<Triplet> out;
    if (ents.size() < 2) return out;

    std::set<uint32_t> ids;
    for (const std::string& e : entities) {
        for (const AdjEntry& adj : g.adjacency(e)) {
            if (!adj.outgoing) continue; // visit each triplet from its head only
            const Triplet& t = g.triplets()[adj.triplet];
            if (t.head == t.tail) continue; // pairs of distinct entities only
            if (ents.count(t.head) && ents.count(t.tail)) ids.insert(adj.triplet);
        }
    }
    out.reserve(ids.size());
    for (const uint32_t ti : ids) out.push_back(g.triplets()[ti]);
    std::sort(out.begin(), out.end());
    return out;
}

uint64_t entity_pair_freq(const KnowledgeGraph& g, const std::string& k, const std::string& e) {
    uint64_t freq = 0;
    std::unordered_set<uint32_t> counted;
    for (const AdjEntry& adj : g.adjacency(k)) {
        const Triplet& t = g.triplets()[adj.triplet];
        const std::string& other = adj.outgoing ? t.tail : t.head;
        if (other == e && counted.insert(adj.triplet).second) ++freq;
    }
    return freq;
}

std::vector<ScoredNode> rank_potential_nodes(const KnowledgeGraph& g,
                                             std::span<const std::string> entities) {
    const auto ents = entity_set(entities);

    struct Tally {
        uint64_t score = 0;
        std::unordered_set<std::string> connected;
    };
    std::unordered_map<std::string, Tally> tallies;

    // Each triplet incident to an entity e appears exactly once in e's
    // adjacency list, so walking entity adjacencies counts freq(k, e) per
    // distinct triplet. Triplets between two entities never produce a
    // candidate because the far endpoint is itself an entity.
    for (const std::string& e : ents) {
        for (const AdjEntry& adj : g.adjacency(e)) {
            const Triplet& t = g.triplets()[adj.triplet];
            const std::string& other = adj.outgoing ? t.tail : t.head;
            if (ents.count(other)) continue;
            Tally& tally = tallies[other];
            ++tally.score;
            tally.connected.insert(e);
        }
    }

    struct Ranked {
        std::string name;
        uint64_t score;
        std::size_t distinct;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(tallies.size());
    for (auto& [name, tally] : tallies) {
        if (tally.score == 0) continue;
        ranked.push_back(Ranked{name, tally.score, tally.connected.size()});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.distinct != b.distinct) return a.distinct > b.distinct;
        return a.name < b.name;
    });

    std::vector<ScoredNode> out;
    out.reserve(ranked.size());
    for (auto& r : ranked) out.push_back(ScoredNode{std::move(r.name), r.score});
    return out;
}

std::vector<ScoredNode> mine_potential_nodes(const KnowledgeGraph& g,
                                             std::span<const std::string> entities,
                                             const MinerConfig& cfg) {
    if (cfg.top_n <= 0) return {};
    auto ranked = rank_potential_nodes(g, entities);
    if (ranked.size() > static_cast<std::size_t>(cfg.top_n)) {
        ranked.resize(static_cast<std::size_t>(cfg.top_n));
    }
    return ranked;
}

std::vector<PotentialTriplet> mine_potential_triplets(const KnowledgeGraph& g,
                                                      std::span<const std::string> entities,
                                                      std::span<const ScoredNode> potential) {
    const auto ents = entity_set(entities);
    std::vector<PotentialTriplet> out;
    for (const ScoredNode& node : potential) {
        std::set<uint32_t> ids;
        for (const AdjEntry& adj : g.adjacency(node.name)) {
            const Triplet& t = g.triplets()[adj.triplet];
            const std::string& other = adj.outgoing ? t.tail : t.head;
            if (ents.count(other)) ids.insert(adj.triplet);
        }
        // set of triplet ids is already in (head, relation, tail) order
        // because the triplet store is sorted.
        for (const uint32_t ti : ids) out.push_back(PotentialTriplet{g.triplets()[ti], node.name});
    }
    return out;
}

KnowledgeBundle mine(const KnowledgeGraph& g, std::span<const std::string> entities,
                     const MinerConfig& cfg) {
    KnowledgeBundle bundle;
    bundle.direct = mine_direct(g, entities);
    if (bundle.direct.size() > cfg.max_triplets_direct) {
        bundle.direct.resize(cfg.max_triplets_direct);
    }
    bundle.potential_nodes = mine_potential_nodes(g, entities, cfg);
    bundle.potential = mine_potential_triplets(g, entities, bundle.potential_nodes);
    if (bundle.potential.size() > cfg.max_triplets_potential) {
        bundle.potential.resize(cfg.max_triplets_potential);
    }
    return bundle;
}

} // namespace meddial
