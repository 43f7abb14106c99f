#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace meddial {

struct Triplet {
    std::string head;
    std::string relation;
    std::string tail;

    auto operator<=>(const Triplet&) const = default;
};

struct AdjEntry {
    uint32_t triplet = 0;
    bool outgoing = false; // node is the head
};

struct NeighborhoodView {
    std::vector<std::string> seeds;     // seeds present in the graph, sorted
    std::vector<std::string> nodes;     // endpoints of incident triplets, sorted
    std::vector<Triplet> triplets;      // incident triplets, sorted
    std::vector<std::string> relations; // distinct relation names, sorted
};

// Immutable after construction; safe for concurrent readers. Triplets are
// deduplicated and held sorted so identical content loads to identical graphs
// regardless of input row order.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;

    static KnowledgeGraph from_triplets(std::vector<Triplet> triplets);

    const std::vector<Triplet>& triplets() const { return triplets_; }
    const std::vector<std::string>& nodes() const { return nodes_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t triplet_count() const { return triplets_.size(); }

    bool has_node(const std::string& name) const;
    // Adjacency entries for a node: one outgoing entry per triplet headed by
    // it plus one incoming per triplet ending at it.
    std::span<const AdjEntry> adjacency(const std::string& name) const;

    std::vector<Triplet> triplets_between(const std::string& a, const std::string& b) const;
    NeighborhoodView neighborhood(std::span<const std::string> seed_entities) const;

    std::map<std::string, std::size_t> relation_histogram() const;

private:
    int node_id(const std::string& name) const;

    std::vector<Triplet> triplets_;           // sorted, unique
    std::vector<std::string> nodes_;          // sorted, unique
    std::unordered_map<std::string, int> node_index_;
    std::vector<std::vector<AdjEntry>> adjacency_; // per node id
};

// Node/relation names are whitespace-trimmed on load.
std::string normalize_node(std::string_view name);

// TSV: head<TAB>relation<TAB>tail. Duplicate rows collapse; empty fields and
// wrong column counts are errors.
KnowledgeGraph load_kg(const std::filesystem::path& path);
KnowledgeGraph parse_kg(std::string_view tsv, const std::string& origin = "<memory>");

} // namespace meddial
