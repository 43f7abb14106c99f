#include "meddial/kg.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "meddial/error.hpp"
#include "meddial/unicode.hpp"
#include "meddial/util.hpp"

namespace meddial {

std::string normalize_node(std::string_view name) {
    return trim(name);
}

KnowledgeGraph KnowledgeGraph::from_triplets(std::vector<Triplet> triplets) {
    std::sort(triplets.begin(), triplets.end());
    triplets.erase(std::unique(triplets.begin(), triplets.end()), triplets.end());

    KnowledgeGraph g;
    g.triplets_ = std::move(triplets);

    for (const Triplet& t : g.triplets_) {
        g.nodes_.push_back(t.head);
        g.nodes_.push_back(t.tail);
    }
    std::sort(g.nodes_.begin(), g.nodes_.end());
    g.nodes_.erase(std::unique(g.nodes_.begin(), g.nodes_.end()), g.nodes_.end());

    g.node_index_.reserve(g.nodes_.size());
    for (std::size_t i = 0; i < g.nodes_.size(); ++i) {
        g.node_index_.emplace(g.nodes_[i], static_cast<int>(i));
    }

    g.adjacency_.resize(g.nodes_.size());
    for (uint32_t ti = 0; ti < g.triplets_.size(); ++ti) {
        const Triplet& t = g.triplets_[ti];
        g.adjacency_[static_cast<std::size_t>(g.node_id(t.head))].push_back(AdjEntry{ti, true});
        g.adjacency_[static_cast<std::size_t>(g.node_id(t.tail))].push_back(AdjEntry{ti, false});
    }
    return g;
}

int KnowledgeGraph::node_id(const std::string& name) const {
    const auto it = node_index_.find(name);
    return it == node_index_.end() ? -1 : it->second;
}

bool KnowledgeGraph::has_node(const std::string& name) const {
    return node_id(name) >= 0;
}

std::span<const AdjEntry> KnowledgeGraph::adjacency(const std::string& name) const {
    const int id = node_id(name);
    if (id < 0) return {};
    return adjacency_[static_cast<std::size_t>(id)];
}

std::vector<Triplet> KnowledgeGraph::triplets_between(const std::string& a,
                                                      const std::string& b) const {
    std::vector<Triplet> out;
    for (const AdjEntry& e : adjacency(a)) {
        const Triplet& t = triplets_[e.triplet];
        const std::string& other = e.outgoing ? t.tail : t.head;
        if (other == b) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

NeighborhoodView KnowledgeGraph::neighborhood(std::span<const std::string> seed_entities) const {
    NeighborhoodView view;
    std::vector<uint32_t> triplet_ids;
    for (const std::string& seed : seed_entities) {
        if (!has_node(seed)) continue;
        view.seeds.push_back(seed);
        for (const AdjEntry& e : adjacency(seed)) triplet_ids.push_back(e.triplet);
    }
    std::sort(view.seeds.begin(), view.seeds.end());
    view.seeds.erase(std::unique(view.seeds.begin(), view.seeds.end()), view.seeds.end());

    std::sort(triplet_ids.begin(), triplet_ids.end());
    triplet_ids.erase(std::unique(triplet_ids.begin(), triplet_ids.end()), triplet_ids.end());

    for (const uint32_t ti : triplet_ids) {
        const Triplet& t = triplets_[ti];
        view.triplets.push_back(t);
        view.nodes.push_back(t.head);
        view.nodes.push_back(t.tail);
        view.relations.push_back(t.relation);
    }
    std::sort(view.nodes.begin(), view.nodes.end());
    view.nodes.erase(std::unique(view.nodes.begin(), view.nodes.end()), view.nodes.end());
    std::sort(view.relations.begin(), view.relations.end());
    view.relations.erase(std::unique(view.relations.begin(), view.relations.end()),
                         view.relations.end());
    return view;
}

std::map<std::string, std::size_t> KnowledgeGraph::relation_histogram() const {
    std::map<std::string, std::size_t> hist;
    for (const Triplet& t : triplets_) ++hist[t.relation];
    return hist;
}

KnowledgeGraph parse_kg(std::string_view tsv, const std::string& origin) {
    std::vector<Triplet> triplets;
    std::size_t line_no = 0;
    for (const std::string& raw : split(tsv, '\n')) {
        ++line_no;
        std::string line = raw;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto cols = split(line, '\t');
        if (cols.size() != 3) {
            throw data_error("MalformedRow", origin + ":" + std::to_string(line_no) +
                                                 ": expected 3 tab-separated columns, got " +
                                                 std::to_string(cols.size()));
        }
        Triplet t{normalize_node(cols[0]), normalize_node(cols[1]), normalize_node(cols[2])};
        if (t.head.empty() || t.relation.empty() || t.tail.empty()) {
            throw data_error("EmptyField",
                             origin + ":" + std::to_string(line_no) + ": empty field in triplet");
        }
        triplets.push_back(std::move(t));
    }
    return KnowledgeGraph::from_triplets(std::move(triplets));
}

KnowledgeGraph load_kg(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("FileNotReadable", "cannot open knowledge graph file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_kg(buf.str(), path.string());
}

} // namespace meddial
