#pragma once

// Independent brute-force oracles. These deliberately avoid the library's
// data structures and code paths: full scans instead of adjacency indexes,
// occurrence-consumption matching instead of hash-map counting, memoized
// recursion instead of iterative DP. They exist to cross-check the
// implementations, so keep them dumb.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "meddial/kg.hpp"

namespace oracle {

using TokenSeq = std::vector<std::string>;

inline std::vector<TokenSeq> list_ngrams(const TokenSeq& tokens, std::size_t n) {
    std::vector<TokenSeq> grams;
    if (tokens.size() < n) return grams;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        grams.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                           tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    }
    return grams;
}

// Clipped matches by consuming reference occurrences one at a time.
inline std::size_t clipped(const TokenSeq& cand, const TokenSeq& ref, std::size_t n) {
    const auto cgrams = list_ngrams(cand, n);
    auto rgrams = list_ngrams(ref, n);
    std::vector<bool> used(rgrams.size(), false);
    std::size_t matches = 0;
    for (const TokenSeq& g : cgrams) {
        for (std::size_t j = 0; j < rgrams.size(); ++j) {
            if (!used[j] && rgrams[j] == g) {
                used[j] = true;
                ++matches;
                break;
            }
        }
    }
    return matches;
}

inline double bleu(const TokenSeq& cand, const TokenSeq& ref, int n) {
    if (cand.empty()) return 0.0;
    long double log_sum = 0.0L;
    for (int k = 1; k <= n; ++k) {
        const auto order = static_cast<std::size_t>(k);
        const std::size_t total = cand.size() >= order ? cand.size() - order + 1 : 0;
        const std::size_t matches = clipped(cand, ref, order);
        long double p;
        if (k == 1) {
            p = total > 0 ? static_cast<long double>(matches) / total : 0.0L;
            if (p <= 0.0L) return 0.0;
        } else {
            p = (static_cast<long double>(matches) + 1.0L) / (static_cast<long double>(total) + 1.0L);
        }
        log_sum += std::log(static_cast<double>(p));
    }
    const long double geo = std::exp(static_cast<double>(log_sum / n));
    const long double ratio =
        1.0L - static_cast<long double>(ref.size()) / static_cast<long double>(cand.size());
    const long double bp = ratio < 0.0L ? std::exp(static_cast<double>(ratio)) : 1.0L;
    return static_cast<double>(geo * bp);
}

inline double rouge_n(const TokenSeq& cand, const TokenSeq& ref, int n) {
    const auto order = static_cast<std::size_t>(n);
    if (cand.size() < order || ref.size() < order) return 0.0;
    const std::size_t matches = clipped(cand, ref, order);
    const double p = static_cast<double>(matches) / static_cast<double>(cand.size() - order + 1);
    const double r = static_cast<double>(matches) / static_cast<double>(ref.size() - order + 1);
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

inline std::size_t lcs_memo(const TokenSeq& a, const TokenSeq& b, std::size_t i, std::size_t j,
                            std::map<std::pair<std::size_t, std::size_t>, std::size_t>& memo) {
    if (i == a.size() || j == b.size()) return 0;
    const auto key = std::make_pair(i, j);
    const auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::size_t result;
    if (a[i] == b[j]) {
        result = 1 + lcs_memo(a, b, i + 1, j + 1, memo);
    } else {
        result = std::max(lcs_memo(a, b, i + 1, j, memo), lcs_memo(a, b, i, j + 1, memo));
    }
    memo.emplace(key, result);
    return result;
}

inline double rouge_l(const TokenSeq& cand, const TokenSeq& ref) {
    if (cand.empty() || ref.empty()) return 0.0;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    const auto lcs = static_cast<double>(lcs_memo(cand, ref, 0, 0, memo));
    const double p = lcs / static_cast<double>(cand.size());
    const double r = lcs / static_cast<double>(ref.size());
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

// ---- knowledge-graph oracles: full triplet scans only ----

inline std::set<std::string> dedup(const std::vector<std::string>& names) {
    return {names.begin(), names.end()};
}

inline std::vector<meddial::Triplet> direct(const meddial::KnowledgeGraph& g,
                                            const std::vector<std::string>& entities) {
    const auto ents = dedup(entities);
    std::vector<meddial::Triplet> out;
    if (ents.size() < 2) return out;
    for (const meddial::Triplet& t : g.triplets()) {
        if (t.head == t.tail) continue;
        if (ents.count(t.head) && ents.count(t.tail)) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::size_t freq(const meddial::KnowledgeGraph& g, const std::string& k,
                        const std::string& e) {
    std::size_t count = 0;
    for (const meddial::Triplet& t : g.triplets()) {
        const bool forward = t.head == k && t.tail == e;
        const bool backward = t.head == e && t.tail == k;
        if (forward || backward) ++count;
    }
    return count;
}

struct RankedNode {
    std::string name;
    std::size_t score;
};

inline std::vector<RankedNode> rank_potential(const meddial::KnowledgeGraph& g,
                                              const std::vector<std::string>& entities) {
    const auto ents = dedup(entities);

    // K_E: endpoints of triplets incident to any entity.
    std::set<std::string> reachable;
    for (const meddial::Triplet& t : g.triplets()) {
        if (ents.count(t.head) || ents.count(t.tail)) {
            reachable.insert(t.head);
            reachable.insert(t.tail);
        }
    }

    struct Row {
        std::string name;
        std::size_t score;
        std::size_t distinct;
    };
    std::vector<Row> rows;
    for (const std::string& k : reachable) {
        if (ents.count(k)) continue;
        std::size_t score = 0, distinct = 0;
        for (const std::string& e : ents) {
            const std::size_t f = freq(g, k, e);
            score += f;
            if (f > 0) ++distinct;
        }
        if (score == 0) continue;
        rows.push_back(Row{k, score, distinct});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.distinct != b.distinct) return a.distinct > b.distinct;
        return a.name < b.name;
    });
    std::vector<RankedNode> out;
    out.reserve(rows.size());
    for (const Row& r : rows) out.push_back(RankedNode{r.name, r.score});
    return out;
}

inline std::vector<meddial::Triplet> between(const meddial::KnowledgeGraph& g,
                                             const std::string& a, const std::string& b) {
    std::vector<meddial::Triplet> out;
    for (const meddial::Triplet& t : g.triplets()) {
        const bool forward = t.head == a && t.tail == b;
        const bool backward = t.head == b && t.tail == a;
        if (forward || backward) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<meddial::Triplet> neighborhood_triplets(
    const meddial::KnowledgeGraph& g, const std::vector<std::string>& seeds) {
    const auto seed_set = dedup(seeds);
    std::vector<meddial::Triplet> out;
    for (const meddial::Triplet& t : g.triplets()) {
        if (seed_set.count(t.head) || seed_set.count(t.tail)) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace oracle
