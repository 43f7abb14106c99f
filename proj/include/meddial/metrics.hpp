#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace meddial {

// Character-level tokenization for mixed Chinese/Latin clinical text: every
// CJK codepoint is its own token, maximal runs of other non-space characters
// form one token, whitespace separates and is discarded.
std::vector<std::string> tokenize(std::string_view text);

// Sentence BLEU-n: clipped modified n-gram precision, geometric mean over
// orders 1..n with add-one smoothing on orders above 1, times the brevity
// penalty exp(min(0, 1 - |ref|/|cand|)). Empty candidate scores 0.
double bleu_n(std::span<const std::string> candidate, std::span<const std::string> reference,
              int n);

// ROUGE-n F1 from clipped n-gram overlap; empty reference scores 0.
double rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
               int n);

// ROUGE-L F1 (beta = 1) from the longest common subsequence.
double rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);

struct EntityScore {
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
};

struct EntityCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

EntityCounts entity_counts(std::span<const std::string> gold, std::span<const std::string> pred);

// Per-sample precision/recall/F1 over canonical entity sets. Gold must be
// non-empty (the eligibility filter guarantees it); throws IneligibleSample
// otherwise. An empty prediction scores (0, 0, 0).
EntityScore entity_prf(std::span<const std::string> gold, std::span<const std::string> pred);

struct SampleScore {
    std::string dialogue_id;
    int turn = -1;
    double bleu1 = 0, bleu2 = 0, bleu3 = 0, bleu4 = 0;
    double rouge1 = 0, rouge2 = 0, rougeL = 0;
    EntityScore entity;
    EntityCounts counts;
    double similarity = -1.0; // optional embedding-similarity hook; -1 = absent
};

SampleScore score_sample(std::string dialogue_id, int turn, std::string_view candidate_text,
                         std::string_view reference_text, std::span<const std::string> gold_entities,
                         std::span<const std::string> pred_entities);

struct EvalAggregate {
    double bleu1 = 0, bleu2 = 0, bleu3 = 0, bleu4 = 0;
    double rouge1 = 0, rouge2 = 0, rougeL = 0;
    EntityScore entity_macro; // unweighted mean of per-sample P/R/F1
    EntityScore entity_micro; // recomputed from pooled TP/FP/FN
    EntityCounts pooled;
    double similarity = -1.0;
    std::size_t similarity_count = 0;
};

struct EvalReport {
    std::vector<SampleScore> per_sample;
    EvalAggregate aggregate;
    std::size_t sample_count = 0;
};

// Macro entity scores average per-sample values (F1 averaged as-is, not
// rebuilt from mean P/R); micro recomputes from pooled counts. BLEU/ROUGE
// aggregate as unweighted means of sentence scores. Throws on empty input.
EvalReport aggregate(std::vector<SampleScore> samples);

// Fixed-width table with values scaled x100 at two decimals.
std::string render_table(const EvalReport& report);

nlohmann::json report_to_json(const EvalReport& report);

} // namespace meddial
