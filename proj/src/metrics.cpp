#include "meddial/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "meddial/error.hpp"
#include "meddial/unicode.hpp"

namespace meddial {

using nlohmann::json;

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string run;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t len = 0;
        const char32_t cp = utf8_decode(text, pos, len);
        if (is_space_cp(cp)) {
            if (!run.empty()) tokens.push_back(std::move(run)), run.clear();
        } else if (is_cjk(cp)) {
            if (!run.empty()) tokens.push_back(std::move(run)), run.clear();
            tokens.emplace_back(text.substr(pos, len));
        } else {
            run.append(text.substr(pos, len));
        }
        pos += len;
    }
    if (!run.empty()) tokens.push_back(std::move(run));
    return tokens;
}

namespace {

// n-grams keyed by their tokens joined on an unprintable separator.
std::unordered_map<std::string, std::size_t> ngram_counts(std::span<const std::string> tokens,
                                                          std::size_t n) {
    std::unordered_map<std::string, std::size_t> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key;
        for (std::size_t j = 0; j < n; ++j) {
            if (j) key.push_back('\x1f');
            key += tokens[i + j];
        }
        ++counts[key];
    }
    return counts;
}

std::size_t clipped_matches(std::span<const std::string> candidate,
                            std::span<const std::string> reference, std::size_t n) {
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    std::size_t matches = 0;
    for (const auto& [gram, count] : cand) {
        const auto it = ref.find(gram);
        if (it != ref.end()) matches += std::min(count, it->second);
    }
    return matches;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), curr(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1]) {
                curr[j] = prev[j - 1] + 1;
            } else {
                curr[j] = std::max(prev[j], curr[j - 1]);
            }
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

double f1_of(double precision, double recall) {
    const double denom = precision + recall;
    return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

} // namespace

double bleu_n(std::span<const std::string> candidate, std::span<const std::string> reference,
              int n) {
    if (n < 1) {
        throw Error(ErrorKind::Usage, "BadOrder", "BLEU order must be at least 1");
    }
    if (candidate.empty()) return 0.0;

    double log_sum = 0.0;
    for (int k = 1; k <= n; ++k) {
        const std::size_t order = static_cast<std::size_t>(k);
        const std::size_t total = candidate.size() >= order ? candidate.size() - order + 1 : 0;
        const std::size_t matches = clipped_matches(candidate, reference, order);
        double precision;
        if (k == 1) {
            precision = total > 0 ? static_cast<double>(matches) / static_cast<double>(total) : 0.0;
            if (precision <= 0.0) return 0.0;
        } else {
            precision = (static_cast<double>(matches) + 1.0) / (static_cast<double>(total) + 1.0);
        }
        log_sum += std::log(precision);
    }
    const double geo_mean = std::exp(log_sum / n);

    const double ref_len = static_cast<double>(reference.size());
    const double cand_len = static_cast<double>(candidate.size());
    const double brevity = std::exp(std::min(0.0, 1.0 - ref_len / cand_len));
    return geo_mean * brevity;
}

double rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
               int n) {
    if (n < 1) {
        throw Error(ErrorKind::Usage, "BadOrder", "ROUGE order must be at least 1");
    }
    const std::size_t order = static_cast<std::size_t>(n);
    if (reference.size() < order || candidate.size() < order) return 0.0;
    const std::size_t matches = clipped_matches(candidate, reference, order);
    const double precision =
        static_cast<double>(matches) / static_cast<double>(candidate.size() - order + 1);
    const double recall =
        static_cast<double>(matches) / static_cast<double>(reference.size() - order + 1);
    return f1_of(precision, recall);
}

double rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
    if (candidate.empty() || reference.empty()) return 0.0;
    const auto lcs = static_cast<double>(lcs_length(candidate, reference));
    const double precision = lcs / static_cast<double>(candidate.size());
    const double recall = lcs / static_cast<double>(reference.size());
    return f1_of(precision, recall);
}

EntityCounts entity_counts(std::span<const std::string> gold, std::span<const std::string> pred) {
    const std::unordered_set<std::string> gold_set(gold.begin(), gold.end());
    const std::unordered_set<std::string> pred_set(pred.begin(), pred.end());
    EntityCounts counts;
    for (const std::string& p : pred_set) {
        if (gold_set.count(p)) ++counts.tp;
        else ++counts.fp;
    }
    counts.fn = gold_set.size() - counts.tp;
    return counts;
}

EntityScore entity_prf(std::span<const std::string> gold, std::span<const std::string> pred) {
    if (gold.empty()) {
        throw Error(ErrorKind::Usage, "IneligibleSample",
                    "entity scoring requires a non-empty gold entity set");
    }
    const EntityCounts c = entity_counts(gold, pred);
    EntityScore score;
    const std::size_t pred_total = c.tp + c.fp;
    score.precision = pred_total > 0 ? static_cast<double>(c.tp) / static_cast<double>(pred_total) : 0.0;
    score.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    score.f1 = f1_of(score.precision, score.recall);
    return score;
}

SampleScore score_sample(std::string dialogue_id, int turn, std::string_view candidate_text,
                         std::string_view reference_text, std::span<const std::string> gold_entities,
                         std::span<const std::string> pred_entities) {
    const auto cand = tokenize(candidate_text);
    const auto ref = tokenize(reference_text);

    SampleScore s;
    s.dialogue_id = std::move(dialogue_id);
    s.turn = turn;
    s.bleu1 = bleu_n(cand, ref, 1);
    s.bleu2 = bleu_n(cand, ref, 2);
    s.bleu3 = bleu_n(cand, ref, 3);
    s.bleu4 = bleu_n(cand, ref, 4);
    s.rouge1 = rouge_n(cand, ref, 1);
    s.rouge2 = rouge_n(cand, ref, 2);
    s.rougeL = rouge_l(cand, ref);
    s.entity = entity_prf(gold_entities, pred_entities);
    s.counts = entity_counts(gold_entities, pred_entities);
    return s;
}

EvalReport aggregate(std::vector<SampleScore> samples) {
    if (samples.empty()) {
        throw Error(ErrorKind::Usage, "EmptySampleSet", "cannot aggregate zero samples");
    }
    EvalReport report;
    report.sample_count = samples.size();
    EvalAggregate& agg = report.aggregate;

    const double n = static_cast<double>(samples.size());
    for (const SampleScore& s : samples) {
        agg.bleu1 += s.bleu1;
        agg.bleu2 += s.bleu2;
        agg.bleu3 += s.bleu3;
        agg.bleu4 += s.bleu4;
        agg.rouge1 += s.rouge1;
        agg.rouge2 += s.rouge2;
        agg.rougeL += s.rougeL;
        agg.entity_macro.precision += s.entity.precision;
        agg.entity_macro.recall += s.entity.recall;
        agg.entity_macro.f1 += s.entity.f1;
        agg.pooled.tp += s.counts.tp;
        agg.pooled.fp += s.counts.fp;
        agg.pooled.fn += s.counts.fn;
        if (s.similarity >= 0.0) {
            agg.similarity = (agg.similarity < 0.0 ? 0.0 : agg.similarity) + s.similarity;
            ++agg.similarity_count;
        }
    }
    agg.bleu1 /= n;
    agg.bleu2 /= n;
    agg.bleu3 /= n;
    agg.bleu4 /= n;
    agg.rouge1 /= n;
    agg.rouge2 /= n;
    agg.rougeL /= n;
    agg.entity_macro.precision /= n;
    agg.entity_macro.recall /= n;
    agg.entity_macro.f1 /= n;

    const std::size_t pred_total = agg.pooled.tp + agg.pooled.fp;
    const std::size_t gold_total = agg.pooled.tp + agg.pooled.fn;
    agg.entity_micro.precision =
        pred_total > 0 ? static_cast<double>(agg.pooled.tp) / static_cast<double>(pred_total) : 0.0;
    agg.entity_micro.recall =
        gold_total > 0 ? static_cast<double>(agg.pooled.tp) / static_cast<double>(gold_total) : 0.0;
    agg.entity_micro.f1 = f1_of(agg.entity_micro.precision, agg.entity_micro.recall);

    if (agg.similarity_count > 0) {
        agg.similarity /= static_cast<double>(agg.similarity_count);
    }

    report.per_sample = std::move(samples);
    return report;
}

namespace {

std::string pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

} // namespace

std::string render_table(const EvalReport& report) {
    const EvalAggregate& a = report.aggregate;
    std::string out;
    auto row = [&](std::string_view name, const std::string& value) {
        out += name;
        out.append(name.size() < 14 ? 14 - name.size() : 1, ' ');
        out += value;
        out += '\n';
    };
    out += "metric        value\n";
    out += "------------  -----\n";
    row("BLEU-1", pct(a.bleu1));
    row("BLEU-2", pct(a.bleu2));
    row("BLEU-3", pct(a.bleu3));
    row("BLEU-4", pct(a.bleu4));
    row("ROUGE-1", pct(a.rouge1));
    row("ROUGE-2", pct(a.rouge2));
    row("ROUGE-L", pct(a.rougeL));
    row("macro-Rec", pct(a.entity_macro.recall));
    row("macro-Pre", pct(a.entity_macro.precision));
    row("macro-F1", pct(a.entity_macro.f1));
    row("micro-Rec", pct(a.entity_micro.recall));
    row("micro-Pre", pct(a.entity_micro.precision));
    row("micro-F1", pct(a.entity_micro.f1));
    if (a.similarity_count > 0) {
        row("similarity", pct(a.similarity));
    }
    row("samples", std::to_string(report.sample_count));
    return out;
}

json report_to_json(const EvalReport& report) {
    const EvalAggregate& a = report.aggregate;
    json aggregate = {
        {"bleu1", a.bleu1},
        {"bleu2", a.bleu2},
        {"bleu3", a.bleu3},
        {"bleu4", a.bleu4},
        {"rouge1", a.rouge1},
        {"rouge2", a.rouge2},
        {"rougeL", a.rougeL},
        {"entity_macro",
         {{"recall", a.entity_macro.recall},
          {"precision", a.entity_macro.precision},
          {"f1", a.entity_macro.f1}}},
        {"entity_micro",
         {{"recall", a.entity_micro.recall},
          {"precision", a.entity_micro.precision},
          {"f1", a.entity_micro.f1}}},
        {"pooled", {{"tp", a.pooled.tp}, {"fp", a.pooled.fp}, {"fn", a.pooled.fn}}},
    };
    if (a.similarity_count > 0) {
        aggregate["embedding_similarity"] = a.similarity;
        aggregate["embedding_similarity_count"] = a.similarity_count;
    }

    json per_sample = json::array();
    for (const SampleScore& s : report.per_sample) {
        json item = {
            {"dialogue_id", s.dialogue_id},
            {"turn", s.turn},
            {"bleu1", s.bleu1},
            {"bleu2", s.bleu2},
            {"bleu3", s.bleu3},
            {"bleu4", s.bleu4},
            {"rouge1", s.rouge1},
            {"rouge2", s.rouge2},
            {"rougeL", s.rougeL},
            {"recall", s.entity.recall},
            {"precision", s.entity.precision},
            {"f1", s.entity.f1},
            {"tp", s.counts.tp},
            {"fp", s.counts.fp},
            {"fn", s.counts.fn},
        };
        if (s.similarity >= 0.0) item["embedding_similarity"] = s.similarity;
        per_sample.push_back(std::move(item));
    }

    return json{{"sample_count", report.sample_count},
                {"aggregate", std::move(aggregate)},
                {"per_sample", std::move(per_sample)}};
}

} // namespace meddial
