// Serial-vs-parallel benchmark over the two data-parallel pipeline stages:
// knowledge mining per doctor turn and metric scoring per sample. Also checks
// that both paths return identical bytes.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "meddial/metrics.hpp"
#include "meddial/miner.hpp"
#include "meddial/parallel.hpp"
#include "meddial/pathway.hpp"
#include "meddial/records.hpp"
#include "meddial/synth.hpp"

using namespace meddial;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct MineUnit {
    std::string dialogue_id;
    int turn;
    std::vector<std::string> entities;
};

} // namespace

int main(int argc, char** argv) {
    SynthConfig synth;
    synth.dialogues = 400;
    synth.triplets = 4000;
    synth.extra_nodes = 200;
    synth.max_exchanges = 6;
    if (argc > 1) synth.dialogues = static_cast<std::size_t>(std::stoul(argv[1]));

    const Lexicon lex = make_synthetic_lexicon(synth);
    const KnowledgeGraph kg = make_synthetic_graph(lex, synth);
    const auto corpus = make_synthetic_corpus(lex, synth);

    std::vector<MineUnit> units;
    for (const Dialogue& d : corpus) {
        for (const ResponsePoint& point : response_points(d)) {
            units.push_back(
                MineUnit{d.id, static_cast<int>(point.doctor_turn), point.entity_context});
        }
    }

    MinerConfig miner;
    auto mine_one = [&](const MineUnit& u) {
        MinedRecord rec;
        rec.dialogue_id = u.dialogue_id;
        rec.turn = u.turn;
        rec.bundle = mine(kg, u.entities, miner);
        return mined_to_jsonl(rec);
    };

    const int workers = hardware_workers();
    std::printf("corpus: %zu dialogues, %zu mining units, graph: %zu triplets, %d workers\n\n",
                corpus.size(), units.size(), kg.triplet_count(), workers);

    auto t0 = std::chrono::steady_clock::now();
    const auto mined_serial = map_indexed_serial(units, mine_one);
    const double mine_serial_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const auto mined_parallel = map_indexed_parallel(units, workers, mine_one);
    const double mine_parallel_s = seconds_since(t0);

    const bool mine_equal = mined_serial == mined_parallel;
    std::printf("mine      serial %.3fs  parallel %.3fs  speedup %.2fx  identical=%s\n",
                mine_serial_s, mine_parallel_s, mine_serial_s / mine_parallel_s,
                mine_equal ? "yes" : "NO");

    // Metric scoring: pair each doctor turn's text with a perturbed copy.
    struct ScoreUnit {
        std::string cand;
        std::string ref;
    };
    std::vector<ScoreUnit> pairs;
    for (const Dialogue& d : corpus) {
        for (const Utterance& u : d.turns) {
            if (u.role != Role::Doctor) continue;
            pairs.push_back(ScoreUnit{u.text + "另外建议复查。", u.text});
        }
    }
    auto score_one = [&](const ScoreUnit& p) {
        const auto cand = tokenize(p.cand);
        const auto ref = tokenize(p.ref);
        return bleu_n(cand, ref, 4) + rouge_n(cand, ref, 1) + rouge_n(cand, ref, 2) +
               rouge_l(cand, ref);
    };

    t0 = std::chrono::steady_clock::now();
    const auto scores_serial = map_indexed_serial(pairs, score_one);
    const double score_serial_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const auto scores_parallel = map_indexed_parallel(pairs, workers, score_one);
    const double score_parallel_s = seconds_since(t0);

    const bool score_equal = scores_serial == scores_parallel;
    std::printf("evaluate  serial %.3fs  parallel %.3fs  speedup %.2fx  identical=%s\n",
                score_serial_s, score_parallel_s, score_serial_s / score_parallel_s,
                score_equal ? "yes" : "NO");

    return (mine_equal && score_equal) ? 0 : 1;
}
