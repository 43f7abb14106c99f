// Regenerates the golden files under tests/data/golden/ from the fixtures.
// Run after an intentional format change, inspect the diff, and commit:
//   ./build/tests/regen_golden

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "meddial/judge.hpp"
#include "meddial/pipeline.hpp"
#include "meddial/prompt.hpp"

using namespace meddial;

namespace {

const std::filesystem::path kData = MEDDIAL_TEST_DATA_DIR;

void write(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    std::cout << "wrote " << path.string() << " (" << content.size() << " bytes)\n";
}

} // namespace

int main() {
    const auto fixtures = kData / "fixtures";
    const auto golden = kData / "golden";
    std::filesystem::create_directories(golden);

    const Lexicon lex = load_lexicon(fixtures / "lexicon.tsv");
    const KnowledgeGraph kg = load_kg(fixtures / "kg_medical.tsv");

    // trainset over the small corpus, default options
    {
        const auto corpus = load_corpus(fixtures / "corpus_small.jsonl", lex, true);
        std::ostringstream buf;
        EmitOptions opts;
        emit_trainset(corpus, kg, opts, buf);
        write(golden / "trainset.jsonl", buf.str());
    }

    // judge prompt over a two-turn history
    {
        Utterance p, d;
        p.role = Role::Patient;
        p.text = "我胃痛";
        d.role = Role::Doctor;
        d.text = "多久了?";
        const std::vector<Utterance> history = {p, d};
        write(golden / "judge_prompt.txt",
              build_judge_prompt(history, "建议注意饮食。", "注意饮食,按时复查。"));
    }

    // evaluation table over the 10-sample fixture
    {
        RunConfig cfg;
        cfg.lexicon_path = fixtures / "lexicon.tsv";
        cfg.corpus_path = fixtures / "corpus_eval10.jsonl";
        cfg.output_dir = std::filesystem::temp_directory_path() / "meddial-regen";
        const auto in = load_inputs(cfg, /*need_kg=*/false);
        const EvaluateResult res = run_evaluate(cfg, in, fixtures / "predictions10.jsonl");
        write(golden / "eval_table.txt", res.table);
    }

    return 0;
}
