#include <doctest.h>

#include <cmath>
#include <random>

#include "meddial/error.hpp"
#include "meddial/metrics.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace meddial;

namespace {

std::vector<std::string> toks(std::initializer_list<const char*> list) {
    return {list.begin(), list.end()};
}

} // namespace

TEST_CASE("tokenize") {
    CHECK(tokenize("").empty());
    CHECK(tokenize("胃痛ok") == toks({"胃", "痛", "ok"}));
    CHECK(tokenize("a b") == toks({"a", "b"}));
    CHECK(tokenize("  spaced\tout\n") == toks({"spaced", "out"}));
    CHECK(tokenize("血压140/90了") == toks({"血", "压", "140/90", "了"}));
    CHECK(tokenize("你好,医生") == toks({"你", "好", ",", "医", "生"})); // fullwidth comma splits
    CHECK(tokenize("全角　空格") == toks({"全", "角", "空", "格"})); // ideographic space
}

TEST_CASE("bleu_n") {
    SUBCASE("identity scores 1 for every order") {
        const auto seq = toks({"胃", "痛", "三", "天"});
        for (int n = 1; n <= 4; ++n) {
            CHECK(bleu_n(seq, seq, n) == doctest::Approx(1.0).epsilon(1e-12));
        }
        const auto shorty = toks({"a"});
        CHECK(bleu_n(shorty, shorty, 4) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("hand-counted unigram precision") {
        CHECK(bleu_n(toks({"a", "b", "c"}), toks({"a", "b", "d"}), 1) ==
              doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    }
    SUBCASE("empty candidate scores zero") {
        CHECK(bleu_n({}, toks({"a"}), 4) == 0.0);
    }
    SUBCASE("brevity penalty applies to short candidates") {
        const double score = bleu_n(toks({"a"}), toks({"a", "b", "c", "d"}), 1);
        CHECK(score == doctest::Approx(std::exp(1.0 - 4.0)).epsilon(1e-9));
    }
    SUBCASE("clipping caps repeated candidate tokens") {
        // candidate repeats "a" three times, reference has it once: 1/3
        CHECK(bleu_n(toks({"a", "a", "a"}), toks({"a", "b", "c"}), 1) ==
              doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    }
}

TEST_CASE("rouge_n and rouge_l") {
    SUBCASE("identity scores 1") {
        const auto seq = toks({"胃", "痛", "难", "受"});
        CHECK(rouge_n(seq, seq, 1) == doctest::Approx(1.0));
        CHECK(rouge_n(seq, seq, 2) == doctest::Approx(1.0));
        CHECK(rouge_l(seq, seq) == doctest::Approx(1.0));
    }
    SUBCASE("hand-computed LCS case") {
        CHECK(rouge_l(toks({"a", "b", "c"}), toks({"a", "c"})) ==
              doctest::Approx(0.8).epsilon(1e-6));
    }
    SUBCASE("disjoint sequences score zero") {
        CHECK(rouge_n(toks({"a", "b"}), toks({"x", "y"}), 1) == 0.0);
        CHECK(rouge_n(toks({"a", "b"}), toks({"x", "y"}), 2) == 0.0);
        CHECK(rouge_l(toks({"a", "b"}), toks({"x", "y"})) == 0.0);
    }
    SUBCASE("empty reference scores zero") {
        CHECK(rouge_n(toks({"a"}), {}, 1) == 0.0);
        CHECK(rouge_l(toks({"a"}), {}) == 0.0);
    }
}

TEST_CASE("metrics match the brute-force oracle on random pairs") {
    std::mt19937_64 rng(61);
    for (int iter = 0; iter < 250; ++iter) {
        const auto cand = testutil::random_tokens(rng, 30);
        const auto ref = testutil::random_tokens(rng, 30);
        for (int n = 1; n <= 4; ++n) {
            CHECK(std::abs(bleu_n(cand, ref, n) - oracle::bleu(cand, ref, n)) <= 1e-9);
        }
        for (int n = 1; n <= 2; ++n) {
            CHECK(std::abs(rouge_n(cand, ref, n) - oracle::rouge_n(cand, ref, n)) <= 1e-9);
        }
        CHECK(std::abs(rouge_l(cand, ref) - oracle::rouge_l(cand, ref)) <= 1e-9);

        // all values stay in [0, 1]
        for (const double v : {bleu_n(cand, ref, 4), rouge_n(cand, ref, 1), rouge_l(cand, ref)}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("entity_prf") {
    SUBCASE("perfect prediction") {
        const std::vector<std::string> gold = {"a", "b"}, pred = {"b", "a"};
        const EntityScore s = entity_prf(gold, pred);
        CHECK(s.precision == 1.0);
        CHECK(s.recall == 1.0);
        CHECK(s.f1 == 1.0);
    }
    SUBCASE("hand-counted confusion") {
        const std::vector<std::string> gold = {"a", "b", "c"}, pred = {"a", "b", "d"};
        const EntityScore s = entity_prf(gold, pred);
        CHECK(s.precision == doctest::Approx(2.0 / 3.0));
        CHECK(s.recall == doctest::Approx(2.0 / 3.0));
        CHECK(s.f1 == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("empty prediction scores zero, not NaN") {
        const std::vector<std::string> gold = {"a"};
        const EntityScore s = entity_prf(gold, {});
        CHECK(s.precision == 0.0);
        CHECK(s.recall == 0.0);
        CHECK(s.f1 == 0.0);
    }
    SUBCASE("empty gold set is ineligible") {
        try {
            entity_prf({}, std::vector<std::string>{"a"});
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == "IneligibleSample");
        }
    }
    SUBCASE("duplicate names collapse before counting") {
        const std::vector<std::string> gold = {"a", "a", "b"}, pred = {"a", "a"};
        const EntityCounts c = entity_counts(gold, pred);
        CHECK(c.tp == 1);
        CHECK(c.fp == 0);
        CHECK(c.fn == 1);
    }
}

TEST_CASE("aggregate") {
    auto sample_with = [](double p, double r, std::size_t tp, std::size_t fp, std::size_t fn) {
        SampleScore s;
        s.entity.precision = p;
        s.entity.recall = r;
        s.entity.f1 = (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
        s.counts = {tp, fp, fn};
        return s;
    };

    SUBCASE("single sample: macro equals micro") {
        const auto report = aggregate({sample_with(1.0, 0.5, 1, 0, 1)});
        CHECK(report.aggregate.entity_macro.f1 ==
              doctest::Approx(report.aggregate.entity_micro.f1));
        CHECK(report.sample_count == 1);
    }
    SUBCASE("macro 0.5 vs micro 0.4 divergence") {
        // sample 1: gold {x}, pred {x}; sample 2: gold {a,b,c}, pred {}
        const auto report =
            aggregate({sample_with(1.0, 1.0, 1, 0, 0), sample_with(0.0, 0.0, 0, 0, 3)});
        CHECK(report.aggregate.entity_macro.f1 == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(report.aggregate.entity_micro.precision == doctest::Approx(1.0));
        CHECK(report.aggregate.entity_micro.recall == doctest::Approx(0.25));
        CHECK(report.aggregate.entity_micro.f1 == doctest::Approx(0.4).epsilon(1e-12));
    }
    SUBCASE("sample order does not change aggregates") {
        std::vector<SampleScore> samples = {sample_with(1.0, 1.0, 2, 0, 0),
                                            sample_with(0.5, 1.0, 1, 1, 0),
                                            sample_with(0.0, 0.0, 0, 2, 1)};
        const auto a = aggregate(samples);
        std::rotate(samples.begin(), samples.begin() + 1, samples.end());
        const auto b = aggregate(samples);
        CHECK(a.aggregate.entity_macro.f1 == doctest::Approx(b.aggregate.entity_macro.f1));
        CHECK(a.aggregate.entity_micro.f1 == doctest::Approx(b.aggregate.entity_micro.f1));
    }
    SUBCASE("identical confusion counts: micro equals macro") {
        const auto report =
            aggregate({sample_with(0.5, 0.5, 1, 1, 1), sample_with(0.5, 0.5, 1, 1, 1)});
        CHECK(report.aggregate.entity_macro.f1 ==
              doctest::Approx(report.aggregate.entity_micro.f1));
        CHECK(report.aggregate.entity_macro.precision ==
              doctest::Approx(report.aggregate.entity_micro.precision));
    }
    SUBCASE("empty sample list throws") {
        CHECK_THROWS_AS(aggregate({}), Error);
    }
}

TEST_CASE("score_sample ties text metrics and entity metrics together") {
    const std::vector<std::string> gold = {"胃痛"}, pred = {"胃痛"};
    const SampleScore s = score_sample("d", 1, "建议胃镜检查", "建议胃镜检查", gold, pred);
    CHECK(s.bleu1 == doctest::Approx(1.0));
    CHECK(s.rougeL == doctest::Approx(1.0));
    CHECK(s.entity.f1 == doctest::Approx(1.0));
    CHECK(s.counts.tp == 1);
}

TEST_CASE("render_table formats x100 at two decimals") {
    SampleScore s;
    s.dialogue_id = "d";
    s.turn = 1;
    s.bleu1 = 0.5733333;
    s.entity = {0.625, 0.65, 0.5733333};
    s.counts = {15, 6, 9};
    const auto report = aggregate({s});
    const std::string table = render_table(report);
    CHECK(table.find("BLEU-1        57.33") != std::string::npos);
    CHECK(table.find("macro-Pre     65.00") != std::string::npos);
    CHECK(table.find("samples       1") != std::string::npos);
}
