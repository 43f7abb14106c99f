#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "meddial/error.hpp"
#include "meddial/gateway.hpp"
#include "testutil.hpp"

using namespace meddial;

TEST_CASE("mock backend is a pure function of input and seed") {
    MockBackend a(7), b(7), c(8);
    GenerationRequest req;
    req.input_text = "同一个输入";
    CHECK(a.generate(req) == b.generate(req));
    CHECK(a.generate(req) == a.generate(req));
    CHECK(a.generate(req) != c.generate(req));

    GenerationRequest other;
    other.input_text = "另一个输入";
    CHECK(a.generate(req) != a.generate(other));

    GenerationRequest reseeded = req;
    reseeded.seed = 99;
    CHECK(a.generate(req) != a.generate(reseeded));
}

TEST_CASE("mock backend output parses strictly") {
    const Lexicon lex = load_lexicon(testutil::fixture("lexicon.tsv"));
    MockBackend backend(3, lex.canonicals());
    GenerationRequest req;
    req.input_text = "任意提示词";
    const StructuredResponse parsed = parse_structured(backend.generate(req), lex);
    CHECK(parsed.parse_mode == ParseMode::Strict);
    CHECK_FALSE(parsed.response_text.empty());
}

TEST_CASE("parse_structured") {
    const Lexicon lex = load_lexicon(testutil::fixture("lexicon.tsv"));

    SUBCASE("strict template with placeholder entities") {
        const StructuredResponse r =
            parse_structured("[ENTITIES] 无 [ACTIONS] 问诊 [RESPONSE] 请问疼多久了?", lex);
        CHECK(r.parse_mode == ParseMode::Strict);
        CHECK(r.predicted_entities.empty());
        CHECK(r.predicted_actions == std::vector<PhysicianAction>{PhysicianAction::Inquire});
        CHECK(r.response_text == "请问疼多久了?");
    }
    SUBCASE("no markers falls back to raw") {
        const StructuredResponse r = parse_structured("直接的自由文本回复", lex);
        CHECK(r.parse_mode == ParseMode::Fallback);
        CHECK(r.predicted_entities.empty());
        CHECK(r.predicted_actions.empty());
        CHECK(r.response_text == "直接的自由文本回复");
        CHECK(r.raw == r.response_text);
    }
    SUBCASE("markers out of order fall back") {
        const StructuredResponse r =
            parse_structured("[ACTIONS] 问诊 [ENTITIES] 无 [RESPONSE] x", lex);
        CHECK(r.parse_mode == ParseMode::Fallback);
        CHECK(r.response_text == "[ACTIONS] 问诊 [ENTITIES] 无 [RESPONSE] x");
    }
    SUBCASE("unknown entity strings are dropped from the canonical list") {
        const StructuredResponse r = parse_structured(
            "[ENTITIES] 胃痛、量子纠缠、反酸 [ACTIONS] 无 [RESPONSE] ok", lex);
        CHECK(r.predicted_entities == std::vector<std::string>{"胃痛", "反酸"});
        CHECK(r.raw.find("量子纠缠") != std::string::npos); // preserved in raw only
    }
    SUBCASE("duplicates collapse, unknown actions are dropped") {
        const StructuredResponse r = parse_structured(
            "[ENTITIES] 胃痛、胃痛 [ACTIONS] 问诊、跳舞、问诊 [RESPONSE] ok", lex);
        CHECK(r.predicted_entities == std::vector<std::string>{"胃痛"});
        CHECK(r.predicted_actions == std::vector<PhysicianAction>{PhysicianAction::Inquire});
    }
    SUBCASE("response keeps its exact bytes, including trailing space") {
        const StructuredResponse r =
            parse_structured("[ENTITIES] 无 [ACTIONS] 无 [RESPONSE]  带空格 ", lex);
        CHECK(r.response_text == " 带空格 "); // one template space stripped
    }
}

TEST_CASE("cassette backend") {
    const auto dir = testutil::temp_dir("cassette");

    SUBCASE("replays recorded responses byte-exact") {
        const std::string input = "提示词A";
        const nlohmann::json line = {{"request_hash", CassetteBackend::request_hash(input)},
                                     {"response", "录制的回复"}};
        testutil::write_file(dir / "tape.jsonl", line.dump() + "\n");

        CassetteBackend backend = CassetteBackend::load(dir / "tape.jsonl");
        GenerationRequest req;
        req.input_text = input;
        CHECK(backend.generate(req) == "录制的回复");
    }
    SUBCASE("missing entry is an endpoint error") {
        testutil::write_file(dir / "empty.jsonl", "");
        CassetteBackend backend = CassetteBackend::load(dir / "empty.jsonl");
        GenerationRequest req;
        req.input_text = "未录制";
        try {
            backend.generate(req);
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == "CassetteMiss");
        }
    }
    SUBCASE("recorder output replays through a cassette") {
        auto inner = std::make_shared<MockBackend>(5);
        CassetteRecorder recorder(inner, dir / "rec.jsonl");
        GenerationRequest req;
        req.input_text = "要录制的请求";
        const std::string live = recorder.generate(req);

        CassetteBackend replay = CassetteBackend::load(dir / "rec.jsonl");
        CHECK(replay.generate(req) == live);
    }
}

TEST_CASE("http backend against a local server") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        const auto body = nlohmann::json::parse(req.body);
        const std::string content = body["messages"].back()["content"].get<std::string>();
        const nlohmann::json reply = {
            {"choices",
             {{{"message", {{"role", "assistant"}, {"content", "echo:" + content}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });
    server.Post("/flaky/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        if (++hits < 3) {
            res.status = 503;
            return;
        }
        const nlohmann::json reply = {
            {"choices", {{{"message", {{"role", "assistant"}, {"content", "recovered"}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });
    server.Post("/limited/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        res.status = 429;
    });

    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    SUBCASE("success path extracts the message content") {
        HttpEndpointConfig cfg;
        cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
        cfg.path = "/v1/chat/completions";
        cfg.model = "test-model";
        HttpBackend backend(cfg);
        GenerationRequest req;
        req.input_text = "你好";
        CHECK(backend.generate(req) == "echo:你好");
    }
    SUBCASE("5xx retries until recovery") {
        hits = 0;
        HttpEndpointConfig cfg;
        cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
        cfg.path = "/flaky/chat/completions";
        cfg.max_attempts = 5;
        cfg.retry_base_ms = 1;
        HttpBackend backend(cfg);
        GenerationRequest req;
        req.input_text = "x";
        CHECK(backend.generate(req) == "recovered");
        CHECK(hits == 3);
    }
    SUBCASE("429 exhausts attempts as RateLimited") {
        HttpEndpointConfig cfg;
        cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
        cfg.path = "/limited/chat/completions";
        cfg.max_attempts = 2;
        cfg.retry_base_ms = 1;
        HttpBackend backend(cfg);
        GenerationRequest req;
        req.input_text = "x";
        try {
            backend.generate(req);
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == "RateLimited");
            CHECK(std::string(e.what()).find("2 attempt") != std::string::npos);
        }
    }

    server.stop();
    server_thread.join();
}

TEST_CASE("down endpoint fails with Transport after N attempts") {
    HttpEndpointConfig cfg;
    cfg.base_url = "http://127.0.0.1:9"; // discard port, nothing listens
    cfg.max_attempts = 3;
    cfg.retry_base_ms = 1;
    cfg.timeout_s = 1;
    HttpBackend backend(cfg);
    GenerationRequest req;
    req.input_text = "x";
    try {
        backend.generate(req);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Endpoint);
        CHECK(std::string(e.what()).find("3 attempt") != std::string::npos);
    }
}

TEST_CASE("generate_batch keeps request order under concurrency") {
    MockBackend backend(11);
    std::vector<GenerationRequest> requests(40);
    for (std::size_t i = 0; i < requests.size(); ++i) {
        requests[i].input_text = "请求-" + std::to_string(i);
    }
    PoolConfig serial{1, 0};
    PoolConfig pooled{8, 0};
    const auto want = generate_batch(backend, requests, serial);
    const auto got = generate_batch(backend, requests, pooled);
    CHECK(got == want);
}

TEST_CASE("mock judge backend emits strict verdicts deterministically") {
    MockJudgeBackend judge(2);
    GenerationRequest req;
    req.input_text = "judge prompt";
    const std::string a = judge.generate(req);
    CHECK(a == judge.generate(req));
    const auto obj = nlohmann::json::parse(a);
    const int h = obj["hallucination"].get<int>();
    const int c = obj["consistency"].get<int>();
    CHECK(h >= 0);
    CHECK(h <= 10);
    CHECK(c >= 0);
    CHECK(c <= 10);
}
