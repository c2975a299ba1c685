#include <doctest.h>

#include "cpsg/gateway.hpp"
#include "cpsg/hashing.hpp"
#include "cpsg/scripted_backend.hpp"
#include "helpers.hpp"

using namespace cpsg;
using nlohmann::json;

namespace {

struct FakeTransport : Transport {
    int generate_calls = 0;
    int embed_calls = 0;
    int fail_first_n = 0;
    std::size_t dim = 4;

    GenerationResponse generate(const ModelRef&, const GenerationRequest& req) override {
        ++generate_calls;
        if (generate_calls <= fail_first_n) {
            throw BackendError(BackendError::Kind::timeout, "injected failure");
        }
        return {"echo: " + req.prompt, 1, 2, 0};
    }

    EmbeddingVector embed(const ModelRef&, const std::string& text) override {
        ++embed_calls;
        EmbeddingVector v;
        for (std::size_t i = 0; i < dim; ++i) v.values.push_back(0.1 * static_cast<double>(i + text.size()) + 0.1);
        return v;
    }
};

ModelRef gen_model() { return {"http://localhost:1", "testgen", ModelRole::generator}; }
ModelRef judge_model() { return {"http://localhost:1", "judge", ModelRole::judge}; }
ModelRef embed_model() { return {"http://localhost:1", "emb", ModelRole::embedder}; }

GenerationRequest simple_request(const std::string& prompt) {
    GenerationRequest req;
    req.prompt = prompt;
    return req;
}

}  // namespace

TEST_CASE("request hash is invariant under field reordering") {
    json a = canonical_generation_request(gen_model(), simple_request("hello"));
    // same content, fields inserted in a different order
    json b;
    b["temperature"] = 0.0;
    b["seed"] = 0;
    b["prompt"] = "hello";
    b["model"] = "testgen";
    b["system"] = "";
    b["max_tokens"] = 2048;
    b["context"] = json::array();
    b["kind"] = "generate";
    CHECK(hash_json(a) == hash_json(b));

    json c = canonical_generation_request(gen_model(), simple_request("other"));
    CHECK(hash_json(a) != hash_json(c));
}

TEST_CASE("role and input preconditions are checked before any network call") {
    auto fake = std::make_unique<FakeTransport>();
    FakeTransport* probe = fake.get();
    ModelGateway gateway(std::move(fake));

    CHECK_THROWS_AS(gateway.generate(embed_model(), simple_request("x")), ValidationError);
    CHECK_THROWS_AS(gateway.generate(gen_model(), simple_request("")), ValidationError);
    CHECK_THROWS_AS(gateway.embed_text(gen_model(), "x"), ValidationError);
    CHECK_THROWS_AS(gateway.embed_text(embed_model(), ""), ValidationError);
    CHECK(probe->generate_calls == 0);
    CHECK(probe->embed_calls == 0);
    CHECK(gateway.transport_calls() == 0);
}

TEST_CASE("record then replay returns recorded responses with zero transport traffic") {
    testutil::TempDir dir;
    auto cassette = dir.path / "cassette.jsonl";

    {
        ModelGateway recorder(std::make_unique<FakeTransport>());
        recorder.record_session(cassette);
        auto r1 = recorder.generate(gen_model(), simple_request("alpha"));
        auto r2 = recorder.generate(judge_model(), simple_request("beta"));
        auto v = recorder.embed_text(embed_model(), "gamma");
        CHECK(r1.text == "echo: alpha");
        CHECK(r2.text == "echo: beta");
        CHECK(v.dim() == 4);
    }

    auto fake = std::make_unique<FakeTransport>();
    FakeTransport* probe = fake.get();
    ModelGateway replayer(std::move(fake));
    replayer.replay_session(cassette);

    CHECK(replayer.generate(gen_model(), simple_request("alpha")).text == "echo: alpha");
    CHECK(replayer.generate(judge_model(), simple_request("beta")).text == "echo: beta");
    auto v = replayer.embed_text(embed_model(), "gamma");
    CHECK(v.dim() == 4);
    CHECK(probe->generate_calls == 0);
    CHECK(probe->embed_calls == 0);
    CHECK(replayer.transport_calls() == 0);
}

TEST_CASE("replay miss names the offending hash") {
    testutil::TempDir dir;
    auto cassette = dir.path / "cassette.jsonl";
    {
        ModelGateway recorder(std::make_unique<FakeTransport>());
        recorder.record_session(cassette);
        recorder.generate(gen_model(), simple_request("known"));
    }
    ModelGateway replayer(std::make_unique<FakeTransport>());
    replayer.replay_session(cassette);

    const std::string expected_hash =
        hash_json(canonical_generation_request(gen_model(), simple_request("unknown")));
    try {
        replayer.generate(gen_model(), simple_request("unknown"));
        FAIL("expected replay miss");
    } catch (const BackendError& e) {
        CHECK(e.kind == BackendError::Kind::replay_miss);
        CHECK(std::string(e.what()).find(expected_hash) != std::string::npos);
    }
}

TEST_CASE("same text embeds to an identical vector within one session") {
    auto fake = std::make_unique<FakeTransport>();
    FakeTransport* probe = fake.get();
    ModelGateway gateway(std::move(fake));
    auto a = gateway.embed_text(embed_model(), "same text");
    auto b = gateway.embed_text(embed_model(), "same text");
    CHECK(a.values == b.values);
    CHECK(probe->embed_calls == 1);
}

TEST_CASE("embedding dimension drift mid-run is an error") {
    auto fake = std::make_unique<FakeTransport>();
    FakeTransport* probe = fake.get();
    ModelGateway gateway(std::move(fake));
    gateway.embed_text(embed_model(), "first");
    probe->dim = 8;
    try {
        gateway.embed_text(embed_model(), "second");
        FAIL("expected dimension drift error");
    } catch (const BackendError& e) {
        CHECK(e.kind == BackendError::Kind::dimension_drift);
    }
}

TEST_CASE("a failing call is retried up to the budget, then surfaces the final error") {
    SUBCASE("recovers within budget") {
        auto fake = std::make_unique<FakeTransport>();
        fake->fail_first_n = 2;
        FakeTransport* probe = fake.get();
        ModelGateway gateway(std::move(fake), RetryPolicy{3, 0, 0});
        auto r = gateway.generate(gen_model(), simple_request("x"));
        CHECK(r.text == "echo: x");
        CHECK(probe->generate_calls == 3);
    }
    SUBCASE("exhausts budget") {
        auto fake = std::make_unique<FakeTransport>();
        fake->fail_first_n = 100;
        FakeTransport* probe = fake.get();
        ModelGateway gateway(std::move(fake), RetryPolicy{3, 0, 0});
        CHECK_THROWS_AS(gateway.generate(gen_model(), simple_request("x")), BackendError);
        CHECK(probe->generate_calls == 3);
    }
}

TEST_CASE("cassette with a 768-dim vector replays at dim 768") {
    testutil::TempDir dir;
    auto cassette = dir.path / "cassette.jsonl";
    {
        auto fake = std::make_unique<FakeTransport>();
        fake->dim = 768;
        ModelGateway recorder(std::move(fake));
        recorder.record_session(cassette);
        recorder.embed_text(embed_model(), "payload");
    }
    ModelGateway replayer(std::make_unique<FakeTransport>());
    replayer.replay_session(cassette);
    CHECK(replayer.embed_text(embed_model(), "payload").dim() == 768);
}

TEST_CASE("scripted transport is deterministic and covers all reply kinds") {
    auto t1 = make_scripted_transport();
    auto t2 = make_scripted_transport();
    for (const char* marker :
         {"one theme per line", "one statement per line", "one question per line",
          "single word, yes or no", "free-form scenario prompt"}) {
        auto a = t1->generate(gen_model(), simple_request(marker));
        auto b = t2->generate(gen_model(), simple_request(marker));
        CHECK(a.text == b.text);
        CHECK(!a.text.empty());
    }
    auto va = t1->embed(embed_model(), "abc");
    auto vb = t2->embed(embed_model(), "abc");
    CHECK(va.values == vb.values);
    CHECK(va.dim() == 32);
}
