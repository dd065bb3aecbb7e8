#include <doctest.h>

#include <set>
#include <thread>

#include "llm4vis/error.hpp"
#include "llm4vis/llm.hpp"
#include "support.hpp"

using namespace llm4vis;
using namespace llm4vis::llm;

namespace {

ChatRequest request(const std::string& prompt) { return ChatRequest::from_prompt(prompt, ModelSettings{}); }

/// Fails with the given errors in order, then answers "ok".
class FlakyProvider : public Provider {
public:
    explicit FlakyProvider(std::vector<bool> retryable_failures) : failures_(std::move(retryable_failures)) {}
    ChatResponse complete(const ChatRequest&) override {
        const std::size_t i = calls_++;
        if (i < failures_.size()) throw ProviderError("failure " + std::to_string(i), failures_[i]);
        return {"ok", FinishReason::Stop, ""};
    }
    std::string_view name() const override { return "flaky"; }
    std::size_t calls() const { return calls_; }

private:
    std::vector<bool> failures_;
    std::size_t calls_ = 0;
};

}  // namespace

TEST_CASE("canonical request json and digest") {
    const auto req = request("hi");
    CHECK(canonical_json(req) ==
          R"({"max_tokens":1024,"messages":[{"content":"hi","role":"user"}],"model_id":"gpt-3.5-turbo-16k","temperature":0.0})");
    // Reference digest computed with Python's hashlib over the string above.
    CHECK(cache_key(req).digest == "ce92ecb6196ecc3357b8d9473241999b5776a5ec152f43a38f09771aa961ff2a");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("digest changes with every request field") {
    const auto base = request("prompt");
    std::set<std::string> digests{cache_key(base).digest};
    auto r = base;
    r.model_id = "other-model";
    digests.insert(cache_key(r).digest);
    r = base;
    r.temperature = 0.5;
    digests.insert(cache_key(r).digest);
    r = base;
    r.max_tokens = 10;
    digests.insert(cache_key(r).digest);
    r = base;
    r.messages[0].content += " ";
    digests.insert(cache_key(r).digest);
    r = base;
    r.messages[0].role = Role::System;
    digests.insert(cache_key(r).digest);
    CHECK(digests.size() == 6);
    CHECK(cache_key(base) == cache_key(request("prompt")));
}

TEST_CASE("digests of many distinct prompts do not collide") {
    std::set<std::string> seen;
    for (int i = 0; i < 20000; ++i) {
        const auto d = cache_key(request("prompt number " + std::to_string(i))).digest;
        CHECK(d.size() == 64);
        seen.insert(d);
    }
    CHECK(seen.size() == 20000);
}

TEST_CASE("request and response json round trip") {
    ChatRequest req = request("text with \"quotes\" and \n newline");
    req.messages.insert(req.messages.begin(), {Role::System, "sys"});
    CHECK(request_from_json(request_to_json(req)) == req);
    const ChatResponse resp{"answer", FinishReason::Length, "meta"};
    CHECK(response_from_json(response_to_json(resp)) == resp);
}

TEST_CASE("request validation") {
    ChatRequest r;
    CHECK_THROWS_AS(r.validate(), ConfigError);
    r = request("x");
    r.temperature = -1;
    CHECK_THROWS_AS(r.validate(), ConfigError);
    r = request("x");
    r.max_tokens = 0;
    CHECK_THROWS_AS(r.validate(), ConfigError);
}

TEST_CASE("mock provider: digest entries repeat, sequence entries are consumed in order") {
    const auto a = request("a"), b = request("b");
    MockProvider mock({{cache_key(a).digest, "for a"}, {std::nullopt, "first"}, {std::nullopt, ""}});
    CHECK(mock.complete(a).text == "for a");
    CHECK(mock.complete(a).text == "for a");
    CHECK(mock.complete(b).text == "first");
    const auto empty = mock.complete(b);
    CHECK(empty.text.empty());
    CHECK(empty.finish_reason == FinishReason::Other);
    CHECK(mock.remaining_sequence() == 0);
    try {
        mock.complete(b);
        FAIL("expected GatewayError");
    } catch (const GatewayError& e) {
        CHECK(std::string(e.what()).find(cache_key(b).digest) != std::string::npos);
    }
}

TEST_CASE("transcript parse and write") {
    const std::vector<MockProvider::Entry> entries = {{"abc", "one"}, {std::nullopt, "two\nlines"}};
    const auto text = write_transcript(entries);
    const auto back = MockProvider::parse_transcript(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].digest == "abc");
    CHECK(back[1].response == "two\nlines");
    CHECK_FALSE(back[1].digest);
    CHECK_THROWS_AS(MockProvider::parse_transcript("{\"match\":\"fuzzy\",\"response\":\"x\"}"), IngestError);
    CHECK_THROWS_AS(MockProvider::parse_transcript("{\"match\":\"digest\",\"response\":\"x\"}"), IngestError);
    CHECK_THROWS_AS(MockProvider::parse_transcript("not json"), IngestError);
    CHECK_THROWS_AS(MockProvider::load_transcript("/nonexistent/transcript.jsonl"), IngestError);
}

TEST_CASE("cache stores once and serves hits") {
    testsupport::TempDir dir;
    ResponseCache cache(dir / "cache");
    const auto req = request("cached");
    const auto key = cache_key(req);
    CHECK_FALSE(cache.lookup(key));
    CHECK(cache.store(key, req, {"first", FinishReason::Stop, ""}).text == "first");
    // A second store keeps the original content.
    CHECK(cache.store(key, req, {"second", FinishReason::Stop, ""}).text == "first");
    CHECK(cache.lookup(key)->text == "first");
    CHECK(cache.path_for(key).filename() == key.digest + ".json");
    const auto doc = nlohmann::json::parse(testsupport::read_file(cache.path_for(key)));
    CHECK(doc.contains("created_at"));
    CHECK(request_from_json(doc.at("request")) == req);
    // No temporary files are left behind.
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir / "cache")) {
        (void)e;
        ++files;
    }
    CHECK(files == 1);
}

TEST_CASE("concurrent writers agree on one cache entry") {
    testsupport::TempDir dir;
    ResponseCache cache(dir / "cache");
    const auto req = request("race");
    const auto key = cache_key(req);
    std::vector<std::string> results(8);
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < results.size(); ++i)
        threads.emplace_back([&, i] { results[i] = cache.store(key, req, {"writer " + std::to_string(i), FinishReason::Stop, ""}).text; });
    for (auto& t : threads) t.join();
    const std::string stored = cache.lookup(key)->text;
    for (const auto& r : results) CHECK(r == stored);
}

TEST_CASE("gateway serves repeated requests from cache") {
    testsupport::TempDir dir;
    auto provider = std::make_shared<testsupport::FunctionProvider>([](const std::string& p) { return "echo " + p; });
    Gateway gw(provider, ResponseCache(dir / "cache"));
    CHECK(gw.complete(request("x")).text == "echo x");
    CHECK(gw.complete(request("x")).text == "echo x");
    CHECK(gw.complete(request("y")).text == "echo y");
    CHECK(gw.provider_calls() == 2);
    CHECK(gw.cache_hits() == 1);
    CHECK(provider->calls() == 2);

    // A fresh gateway over the same directory needs no provider at all.
    auto refusing = std::make_shared<testsupport::RefusingProvider>();
    Gateway replay(refusing, ResponseCache(dir / "cache"));
    CHECK(replay.complete(request("x")).text == "echo x");
    CHECK(refusing->calls() == 0);
    CHECK_THROWS_AS(replay.complete(request("z")), GatewayError);
}

TEST_CASE("gateway retries retryable failures with doubling backoff") {
    std::vector<std::chrono::milliseconds> sleeps;
    RetryPolicy policy;
    policy.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };

    SUBCASE("recovers within the retry budget") {
        auto p = std::make_shared<FlakyProvider>(std::vector<bool>{true, true});
        Gateway gw(p, std::nullopt, policy);
        CHECK(gw.complete(request("x")).text == "ok");
        CHECK(p->calls() == 3);
        CHECK(gw.provider_calls() == 3);
        CHECK(sleeps == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(1000),
                                                                std::chrono::milliseconds(2000)});
    }
    SUBCASE("gives up after max_retries and reports the attempts") {
        auto p = std::make_shared<FlakyProvider>(std::vector<bool>{true, true, true});
        Gateway gw(p, std::nullopt, policy);
        try {
            gw.complete(request("x"));
            FAIL("expected GatewayError");
        } catch (const GatewayError& e) {
            CHECK(e.attempts() == 3);
        }
        CHECK(sleeps.size() == 2);
    }
    SUBCASE("does not retry non-retryable failures") {
        auto p = std::make_shared<FlakyProvider>(std::vector<bool>{false});
        Gateway gw(p, std::nullopt, policy);
        CHECK_THROWS_AS(gw.complete(request("x")), GatewayError);
        CHECK(p->calls() == 1);
        CHECK(sleeps.empty());
    }
}

TEST_CASE("openai provider reports unreachable endpoints as retryable") {
    OpenAIProvider p("http://127.0.0.1:9", "test-key", std::chrono::seconds(2));
    try {
        p.complete(request("x"));
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(e.retryable());
    }
}
