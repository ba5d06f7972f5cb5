#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "kgqa/errors.hpp"
#include "kgqa/llm_provider.hpp"

using namespace kgqa;

namespace {

CompletionRequest request_for(Stage tag, const std::string& prompt = "hello") {
    CompletionRequest r;
    r.prompt = prompt;
    r.tag = tag;
    return r;
}

// A live stub endpoint for HttpProvider tests; stopped on destruction.
struct StubServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    explicit StubServer(httplib::Server::Handler handler) {
        server.Post("/complete", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~StubServer() {
        server.stop();
        thread.join();
    }
    std::string url() const {
        return "http://127.0.0.1:" + std::to_string(port) + "/complete";
    }
};

}  // namespace

TEST_CASE("scripted provider pops FIFO per stage") {
    ScriptedProvider p;
    p.queue(Stage::Schema, "first");
    p.queue(Stage::Schema, "second");
    p.queue(Stage::Answer, "paris");

    CHECK(p.complete(request_for(Stage::Schema)).text == "first");
    CHECK(p.complete(request_for(Stage::Answer)).text == "paris");
    CHECK(p.complete(request_for(Stage::Schema)).text == "second");
    CHECK(p.name() == "scripted");
}

TEST_CASE("scripted provider falls back to the default and then errors") {
    ScriptedProvider with_default("UNKNOWN");
    CHECK(with_default.complete(request_for(Stage::Hypothesis)).text ==
          "UNKNOWN");

    ScriptedProvider bare;
    CHECK_THROWS_AS(bare.complete(request_for(Stage::Schema)),
                    ScriptExhaustedError);
}

TEST_CASE("scripted provider logs every request") {
    ScriptedProvider p("x");
    p.complete(request_for(Stage::Schema, "one"));
    p.complete(request_for(Stage::PathScore, "two"));
    auto log = p.requests();
    REQUIRE(log.size() == 2);
    CHECK(log[0].prompt == "one");
    CHECK(log[0].tag == Stage::Schema);
    CHECK(log[1].tag == Stage::PathScore);
}

TEST_CASE("invalid requests are rejected up front") {
    ScriptedProvider p("x");
    CompletionRequest empty_prompt = request_for(Stage::Schema, "");
    CHECK_THROWS_AS(p.complete(empty_prompt), Error);

    CompletionRequest bad_tokens = request_for(Stage::Schema);
    bad_tokens.max_tokens = 0;
    CHECK_THROWS_AS(p.complete(bad_tokens), Error);

    CompletionRequest bad_temp = request_for(Stage::Schema);
    bad_temp.temperature = -1.0;
    CHECK_THROWS_AS(p.complete(bad_temp), Error);
}

TEST_CASE("scripted provider loads from a JSON script file") {
    auto path = std::filesystem::temp_directory_path() / "kgqa_script_test.json";
    {
        std::ofstream out(path);
        out << R"({"default": "UNKNOWN",
                   "responses": {"schema": ["s1", "s2"], "answer": ["a1"]}})";
    }
    auto p = ScriptedProvider::from_file(path.string());
    CHECK(p->complete(request_for(Stage::Schema)).text == "s1");
    CHECK(p->complete(request_for(Stage::Answer)).text == "a1");
    CHECK(p->complete(request_for(Stage::Answer)).text == "UNKNOWN");
    std::filesystem::remove(path);

    CHECK_THROWS_AS(ScriptedProvider::from_file("/no/such/file.json"), Error);
}

TEST_CASE("http provider round-trips against a stub server") {
    nlohmann::json seen;
    std::string auth_header;
    StubServer stub([&](const httplib::Request& req, httplib::Response& res) {
        seen = nlohmann::json::parse(req.body);
        if (req.has_header("Authorization")) {
            auth_header = req.get_header_value("Authorization");
        }
        res.set_content(R"({"text": "paris"})", "application/json");
    });

    setenv("KGQA_TEST_TOKEN", "sekrit", 1);
    auto provider = make_provider(stub.url(), "KGQA_TEST_TOKEN");
    CompletionRequest req = request_for(Stage::Answer, "which city?");
    req.max_tokens = 64;
    CHECK(provider->complete(req).text == "paris");

    CHECK(seen["prompt"] == "which city?");
    CHECK(seen["max_tokens"] == 64);
    CHECK(seen["temperature"] == 0.0);
    CHECK(auth_header == "Bearer sekrit");
    unsetenv("KGQA_TEST_TOKEN");
}

TEST_CASE("http provider retries then surfaces the failure") {
    std::atomic<int> hits{0};
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 500;
    });

    HttpProviderConfig config;
    config.url = stub.url();
    config.max_retries = 2;
    config.backoff_base = std::chrono::milliseconds(1);
    HttpProvider provider(config);
    try {
        provider.complete(request_for(Stage::Schema));
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(e.attempts() == 3);  // 1 + max_retries
        CHECK(std::string(e.what()).find("500") != std::string::npos);
    }
    CHECK(hits.load() == 3);
}

TEST_CASE("http provider rejects bodies without a text field") {
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        res.set_content("not json at all", "text/plain");
    });
    HttpProviderConfig config;
    config.url = stub.url();
    config.max_retries = 0;
    HttpProvider provider(config);
    CHECK_THROWS_AS(provider.complete(request_for(Stage::Schema)),
                    ProviderError);
}

TEST_CASE("make_provider understands its spec forms") {
    CHECK_THROWS_AS(make_provider("bogus:x"), ConfigError);
    CHECK_THROWS_AS(HttpProvider(HttpProviderConfig{"no-scheme"}), ConfigError);
    CHECK(make_provider("http:http://127.0.0.1:1/x")->name() == "http");
}

TEST_CASE("stage names round-trip") {
    for (Stage s : {Stage::Schema, Stage::Answer, Stage::Hypothesis,
                    Stage::PathScore}) {
        CHECK(stage_from_name(stage_name(s)) == s);
    }
    CHECK_FALSE(stage_from_name("nonsense").has_value());
}
