#include <doctest.h>

#include <atomic>
#include <set>
#include <thread>

#include <httplib.h>

#include "mlpref/core/error.hpp"
#include "mlpref/core/jsonl.hpp"
#include "mlpref/llm/gateway.hpp"

#include "testutil.hpp"

using namespace mlpref;
using namespace mlpref::llm;

namespace {
ChatRequest req(const std::string& user, double temp = 1.0) {
    ChatRequest r;
    r.system = "system prompt";
    r.user = user;
    r.temperature = temp;
    return r;
}
}  // namespace

TEST_CASE("fixture_key is deterministic and content sensitive") {
    CHECK(fixture_key(req("hello")) == fixture_key(req("hello")));
    CHECK(fixture_key(req("hello")) != fixture_key(req("hello ")));  // whitespace matters
    CHECK(fixture_key(req("hello", 1.0)) != fixture_key(req("hello", 0.5)));
    ChatRequest other = req("hello");
    other.model_id = "other-model";
    CHECK(fixture_key(req("hello")) != fixture_key(other));
}

TEST_CASE("fixture keys over a prompt corpus do not collide") {
    std::set<std::string> keys;
    int n = 0;
    for (int i = 0; i < 500; ++i) {
        keys.insert(fixture_key(req("prompt variant " + std::to_string(i))));
        ++n;
    }
    CHECK(static_cast<int>(keys.size()) == n);
}

TEST_CASE("replay transport returns fixtures verbatim and is pure") {
    testutil::TempDir tmp;
    ChatRequest r = req("what is the best solution?");
    ReplayTransport::store_fixture(tmp.path(), r, "fixture text 42");

    Gateway gw(std::make_shared<ReplayTransport>(tmp.path()));
    ChatResponse first = gw.complete(r);
    CHECK(first.text == "fixture text 42");
    for (int i = 0; i < 5; ++i) {
        ChatResponse again = gw.complete(r);
        CHECK(again.text == first.text);
        CHECK(again.token_usage.input == first.token_usage.input);
        CHECK(again.token_usage.output == first.token_usage.output);
    }
}

TEST_CASE("replay transport fails loudly on a missing fixture") {
    testutil::TempDir tmp;
    Gateway gw(std::make_shared<ReplayTransport>(tmp.path()));
    CHECK_THROWS_AS(gw.complete(req("never recorded")), FixtureMiss);
}

TEST_CASE("request validation") {
    testutil::TempDir tmp;
    Gateway gw(std::make_shared<ReplayTransport>(tmp.path()));
    ChatRequest no_user = req("x");
    no_user.user.clear();
    CHECK_THROWS_AS(gw.complete(no_user), InvalidRequest);
    ChatRequest hot = req("x", 3.0);
    CHECK_THROWS_AS(gw.complete(hot), InvalidRequest);
    ChatRequest zero = req("x");
    zero.max_tokens = 0;
    CHECK_THROWS_AS(gw.complete(zero), InvalidRequest);
}

TEST_CASE("temperature defaults to 1.0 when unset") {
    ChatRequest r;
    CHECK(r.temperature == doctest::Approx(1.0));
}

TEST_CASE("usage accounting is additive over calls") {
    auto transport = std::make_shared<ScriptedTransport>(
        [](const ChatRequest&) { return std::string("six ch"); });
    Gateway gw(transport);
    TokenUsage expect{0, 0};
    for (int i = 0; i < 7; ++i) {
        ChatResponse resp = gw.complete(req("payload " + std::to_string(i)));
        expect.input += resp.token_usage.input;
        expect.output += resp.token_usage.output;
    }
    CHECK(gw.total_usage().input == expect.input);
    CHECK(gw.total_usage().output == expect.output);
    CHECK(gw.calls() == 7);
}

TEST_CASE("parallelism limiter bounds in-flight requests") {
    std::atomic<int> active{0}, peak{0};
    auto transport = std::make_shared<ScriptedTransport>([&](const ChatRequest&) {
        int now = ++active;
        int seen = peak.load();
        while (now > seen && !peak.compare_exchange_weak(seen, now)) {}
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        --active;
        return std::string("ok");
    });
    GatewayConfig cfg;
    cfg.parallelism = 2;
    Gateway gw(transport, cfg);

    std::vector<std::thread> workers;
    for (int i = 0; i < 8; ++i)
        workers.emplace_back([&gw, i] { gw.complete(req("w" + std::to_string(i))); });
    for (auto& w : workers) w.join();
    CHECK(peak.load() <= 2);
    CHECK(gw.calls() == 8);
}

TEST_CASE("live transport retries transient failures with backoff") {
    // scripted fake server: two 5xx responses, then success
    std::atomic<int> attempts{0};
    httplib::Server server;
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        int n = ++attempts;
        if (n <= 2) {
            res.status = 503;
            res.set_content("overloaded", "text/plain");
            return;
        }
        json body{{"choices", json::array({json{{"message", json{{"content", "recovered"}}}}})},
                  {"usage", {{"prompt_tokens", 5}, {"completion_tokens", 2}}}};
        res.set_content(body.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    GatewayConfig cfg;
    cfg.retries = 3;
    cfg.backoff_base_ms = 1;
    Gateway gw(std::make_shared<HttpTransport>("http://127.0.0.1:" + std::to_string(port), "key"),
               cfg);
    ChatResponse resp = gw.complete(req("retry me"));
    CHECK(resp.text == "recovered");
    CHECK(attempts.load() == 3);
    CHECK(resp.token_usage.input == 5);

    server.stop();
    server_thread.join();
}

TEST_CASE("exhausted retries surface TransportError") {
    std::atomic<int> attempts{0};
    httplib::Server server;
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++attempts;
        res.status = 500;
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    GatewayConfig cfg;
    cfg.retries = 2;
    cfg.backoff_base_ms = 1;
    Gateway gw(std::make_shared<HttpTransport>("http://127.0.0.1:" + std::to_string(port), ""),
               cfg);
    CHECK_THROWS_AS(gw.complete(req("always down")), TransportError);
    CHECK(attempts.load() == 3);  // initial + 2 retries

    server.stop();
    server_thread.join();
}

TEST_CASE("4xx responses are not retried") {
    std::atomic<int> attempts{0};
    httplib::Server server;
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++attempts;
        res.status = 401;
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    Gateway gw(std::make_shared<HttpTransport>("http://127.0.0.1:" + std::to_string(port), ""));
    CHECK_THROWS_AS(gw.complete(req("bad key")), TransportError);
    CHECK(attempts.load() == 1);

    server.stop();
    server_thread.join();
}

TEST_CASE("caching transport spends the inner transport once per request") {
    testutil::TempDir tmp;
    auto inner = std::make_shared<ScriptedTransport>(
        [](const ChatRequest& r) { return "answer to " + r.user; });
    Gateway gw(std::make_shared<CachingTransport>(inner, tmp.path() / "cache"));
    ChatResponse a = gw.complete(req("q1"));
    ChatResponse b = gw.complete(req("q1"));
    ChatResponse c = gw.complete(req("q2"));
    CHECK(a.text == b.text);
    CHECK(c.text == "answer to q2");
    CHECK(inner->calls() == 2);
}
