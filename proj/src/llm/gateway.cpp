#include "mlpref/llm/gateway.hpp"

#include <chrono>
#include <cstdio>
#include <thread>

#include <httplib.h>

#include "mlpref/core/error.hpp"
#include "mlpref/core/hash.hpp"
#include "mlpref/core/jsonl.hpp"

namespace mlpref::llm {

namespace {

std::string format_temperature(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", t);
    return buf;
}

// Replay responses synthesize deterministic usage so accounting tests
// hold offline; ~4 chars per token mirrors provider tokenizers.
TokenUsage synthetic_usage(const ChatRequest& req, const std::string& completion) {
    return TokenUsage{static_cast<std::int64_t>((req.system.size() + req.user.size()) / 4),
                      static_cast<std::int64_t>(completion.size() / 4)};
}

}  // namespace

std::string fixture_key(const ChatRequest& req) {
    std::uint64_t h = fnv1a64("chat-v1");
    h = fnv1a64(req.model_id, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(format_temperature(req.temperature), h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(req.system, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(req.user, h);
    return to_hex(h);
}

ReplayTransport::ReplayTransport(std::filesystem::path fixtures_dir) : dir_(std::move(fixtures_dir)) {}

std::filesystem::path ReplayTransport::fixture_path(const std::filesystem::path& dir,
                                                    const ChatRequest& req) {
    return dir / (fixture_key(req) + ".txt");
}

void ReplayTransport::store_fixture(const std::filesystem::path& dir, const ChatRequest& req,
                                    const std::string& completion) {
    write_file(fixture_path(dir, req), completion);
}

ChatResponse ReplayTransport::send(const ChatRequest& req) {
    auto path = fixture_path(dir_, req);
    if (!std::filesystem::exists(path)) {
        std::string head = req.user.substr(0, 80);
        throw FixtureMiss("no fixture " + path.string() + " for request (user: \"" + head + "...\")");
    }
    std::string text = read_file(path);
    return ChatResponse{text, synthetic_usage(req, text), 0};
}

ScriptedTransport::ScriptedTransport(Handler handler) : handler_(std::move(handler)) {}

ChatResponse ScriptedTransport::send(const ChatRequest& req) {
    std::string text;
    {
        std::lock_guard lock(mu_);
        text = handler_(req);
    }
    calls_.fetch_add(1);
    return ChatResponse{text, synthetic_usage(req, text), 0};
}

HttpTransport::HttpTransport(std::string endpoint, std::string api_key, int timeout_s,
                             std::string path)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), timeout_s_(timeout_s),
      path_(std::move(path)) {}

ChatResponse HttpTransport::send(const ChatRequest& req) {
    httplib::Client client(endpoint_);
    client.set_connection_timeout(timeout_s_, 0);
    client.set_read_timeout(timeout_s_, 0);
    client.set_write_timeout(timeout_s_, 0);

    json body{{"model", req.model_id},
              {"messages",
               json::array({json{{"role", "system"}, {"content", req.system}},
                            json{{"role", "user"}, {"content", req.user}}})},
              {"temperature", req.temperature},
              {"max_tokens", req.max_tokens}};

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto t0 = std::chrono::steady_clock::now();
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);

    if (!res) throw TransportError("connection to " + endpoint_ + " failed", /*transient=*/true);
    if (res->status >= 500)
        throw TransportError("server error " + std::to_string(res->status), /*transient=*/true);
    if (res->status != 200)
        throw TransportError("request rejected with status " + std::to_string(res->status) + ": " +
                                 res->body,
                             /*transient=*/false);

    try {
        json parsed = json::parse(res->body);
        ChatResponse out;
        out.text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
        if (parsed.contains("usage")) {
            out.token_usage.input = parsed["usage"].value("prompt_tokens", std::int64_t{0});
            out.token_usage.output = parsed["usage"].value("completion_tokens", std::int64_t{0});
        }
        out.latency_ms = elapsed.count();
        return out;
    } catch (const json::exception& e) {
        throw TransportError(std::string("malformed completion payload: ") + e.what(),
                             /*transient=*/false);
    }
}

CachingTransport::CachingTransport(std::shared_ptr<Transport> inner, std::filesystem::path cache_dir)
    : inner_(std::move(inner)), dir_(std::move(cache_dir)) {
    std::filesystem::create_directories(dir_);
}

ChatResponse CachingTransport::send(const ChatRequest& req) {
    auto path = dir_ / (fixture_key(req) + ".json");
    {
        std::lock_guard lock(mu_);
        if (std::filesystem::exists(path)) {
            json j = json::parse(read_file(path));
            ChatResponse out;
            out.text = j.at("text").get<std::string>();
            out.token_usage.input = j.value("input_tokens", std::int64_t{0});
            out.token_usage.output = j.value("output_tokens", std::int64_t{0});
            out.latency_ms = j.value("latency_ms", std::int64_t{0});
            return out;
        }
    }
    ChatResponse fresh = inner_->send(req);
    json j{{"text", fresh.text},
           {"input_tokens", fresh.token_usage.input},
           {"output_tokens", fresh.token_usage.output},
           {"latency_ms", fresh.latency_ms}};
    std::lock_guard lock(mu_);
    write_file(path, j.dump());
    return fresh;
}

Gateway::Gateway(std::shared_ptr<Transport> transport, GatewayConfig cfg)
    : transport_(std::move(transport)), cfg_(cfg) {}

ChatResponse Gateway::complete(const ChatRequest& req) {
    if (req.system.empty() || req.user.empty())
        throw InvalidRequest("system and user messages must be nonempty");
    if (req.temperature < 0.0 || req.temperature > 2.0)
        throw InvalidRequest("temperature must lie in [0, 2]");
    if (req.max_tokens <= 0) throw InvalidRequest("max_tokens must be positive");

    {
        std::unique_lock lock(slots_mu_);
        slots_cv_.wait(lock, [&] { return in_flight_ < cfg_.parallelism; });
        ++in_flight_;
    }
    struct SlotRelease {
        Gateway* g;
        ~SlotRelease() {
            {
                std::lock_guard lock(g->slots_mu_);
                --g->in_flight_;
            }
            g->slots_cv_.notify_one();
        }
    } release{this};

    int attempt = 0;
    for (;;) {
        try {
            ChatResponse resp = transport_->send(req);
            calls_.fetch_add(1);
            usage_in_.fetch_add(resp.token_usage.input);
            usage_out_.fetch_add(resp.token_usage.output);
            latency_ms_.fetch_add(resp.latency_ms);
            return resp;
        } catch (const TransportError& e) {
            if (!e.transient || attempt >= cfg_.retries) throw;
            auto delay = std::chrono::milliseconds(cfg_.backoff_base_ms) * (1LL << attempt);
            std::this_thread::sleep_for(delay);
            ++attempt;
        }
    }
}

TokenUsage Gateway::total_usage() const { return TokenUsage{usage_in_.load(), usage_out_.load()}; }

}  // namespace mlpref::llm
