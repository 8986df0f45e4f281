#pragma once
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>

#include "mlpref/core/types.hpp"

namespace mlpref::llm {

struct ChatRequest {
    std::string system;
    std::string user;
    double temperature = 1.0;  // recommended default for data analysis
    int max_tokens = 8192;
    std::string model_id = "default";
};

struct TokenUsage {
    std::int64_t input = 0;
    std::int64_t output = 0;
};

struct ChatResponse {
    std::string text;
    TokenUsage token_usage;
    std::int64_t latency_ms = 0;
};

// Stable content hash over (system, user, model_id, temperature).
// Identical requests map to identical fixture files.
std::string fixture_key(const ChatRequest& req);

class Transport {
  public:
    virtual ~Transport() = default;
    virtual ChatResponse send(const ChatRequest& req) = 0;
};

// Reads one file per request hash: <dir>/<fixture_key>.txt holding the
// raw completion. Pure: identical calls return byte-identical responses.
// Missing fixture -> FixtureMiss (never fabricates).
class ReplayTransport : public Transport {
  public:
    explicit ReplayTransport(std::filesystem::path fixtures_dir);
    ChatResponse send(const ChatRequest& req) override;
    static std::filesystem::path fixture_path(const std::filesystem::path& dir, const ChatRequest& req);
    static void store_fixture(const std::filesystem::path& dir, const ChatRequest& req,
                              const std::string& completion);

  private:
    std::filesystem::path dir_;
};

// In-memory transport for tests; the callback sees every request.
class ScriptedTransport : public Transport {
  public:
    using Handler = std::function<std::string(const ChatRequest&)>;
    explicit ScriptedTransport(Handler handler);
    ChatResponse send(const ChatRequest& req) override;
    std::int64_t calls() const { return calls_.load(); }

  private:
    Handler handler_;
    std::mutex mu_;
    std::atomic<std::int64_t> calls_{0};
};

// OpenAI-style chat completions over HTTP. endpoint is the base URL,
// e.g. "http://localhost:8080"; api_key may be empty for local servers.
class HttpTransport : public Transport {
  public:
    HttpTransport(std::string endpoint, std::string api_key, int timeout_s = 120,
                  std::string path = "/v1/chat/completions");
    ChatResponse send(const ChatRequest& req) override;

  private:
    std::string endpoint_;
    std::string api_key_;
    int timeout_s_;
    std::string path_;
};

// Wraps a transport with a persistent response cache keyed by
// fixture_key. Lets an interrupted run replay its own history without
// re-spending tokens.
class CachingTransport : public Transport {
  public:
    CachingTransport(std::shared_ptr<Transport> inner, std::filesystem::path cache_dir);
    ChatResponse send(const ChatRequest& req) override;

  private:
    std::shared_ptr<Transport> inner_;
    std::filesystem::path dir_;
    std::mutex mu_;
};

struct GatewayConfig {
    int retries = 3;                 // retries after the first attempt, transient failures only
    int backoff_base_ms = 1000;      // doubles per retry
    int parallelism = 4;             // concurrent in-flight completions
};

// Provider-agnostic completion client: validation, retry with
// exponential backoff, a parallelism limiter, and usage accounting.
class Gateway {
  public:
    explicit Gateway(std::shared_ptr<Transport> transport, GatewayConfig cfg = {});

    // Throws InvalidRequest on contract violations, TransportError when
    // retries are exhausted, FixtureMiss unretried.
    ChatResponse complete(const ChatRequest& req);

    TokenUsage total_usage() const;
    std::int64_t calls() const { return calls_.load(); }
    std::int64_t total_latency_ms() const { return latency_ms_.load(); }

  private:
    std::shared_ptr<Transport> transport_;
    GatewayConfig cfg_;
    std::atomic<std::int64_t> calls_{0};
    std::atomic<std::int64_t> usage_in_{0};
    std::atomic<std::int64_t> usage_out_{0};
    std::atomic<std::int64_t> latency_ms_{0};
    std::mutex slots_mu_;
    std::condition_variable slots_cv_;
    int in_flight_ = 0;
};

}  // namespace mlpref::llm
