#pragma once
#include <filesystem>
#include <string>
#include <vector>

#include "mlpref/agent/agent.hpp"
#include "mlpref/corpus/curate.hpp"
#include "mlpref/judge/judge.hpp"
#include "mlpref/llm/gateway.hpp"
#include "mlpref/report/report.hpp"
#include "mlpref/sandbox/sandbox.hpp"

namespace mlpref {

struct GatewaySettings {
    std::string transport = "replay";  // replay | http | http+cache
    std::string endpoint;
    std::string api_key_env = "MLPREF_API_KEY";  // secrets come from the environment only
    std::string model_id = "default";
    double temperature = 1.0;
    int max_tokens = 8192;
    int retries = 3;
    int backoff_base_ms = 1000;
    int timeout_s = 120;
    int parallelism = 4;
    std::string fixtures_dir = "fixtures";
};

struct MetricsSettings {
    std::vector<double> gap_edges = {0.0, 3.0, 6.0};
    int calibration_bins = 5;  // over [0.5, 1.0], plus the catch-all below
};

struct Config {
    GatewaySettings gateway;
    sandbox::SandboxConfig sandbox;
    judge::JudgeConfig judge;
    agent::AgentConfig agent;
    corpus::CurationConfig corpus;
    report::ReportConfig report;
    MetricsSettings metrics;
    std::string executor = "sandbox";  // sandbox | simulated
    double sim_cost_s = 1.0;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
};

// Loads and validates a JSON config; unknown keys are rejected so typos
// never silently fall back to defaults. Model id and temperature
// propagate from the gateway section into judge/agent/report settings.
Config load_config(const std::filesystem::path& path);
Config config_from_json(const json& j);
json config_to_json(const Config& cfg);

}  // namespace mlpref
