#include "mlpref/config.hpp"

#include <set>

#include "mlpref/core/error.hpp"
#include "mlpref/core/jsonl.hpp"

namespace mlpref {

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, _] : j.items())
        if (!known.count(key))
            throw ConfigError("unknown config key '" + key + "' in " + where);
}

template <typename T>
void get(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Config config_from_json(const json& j) {
    Config cfg;
    reject_unknown(j,
                   {"gateway", "sandbox", "judge", "agent", "corpus", "report", "metrics",
                    "executor", "sim_cost_s", "seed", "output_dir"},
                   "config");

    if (j.contains("gateway")) {
        const json& g = j.at("gateway");
        reject_unknown(g,
                       {"transport", "endpoint", "api_key_env", "model_id", "temperature",
                        "max_tokens", "retries", "backoff_base_ms", "timeout_s", "parallelism",
                        "fixtures_dir"},
                       "gateway");
        get(g, "transport", cfg.gateway.transport);
        get(g, "endpoint", cfg.gateway.endpoint);
        get(g, "api_key_env", cfg.gateway.api_key_env);
        get(g, "model_id", cfg.gateway.model_id);
        get(g, "temperature", cfg.gateway.temperature);
        get(g, "max_tokens", cfg.gateway.max_tokens);
        get(g, "retries", cfg.gateway.retries);
        get(g, "backoff_base_ms", cfg.gateway.backoff_base_ms);
        get(g, "timeout_s", cfg.gateway.timeout_s);
        get(g, "parallelism", cfg.gateway.parallelism);
        get(g, "fixtures_dir", cfg.gateway.fixtures_dir);
    }

    if (j.contains("sandbox")) {
        const json& s = j.at("sandbox");
        reject_unknown(s, {"cmd_template", "timeout_s", "stdout_budget", "stderr_budget", "grace_s"},
                       "sandbox");
        get(s, "cmd_template", cfg.sandbox.cmd_template);
        get(s, "timeout_s", cfg.sandbox.timeout_s);
        get(s, "stdout_budget", cfg.sandbox.stdout_budget);
        get(s, "stderr_budget", cfg.sandbox.stderr_budget);
        get(s, "grace_s", cfg.sandbox.grace_s);
    }

    if (j.contains("judge")) {
        const json& jd = j.at("judge");
        reject_unknown(jd,
                       {"gate", "dual_order", "representation_level", "snippet_budget",
                        "max_list_size"},
                       "judge");
        get(jd, "gate", cfg.judge.gate);
        get(jd, "dual_order", cfg.judge.dual_order);
        if (jd.contains("representation_level"))
            cfg.judge.representation_level =
                enum_from_string<RepLevel>(jd.at("representation_level").get<std::string>());
        get(jd, "snippet_budget", cfg.judge.snippet_budget);
        get(jd, "max_list_size", cfg.judge.max_list_size);
    }

    if (j.contains("agent")) {
        const json& a = j.at("agent");
        reject_unknown(a,
                       {"m", "gate", "k", "time_budget_s", "max_rounds", "rep_level", "selection",
                        "debug_retries", "m_min", "val_pattern", "val_contract"},
                       "agent");
        get(a, "m", cfg.agent.m);
        get(a, "gate", cfg.agent.gate);
        get(a, "k", cfg.agent.k);
        get(a, "time_budget_s", cfg.agent.time_budget_s);
        get(a, "max_rounds", cfg.agent.max_rounds);
        if (a.contains("rep_level"))
            cfg.agent.rep_level = enum_from_string<RepLevel>(a.at("rep_level").get<std::string>());
        if (a.contains("selection")) {
            std::string mode = a.at("selection").get<std::string>();
            if (mode == "champion_sweep")
                cfg.agent.selection = agent::SelectionMode::champion_sweep;
            else if (mode == "round_robin")
                cfg.agent.selection = agent::SelectionMode::round_robin;
            else
                throw ConfigError("unknown agent.selection: " + mode);
        }
        get(a, "debug_retries", cfg.agent.debug_retries);
        get(a, "m_min", cfg.agent.m_min);
        get(a, "val_pattern", cfg.agent.val_pattern);
        get(a, "val_contract", cfg.agent.val_contract);
    }

    if (j.contains("corpus")) {
        const json& c = j.at("corpus");
        reject_unknown(c, {"cap", "seed", "tie_eps"}, "corpus");
        get(c, "cap", cfg.corpus.cap);
        get(c, "seed", cfg.corpus.seed);
        get(c, "tie_eps", cfg.corpus.tie_eps);
    }

    if (j.contains("report")) {
        const json& r = j.at("report");
        reject_unknown(r,
                       {"raw_records_per_file", "raw_bytes_per_file", "log_budget",
                        "profiling_timeout_s", "leakage_regen_attempts", "verbalize_retries",
                        "cmd_template", "model_name_keywords", "training_keywords"},
                       "report");
        get(r, "raw_records_per_file", cfg.report.raw_records_per_file);
        get(r, "raw_bytes_per_file", cfg.report.raw_bytes_per_file);
        get(r, "log_budget", cfg.report.log_budget);
        get(r, "profiling_timeout_s", cfg.report.profiling_timeout_s);
        get(r, "leakage_regen_attempts", cfg.report.leakage_regen_attempts);
        get(r, "verbalize_retries", cfg.report.verbalize_retries);
        get(r, "cmd_template", cfg.report.cmd_template);
        get(r, "model_name_keywords", cfg.report.model_name_keywords);
        get(r, "training_keywords", cfg.report.training_keywords);
    }

    if (j.contains("metrics")) {
        const json& m = j.at("metrics");
        reject_unknown(m, {"gap_edges", "calibration_bins"}, "metrics");
        get(m, "gap_edges", cfg.metrics.gap_edges);
        get(m, "calibration_bins", cfg.metrics.calibration_bins);
    }

    get(j, "executor", cfg.executor);
    get(j, "sim_cost_s", cfg.sim_cost_s);
    get(j, "seed", cfg.seed);
    get(j, "output_dir", cfg.output_dir);

    if (cfg.executor != "sandbox" && cfg.executor != "simulated")
        throw ConfigError("executor must be 'sandbox' or 'simulated'");
    if (cfg.gateway.transport != "replay" && cfg.gateway.transport != "http" &&
        cfg.gateway.transport != "http+cache")
        throw ConfigError("gateway.transport must be replay, http, or http+cache");
    if (cfg.judge.gate < 0 || cfg.judge.gate > 1) throw ConfigError("judge.gate must lie in [0,1]");

    // one model/temperature knob for every caller
    cfg.judge.model_id = cfg.gateway.model_id;
    cfg.judge.temperature = cfg.gateway.temperature;
    cfg.judge.max_tokens = cfg.gateway.max_tokens;
    cfg.agent.judge_cfg = cfg.judge;
    cfg.agent.model_id = cfg.gateway.model_id;
    cfg.agent.temperature = cfg.gateway.temperature;
    cfg.agent.max_tokens = cfg.gateway.max_tokens;
    cfg.report.model_id = cfg.gateway.model_id;
    cfg.report.temperature = cfg.gateway.temperature;
    cfg.report.max_tokens = cfg.gateway.max_tokens;
    validate(cfg.agent);
    return cfg;
}

Config load_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const Config& cfg) {
    return json{
        {"gateway",
         {{"transport", cfg.gateway.transport},
          {"endpoint", cfg.gateway.endpoint},
          {"api_key_env", cfg.gateway.api_key_env},
          {"model_id", cfg.gateway.model_id},
          {"temperature", cfg.gateway.temperature},
          {"max_tokens", cfg.gateway.max_tokens},
          {"retries", cfg.gateway.retries},
          {"backoff_base_ms", cfg.gateway.backoff_base_ms},
          {"timeout_s", cfg.gateway.timeout_s},
          {"parallelism", cfg.gateway.parallelism},
          {"fixtures_dir", cfg.gateway.fixtures_dir}}},
        {"sandbox",
         {{"cmd_template", cfg.sandbox.cmd_template},
          {"timeout_s", cfg.sandbox.timeout_s},
          {"stdout_budget", cfg.sandbox.stdout_budget},
          {"stderr_budget", cfg.sandbox.stderr_budget},
          {"grace_s", cfg.sandbox.grace_s}}},
        {"judge",
         {{"gate", cfg.judge.gate},
          {"dual_order", cfg.judge.dual_order},
          {"representation_level", to_string(cfg.judge.representation_level)},
          {"snippet_budget", cfg.judge.snippet_budget},
          {"max_list_size", cfg.judge.max_list_size}}},
        {"agent",
         {{"m", cfg.agent.m},
          {"gate", cfg.agent.gate},
          {"k", cfg.agent.k},
          {"time_budget_s", cfg.agent.time_budget_s},
          {"max_rounds", cfg.agent.max_rounds},
          {"rep_level", to_string(cfg.agent.rep_level)},
          {"selection", cfg.agent.selection == agent::SelectionMode::champion_sweep
                            ? "champion_sweep"
                            : "round_robin"},
          {"debug_retries", cfg.agent.debug_retries},
          {"m_min", cfg.agent.m_min},
          {"val_pattern", cfg.agent.val_pattern},
          {"val_contract", cfg.agent.val_contract}}},
        {"corpus", {{"cap", cfg.corpus.cap}, {"seed", cfg.corpus.seed}, {"tie_eps", cfg.corpus.tie_eps}}},
        {"report",
         {{"raw_records_per_file", cfg.report.raw_records_per_file},
          {"raw_bytes_per_file", cfg.report.raw_bytes_per_file},
          {"log_budget", cfg.report.log_budget},
          {"profiling_timeout_s", cfg.report.profiling_timeout_s},
          {"leakage_regen_attempts", cfg.report.leakage_regen_attempts},
          {"verbalize_retries", cfg.report.verbalize_retries},
          {"cmd_template", cfg.report.cmd_template}}},
        {"metrics",
         {{"gap_edges", cfg.metrics.gap_edges}, {"calibration_bins", cfg.metrics.calibration_bins}}},
        {"executor", cfg.executor},
        {"sim_cost_s", cfg.sim_cost_s},
        {"seed", cfg.seed},
        {"output_dir", cfg.output_dir}};
}

}  // namespace mlpref
