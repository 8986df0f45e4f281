#include "mlpref/agent/agent.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <regex>

#include "mlpref/core/error.hpp"
#include "mlpref/core/score.hpp"
#include "mlpref/core/text.hpp"
#include "mlpref/metrics/metrics.hpp"

namespace mlpref::agent {

void validate(const AgentConfig& cfg) {
    if (cfg.m < 1) throw ConfigError("agent.m must be >= 1");
    if (cfg.k < 1) throw ConfigError("agent.k must be >= 1");
    if (cfg.k > cfg.m) throw ConfigError("agent.k must not exceed agent.m");
    if (cfg.gate < 0 || cfg.gate > 1) throw ConfigError("agent.gate must lie in [0,1]");
    if (cfg.m_min < 1 || cfg.m_min > cfg.m) throw ConfigError("agent.m_min must lie in [1,m]");
    if (cfg.debug_retries < 0) throw ConfigError("agent.debug_retries must be >= 0");
}

sandbox::ExecutionResult SandboxExecutor::execute(const TaskSpec& task,
                                                  const SolutionRecord& record,
                                                  const std::string& val_pattern) {
    sandbox::ExecutionResult result = sandbox::run_script(record.code, task.data_dir, {}, cfg_);
    if (result.ok())
        result.extracted_val_score =
            sandbox::extract_val_score(result.stdout_text, val_pattern, task.metric_direction);
    return result;
}

sandbox::ExecutionResult SimulatedExecutor::execute(const TaskSpec& task,
                                                    const SolutionRecord& record,
                                                    const std::string& val_pattern) {
    sandbox::ExecutionResult result;
    result.wall_time_s = fixed_cost_s_;

    if (record.code.find("sim_fail") != std::string::npos) {
        result.exit_code = 1;
        result.stderr_text = "Traceback (most recent call last):\n  File \"solution.py\", line 1\n"
                             "RuntimeError: sim_fail marker\n";
        return result;
    }
    std::smatch m;
    static const std::regex marker(R"(sim_val_score:\s*([-+0-9.eE]+))");
    if (!std::regex_search(record.code, m, marker)) {
        result.exit_code = 1;
        result.stderr_text = "RuntimeError: no sim_val_score marker in candidate\n";
        return result;
    }
    result.exit_code = 0;
    result.stdout_text = "val_metric: " + m[1].str() + "\n";
    result.extracted_val_score =
        sandbox::extract_val_score(result.stdout_text, val_pattern, task.metric_direction);
    return result;
}

namespace {

struct Loop {
    const TaskSpec& task;
    const AgentConfig& cfg;
    AgentDeps& deps;
    Journal journal;
    judge::Judge judge;
    int node_counter = 0;

    Loop(const TaskSpec& t, const AgentConfig& c, AgentDeps& d, Journal j)
        : task(t), cfg(c), deps(d), journal(std::move(j)),
          judge(d.gateway, d.prompts, c.judge_cfg) {}

    std::string next_node_id() {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "n%04d", node_counter);
        ++node_counter;
        return buf;
    }

    std::string report_body() const {
        return cfg.rep_level == RepLevel::code_only ? std::string{} : deps.report.body;
    }

    llm::ChatResponse complete_tagged(llm::ChatRequest req) {
        req.model_id = cfg.model_id;
        req.temperature = cfg.temperature;
        req.max_tokens = cfg.max_tokens;
        return deps.gateway.complete(req);
    }

    SolutionRecord make_record(const std::string& code, Stage stage,
                               std::optional<std::string> parent) {
        SolutionRecord rec;
        rec.solution_id = next_node_id();
        rec.task_id = task.task_id;
        rec.code = code;
        rec.stage = stage;
        rec.parent_id = std::move(parent);
        rec.created_at = node_counter - 1;
        return rec;
    }

    SolutionRecord generate_draft() {
        auto resp = complete_tagged(deps.prompts.request("draft",
                                                         {{"task-name", task.task_id},
                                                          {"task-desc", task.instruction},
                                                          {"data-analysis", report_body()},
                                                          {"metric-name", task.metric_name},
                                                          {"metric-contract", cfg.val_contract}}));
        std::string code = extract_code_block(resp.text);
        if (code.empty()) throw GenerationFailed("draft generation returned no code");
        return make_record(code, Stage::draft, std::nullopt);
    }

    llm::ChatRequest improve_request(const SolutionRecord& incumbent, int variant) const {
        char val[32];
        std::snprintf(val, sizeof(val), "%.6g", incumbent.val_score.value_or(0.0));
        return deps.prompts.request("improve",
                                    {{"task-name", task.task_id},
                                     {"task-desc", task.instruction},
                                     {"data-analysis", report_body()},
                                     {"metric-name", task.metric_name},
                                     {"metric-contract", cfg.val_contract},
                                     {"val-score", val},
                                     {"incumbent-code", incumbent.code},
                                     {"variant", std::to_string(variant)},
                                     {"variants-total", std::to_string(cfg.m)}});
    }

    SolutionRecord generate_debug(const SearchNode& failed) {
        std::string stderr_tail = tail(failed.exec ? failed.exec->stderr_text : std::string{}, 4000);
        auto resp = complete_tagged(deps.prompts.request("debug",
                                                         {{"task-name", task.task_id},
                                                          {"task-desc", task.instruction},
                                                          {"code", failed.record.code},
                                                          {"stderr-tail", stderr_tail},
                                                          {"metric-contract", cfg.val_contract}}));
        std::string code = extract_code_block(resp.text);
        if (code.empty()) throw GenerationFailed("debug generation returned no code");
        return make_record(code, Stage::debug, failed.record.solution_id);
    }

    bool execute_node(const std::string& id) {
        journal.set_status(id, NodeStatus::executing);
        sandbox::ExecutionResult result;
        if (auto recorded = journal.recorded_exec(id)) {
            result = *recorded;  // an earlier interrupted run already paid for this
        } else {
            result = deps.executor.execute(task, journal.node(id).record, cfg.val_pattern);
        }
        journal.ledger().execution_s += result.wall_time_s;
        bool ok = result.ok() && result.extracted_val_score.has_value();
        journal.set_status(id, ok ? NodeStatus::executed : NodeStatus::failed, result);
        return ok;
    }

    // Executes a node; on failure walks a bounded chain of debug children.
    bool verify_with_debug(const std::string& id, int round) {
        std::string current = id;
        for (int attempt = 0;; ++attempt) {
            if (execute_node(current)) return true;
            if (attempt >= cfg.debug_retries) return false;
            double g0 = gateway_seconds();
            SolutionRecord child;
            try {
                child = generate_debug(journal.node(current));
            } catch (const GenerationFailed&) {
                return false;
            }
            journal.ledger().generation_s += gateway_seconds() - g0;
            journal.add_node(child, round);
            current = child.solution_id;
        }
    }

    double gateway_seconds() const {
        return static_cast<double>(deps.gateway.total_latency_ms()) / 1000.0;
    }

    void ensure_draft() {
        double g0 = gateway_seconds();
        SolutionRecord draft = generate_draft();
        journal.ledger().generation_s += gateway_seconds() - g0;
        journal.add_node(draft, 0);
        if (!verify_with_debug(draft.solution_id, 0))
            throw AgentFailed("no successful execution: draft and debug attempts all failed; journal at " +
                              journal.dir().string());
    }

    std::vector<std::string> propose_candidates(int round) {
        // add_node reallocates the node store, so work from a copy
        const SolutionRecord incumbent =
            journal.node(*journal.incumbent(task.metric_direction)).record;
        double g0 = gateway_seconds();

        std::vector<std::future<std::string>> futures;
        futures.reserve(static_cast<std::size_t>(cfg.m));
        for (int i = 1; i <= cfg.m; ++i) {
            llm::ChatRequest req = improve_request(incumbent, i);
            futures.push_back(std::async(std::launch::async, [this, req = std::move(req)]() mutable {
                return extract_code_block(complete_tagged(std::move(req)).text);
            }));
        }

        std::vector<std::string> ids;
        for (auto& fut : futures) {
            std::string code;
            try {
                code = fut.get();
            } catch (const TransportError&) {
                continue;  // tolerated down to m_min
            }
            if (code.empty()) continue;
            SolutionRecord rec = make_record(code, Stage::improve, incumbent.solution_id);
            journal.add_node(rec, round);
            ids.push_back(rec.solution_id);
        }
        journal.ledger().generation_s += gateway_seconds() - g0;

        if (static_cast<int>(ids.size()) < cfg.m_min)
            throw RoundAborted("round " + std::to_string(round) + " produced " +
                               std::to_string(ids.size()) + " candidates (need " +
                               std::to_string(cfg.m_min) + ")");
        return ids;
    }

    std::optional<Judgment> judged(const std::string& a_id, const std::string& b_id, int round) {
        try {
            Judgment j =
                judge.judge_pair(task, deps.report, journal.node(a_id).record, journal.node(b_id).record);
            journal.add_judgment(a_id, b_id, round, j);
            return j;
        } catch (const JudgeUnavailable&) {
            return std::nullopt;  // treated as an abstention
        }
    }

    std::vector<std::string> sweep_select(const std::vector<std::string>& candidates, int round) {
        std::vector<std::string> remaining = candidates;
        std::vector<std::string> selected;
        while (static_cast<int>(selected.size()) < cfg.k && !remaining.empty()) {
            std::string champion = remaining.front();
            for (std::size_t i = 1; i < remaining.size(); ++i) {
                auto j = judged(champion, remaining[i], round);
                // below-gate or unavailable keeps the champion (conservative abstention)
                if (j && judge::gated(*j, cfg.gate) == judge::Gated::Confident &&
                    j->predicted == Side::B)
                    champion = remaining[i];
            }
            selected.push_back(champion);
            remaining.erase(std::find(remaining.begin(), remaining.end(), champion));
        }
        return selected;
    }

    std::vector<std::string> round_robin_select(const std::vector<std::string>& candidates,
                                                int round) {
        std::map<std::string, int> wins;
        std::map<std::string, std::vector<double>> confs;
        for (const auto& id : candidates) wins[id] = 0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            for (std::size_t j = i + 1; j < candidates.size(); ++j) {
                auto jd = judged(candidates[i], candidates[j], round);
                if (!jd || judge::gated(*jd, cfg.gate) != judge::Gated::Confident) continue;
                const std::string& winner = jd->predicted == Side::A ? candidates[i] : candidates[j];
                wins[winner] += 1;
                confs[winner].push_back(jd->confidence);
            }
        }
        auto mean_conf = [&](const std::string& id) {
            const auto& v = confs[id];
            if (v.empty()) return 0.0;
            double s = 0;
            for (double c : v) s += c;
            return s / static_cast<double>(v.size());
        };
        std::vector<std::string> ranked = candidates;
        std::stable_sort(ranked.begin(), ranked.end(), [&](const std::string& x, const std::string& y) {
            if (wins[x] != wins[y]) return wins[x] > wins[y];
            double cx = mean_conf(x), cy = mean_conf(y);
            if (cx != cy) return cx > cy;
            return x < y;
        });
        ranked.resize(std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(cfg.k)));
        return ranked;
    }

    void run_predictive() {
        ensure_draft();
        for (int round = 1; round <= cfg.max_rounds; ++round) {
            if (journal.ledger().total() >= cfg.time_budget_s) break;

            std::vector<std::string> candidates;
            try {
                candidates = propose_candidates(round);
            } catch (const RoundAborted&) {
                break;
            }

            double j0 = gateway_seconds();
            std::vector<std::string> selected = cfg.selection == SelectionMode::champion_sweep
                                                    ? sweep_select(candidates, round)
                                                    : round_robin_select(candidates, round);
            journal.ledger().judge_s += gateway_seconds() - j0;

            for (const auto& id : candidates) {
                bool is_selected = std::find(selected.begin(), selected.end(), id) != selected.end();
                journal.set_status(id, is_selected ? NodeStatus::judged_winner
                                                   : NodeStatus::judged_pruned);
            }
            for (const auto& id : selected) verify_with_debug(id, round);
        }
    }

    void run_execute_all() {
        ensure_draft();
        for (int round = 1; round <= cfg.max_rounds; ++round) {
            if (journal.ledger().total() >= cfg.time_budget_s) break;
            const SolutionRecord incumbent =
                journal.node(*journal.incumbent(task.metric_direction)).record;
            double g0 = gateway_seconds();
            SolutionRecord rec;
            try {
                std::string code =
                    extract_code_block(complete_tagged(improve_request(incumbent, 1)).text);
                if (code.empty()) throw GenerationFailed("improve generation returned no code");
                rec = make_record(code, Stage::improve, incumbent.solution_id);
            } catch (const GenerationFailed&) {
                break;
            }
            journal.ledger().generation_s += gateway_seconds() - g0;
            journal.add_node(rec, round);
            verify_with_debug(rec.solution_id, round);
        }
    }
};

}  // namespace

Journal run_agent(const TaskSpec& task, const AgentConfig& cfg, AgentDeps& deps,
                  const std::filesystem::path& journal_root,
                  std::optional<int> crash_after_writes) {
    validate(cfg);
    Loop loop(task, cfg, deps, Journal::open(journal_root / task.task_id, task, crash_after_writes));
    loop.run_predictive();
    return std::move(loop.journal);
}

Journal run_baseline(const TaskSpec& task, const AgentConfig& cfg, AgentDeps& deps,
                     const std::filesystem::path& journal_root,
                     std::optional<int> crash_after_writes) {
    validate(cfg);
    Loop loop(task, cfg, deps, Journal::open(journal_root / task.task_id, task, crash_after_writes));
    loop.run_execute_all();
    return std::move(loop.journal);
}

json journal_summary(const Journal& journal, const llm::Gateway& gateway) {
    const auto& task = journal.task();
    json counts = json::object();
    int executions = 0;
    for (const auto& node : journal.nodes()) {
        std::string status = to_string(node.status);
        counts[status] = counts.value(status, 0) + 1;
        if (node.status == NodeStatus::executed || node.status == NodeStatus::failed) ++executions;
    }

    json out{{"task_id", task.task_id},
             {"nodes_explored", journal.nodes().size()},
             {"executions", executions},
             {"status_counts", counts},
             {"ledger",
              {{"generation_s", journal.ledger().generation_s},
               {"judge_s", journal.ledger().judge_s},
               {"execution_s", journal.ledger().execution_s},
               {"total_s", journal.ledger().total()}}},
             {"gateway",
              {{"calls", gateway.calls()},
               {"input_tokens", gateway.total_usage().input},
               {"output_tokens", gateway.total_usage().output}}}};

    if (auto best = journal.incumbent(task.metric_direction)) {
        const auto& node = journal.node(*best);
        out["incumbent"] = {{"solution_id", *best},
                            {"val_score", node.record.val_score.value_or(0.0)},
                            {"stage", to_string(node.record.stage)}};
    }

    // fidelity over executed nodes carrying both scores, execution order
    std::vector<metrics::ScorePoint> points;
    for (const auto& node : journal.nodes()) {
        if (node.status != NodeStatus::executed) continue;
        if (!node.record.val_score || !node.record.test_score) continue;
        points.push_back({canonical_score({*node.record.val_score, task.metric_direction}),
                          canonical_score({*node.record.test_score, task.metric_direction})});
    }
    if (points.size() >= 2) {
        json fidelity = json::object();
        if (auto ec = metrics::evolution_consistency(points))
            fidelity["evolution_consistency"] = ec->value;
        if (auto gc = metrics::global_pairwise_consistency(points))
            fidelity["global_pairwise_consistency"] = gc->value;
        if (!fidelity.empty()) out["fidelity"] = fidelity;
    }
    return out;
}

}  // namespace mlpref::agent
