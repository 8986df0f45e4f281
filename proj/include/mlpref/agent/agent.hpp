#pragma once
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mlpref/agent/journal.hpp"
#include "mlpref/judge/judge.hpp"
#include "mlpref/llm/gateway.hpp"
#include "mlpref/prompts/library.hpp"
#include "mlpref/sandbox/sandbox.hpp"

namespace mlpref::agent {

enum class SelectionMode { champion_sweep, round_robin };

struct AgentConfig {
    int m = 10;          // candidates proposed per round
    double gate = 0.7;   // confidence gate for acting on a judgment
    int k = 1;           // candidates physically verified per round
    double time_budget_s = 43200;  // accounted seconds (generation + judging + execution)
    int max_rounds = 50;
    judge::JudgeConfig judge_cfg;
    RepLevel rep_level = RepLevel::verbal_report;
    SelectionMode selection = SelectionMode::champion_sweep;
    int debug_retries = 2;  // debug children per failed verification
    int m_min = 1;          // minimum surviving generations per round
    std::string val_pattern = R"(val_metric:\s*([-+0-9.eE]+))";
    std::string val_contract = "val_metric: <value>";
    std::string model_id = "default";
    double temperature = 1.0;
    int max_tokens = 8192;
};

void validate(const AgentConfig& cfg);

class Executor {
  public:
    virtual ~Executor() = default;
    virtual sandbox::ExecutionResult execute(const TaskSpec& task, const SolutionRecord& record,
                                             const std::string& val_pattern) = 0;
};

// Runs the candidate's code against the task data. Labels are legitimate
// training inputs here, so nothing is denied.
class SandboxExecutor : public Executor {
  public:
    explicit SandboxExecutor(sandbox::SandboxConfig cfg) : cfg_(std::move(cfg)) {}
    sandbox::ExecutionResult execute(const TaskSpec& task, const SolutionRecord& record,
                                     const std::string& val_pattern) override;

  private:
    sandbox::SandboxConfig cfg_;
};

// Deterministic stand-in for desk-scale runs and tests. Reads planted
// markers from the code text:
//   sim_val_score: <x>  -> exit 0, prints "val_metric: <x>"
//   sim_fail            -> exit 1 with a scripted traceback
// The fixed cost is accounted in wall_time_s, never slept.
class SimulatedExecutor : public Executor {
  public:
    explicit SimulatedExecutor(double fixed_cost_s = 1.0) : fixed_cost_s_(fixed_cost_s) {}
    sandbox::ExecutionResult execute(const TaskSpec& task, const SolutionRecord& record,
                                     const std::string& val_pattern) override;

  private:
    double fixed_cost_s_;
};

struct AgentDeps {
    llm::Gateway& gateway;
    Executor& executor;
    const prompts::Library& prompts;
    DataReport report;  // built once per task
};

// Search loop that decouples exploration from execution: each round
// proposes m candidates without touching the sandbox, selects via
// confidence-gated pairwise judgments, and physically verifies only the
// top k. Crash-recoverable through the journal; rerunning with the same
// inputs resumes and completes the same journal.
Journal run_agent(const TaskSpec& task, const AgentConfig& cfg, AgentDeps& deps,
                  const std::filesystem::path& journal_root,
                  std::optional<int> crash_after_writes = {});

// Execute-everything baseline: one improvement per round, no judging.
Journal run_baseline(const TaskSpec& task, const AgentConfig& cfg, AgentDeps& deps,
                     const std::filesystem::path& journal_root,
                     std::optional<int> crash_after_writes = {});

// Summary for the final report: incumbent, ledger, node/status counts,
// judge usage, and fidelity metrics when test scores are available.
json journal_summary(const Journal& journal, const llm::Gateway& gateway);

}  // namespace mlpref::agent
