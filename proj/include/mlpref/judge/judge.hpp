#pragma once
#include <map>
#include <string>
#include <vector>

#include "mlpref/core/types.hpp"
#include "mlpref/llm/gateway.hpp"
#include "mlpref/prompts/library.hpp"

namespace mlpref::judge {

struct JudgeConfig {
    double gate = 0.7;  // confidence threshold for acting on a judgment
    bool dual_order = false;
    RepLevel representation_level = RepLevel::verbal_report;
    std::string model_id = "default";
    double temperature = 1.0;
    int max_tokens = 8192;
    int snippet_budget = 24000;  // chars per code snippet, head 75% / tail 25%
    int max_list_size = 5;
};

// Head/tail truncation with a marker; full ML pipelines keep their
// training/submission tails.
std::string truncate_snippet(const std::string& code, int budget);

// Deterministic pseudo-random presentation order for single-order mode;
// the same pair always gets the same order.
PresentationOrder seeded_order(const TaskSpec& task, const SolutionRecord& a,
                               const SolutionRecord& b);

// Assembles the result-prediction request. Under AB, a's code appears as
// Solution 0; under BA it appears as Solution 1. code_only reports leave
// the data-analysis section empty.
llm::ChatRequest build_preference_prompt(const prompts::Library& prompts, const TaskSpec& task,
                                         const DataReport& report, const SolutionRecord& a,
                                         const SolutionRecord& b, PresentationOrder order,
                                         const JudgeConfig& cfg);

// Extracts the last well-formed JSON object holding predicted_best_index
// in {0,1}; the index names the displayed position and is mapped back
// through the presentation order. Missing confidence defaults to 0.5.
// Throws UnparseableJudgment.
Judgment parse_judgment(const llm::ChatResponse& resp, PresentationOrder order,
                        RepLevel level = RepLevel::code_only);

enum class Gated { Confident, Abstain };

// Confident iff confidence >= gate (boundary inclusive).
Gated gated(const Judgment& j, double gate);

struct RankingResult {
    std::vector<std::string> order;  // solution ids, best first
    std::map<std::string, int> win_counts;
    std::vector<Judgment> judgments;
};

class Judge {
  public:
    Judge(llm::Gateway& gateway, const prompts::Library& prompts, JudgeConfig cfg = {});

    // Single-order: one call with the seeded order. Dual-order: both
    // orders; agreement averages confidence, disagreement keeps the
    // higher-confidence winner at confidence 0 (forced below any gate).
    // Throws JudgeUnavailable when no order yields a parseable judgment.
    Judgment judge_pair(const TaskSpec& task, const DataReport& report, const SolutionRecord& a,
                        const SolutionRecord& b) const;

    // Round-robin over all C(N,2) pairs, Copeland aggregation: win count
    // desc, mean winning confidence desc, solution_id asc. Unavailable
    // judgments contribute no win to either side.
    RankingResult rank_listwise(const TaskSpec& task, const DataReport& report,
                                const std::vector<SolutionRecord>& sols) const;

    const JudgeConfig& config() const { return cfg_; }

  private:
    llm::Gateway& gateway_;
    const prompts::Library& prompts_;
    JudgeConfig cfg_;
};

}  // namespace mlpref::judge
