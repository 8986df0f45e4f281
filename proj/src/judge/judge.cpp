#include "mlpref/judge/judge.hpp"

#include <algorithm>
#include <future>

#include "mlpref/core/error.hpp"
#include "mlpref/core/hash.hpp"
#include "mlpref/core/jsonutil.hpp"
#include "mlpref/core/text.hpp"

namespace mlpref::judge {

std::string truncate_snippet(const std::string& code, int budget) {
    return head_tail_truncate(code, static_cast<std::size_t>(budget), 0.75);
}

PresentationOrder seeded_order(const TaskSpec& task, const SolutionRecord& a,
                               const SolutionRecord& b) {
    std::uint64_t h = fnv1a64(task.task_id);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(a.solution_id, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(b.solution_id, h);
    return (h & 1) == 0 ? PresentationOrder::AB : PresentationOrder::BA;
}

llm::ChatRequest build_preference_prompt(const prompts::Library& prompts, const TaskSpec& task,
                                         const DataReport& report, const SolutionRecord& a,
                                         const SolutionRecord& b, PresentationOrder order,
                                         const JudgeConfig& cfg) {
    if (report.level != cfg.representation_level)
        throw InvalidRequest("report level " + to_string(report.level) +
                             " does not match judge configuration " +
                             to_string(cfg.representation_level));

    const SolutionRecord& first = order == PresentationOrder::AB ? a : b;
    const SolutionRecord& second = order == PresentationOrder::AB ? b : a;

    std::string analysis = report.level == RepLevel::code_only ? std::string{} : report.body;
    llm::ChatRequest req = prompts.request(
        "result_prediction",
        {{"task-name", task.task_id},
         {"task-desc", task.instruction},
         {"data-analysis-report", analysis},
         {"code-0-path", first.solution_id},
         {"code-snippet-0", truncate_snippet(first.code, cfg.snippet_budget)},
         {"code-1-path", second.solution_id},
         {"code-snippet-1", truncate_snippet(second.code, cfg.snippet_budget)}});
    req.model_id = cfg.model_id;
    req.temperature = cfg.temperature;
    req.max_tokens = cfg.max_tokens;
    return req;
}

Judgment parse_judgment(const llm::ChatResponse& resp, PresentationOrder order, RepLevel level) {
    auto extracted = last_json_object(resp.text, [](const json& j) {
        if (!j.contains("predicted_best_index")) return false;
        const json& idx = j.at("predicted_best_index");
        if (!idx.is_number_integer()) return false;
        int v = idx.get<int>();
        return v == 0 || v == 1;
    });
    if (!extracted)
        throw UnparseableJudgment("completion carries no predicted_best_index object");

    int index = extracted->value.at("predicted_best_index").get<int>();

    Judgment j;
    // index 0 is the displayed first solution: a under AB, b under BA
    bool first_wins = index == 0;
    j.predicted = (order == PresentationOrder::AB) == first_wins ? Side::A : Side::B;
    j.presentation_order = order;
    j.raw_response = resp.text;
    j.reasoning = trim(resp.text.substr(0, extracted->begin));
    j.representation_level = level;

    j.confidence = 0.5;  // "optional" in the response format
    if (extracted->value.contains("confidence") && extracted->value.at("confidence").is_number()) {
        double c = extracted->value.at("confidence").get<double>();
        j.confidence = std::clamp(c, 0.0, 1.0);
    }
    return j;
}

Gated gated(const Judgment& j, double gate) {
    return j.confidence >= gate ? Gated::Confident : Gated::Abstain;
}

Judge::Judge(llm::Gateway& gateway, const prompts::Library& prompts, JudgeConfig cfg)
    : gateway_(gateway), prompts_(prompts), cfg_(cfg) {}

Judgment Judge::judge_pair(const TaskSpec& task, const DataReport& report, const SolutionRecord& a,
                           const SolutionRecord& b) const {
    auto ask = [&](PresentationOrder order) -> Judgment {
        llm::ChatRequest req = build_preference_prompt(prompts_, task, report, a, b, order, cfg_);
        llm::ChatResponse resp = gateway_.complete(req);
        return parse_judgment(resp, order, cfg_.representation_level);
    };

    if (!cfg_.dual_order) {
        try {
            return ask(seeded_order(task, a, b));
        } catch (const UnparseableJudgment& e) {
            throw JudgeUnavailable(e.what());
        }
    }

    std::optional<Judgment> j1, j2;
    try {
        j1 = ask(PresentationOrder::AB);
    } catch (const UnparseableJudgment&) {}
    try {
        j2 = ask(PresentationOrder::BA);
    } catch (const UnparseableJudgment&) {}

    if (!j1 && !j2) throw JudgeUnavailable("both presentation orders were unparseable");
    if (j1 && j2) {
        if (j1->predicted == j2->predicted) {
            Judgment out = *j1;
            out.confidence = (j1->confidence + j2->confidence) / 2.0;
            return out;
        }
        // a position-flipping judgment is exactly what the gate must catch
        Judgment out = j2->confidence > j1->confidence ? *j2 : *j1;
        out.confidence = 0.0;
        return out;
    }
    // one order unparseable: keep the parseable winner but abstain
    Judgment out = j1 ? *j1 : *j2;
    out.confidence = 0.0;
    return out;
}

RankingResult Judge::rank_listwise(const TaskSpec& task, const DataReport& report,
                                   const std::vector<SolutionRecord>& sols) const {
    const std::size_t n = sols.size();
    if (n < 2 || n > static_cast<std::size_t>(cfg_.max_list_size))
        throw Error("rank_listwise needs between 2 and " + std::to_string(cfg_.max_list_size) +
                    " solutions, got " + std::to_string(n));

    RankingResult result;
    for (const auto& s : sols) result.win_counts[s.solution_id] = 0;
    if (result.win_counts.size() != n) throw Error("rank_listwise got duplicate solution ids");

    struct Comparison {
        std::size_t i, j;
        std::future<Judgment> fut;
    };
    std::vector<Comparison> comparisons;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            comparisons.push_back(
                {i, j, std::async(std::launch::async, [this, &task, &report, &sols, i, j] {
                     return judge_pair(task, report, sols[i], sols[j]);
                 })});

    std::map<std::string, std::vector<double>> win_confidences;
    for (auto& c : comparisons) {
        try {
            Judgment j = c.fut.get();
            const std::string& winner =
                j.predicted == Side::A ? sols[c.i].solution_id : sols[c.j].solution_id;
            result.win_counts[winner] += 1;
            win_confidences[winner].push_back(j.confidence);
            result.judgments.push_back(std::move(j));
        } catch (const JudgeUnavailable&) {
            // neither side gets the win
        }
    }

    auto mean_win_conf = [&](const std::string& id) {
        auto it = win_confidences.find(id);
        if (it == win_confidences.end() || it->second.empty()) return 0.0;
        double sum = 0;
        for (double c : it->second) sum += c;
        return sum / static_cast<double>(it->second.size());
    };

    for (const auto& s : sols) result.order.push_back(s.solution_id);
    std::sort(result.order.begin(), result.order.end(),
              [&](const std::string& x, const std::string& y) {
                  int wx = result.win_counts.at(x), wy = result.win_counts.at(y);
                  if (wx != wy) return wx > wy;
                  double cx = mean_win_conf(x), cy = mean_win_conf(y);
                  if (cx != cy) return cx > cy;
                  return x < y;
              });
    return result;
}

}  // namespace mlpref::judge
