#pragma once
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlpref/core/types.hpp"
#include "mlpref/sandbox/sandbox.hpp"

namespace mlpref::agent {

enum class NodeStatus { proposed, judged_winner, judged_pruned, executing, executed, failed };

const std::string& to_string(NodeStatus v);
NodeStatus node_status_from_string(const std::string& s);

struct SearchNode {
    SolutionRecord record;
    NodeStatus status = NodeStatus::proposed;
    std::vector<Judgment> judgment_trace;
    std::optional<sandbox::ExecutionResult> exec;
    int round = 0;  // 0 = initial draft phase
};

struct Ledger {
    double generation_s = 0;
    double judge_s = 0;
    double execution_s = 0;
    double total() const { return generation_s + judge_s + execution_s; }
};

// Append-only event log at <dir>/nodes.jsonl, flushed per event so a
// killed process never loses acknowledged state.
//
// Recovery works by re-derivation: the search loop is deterministic
// given a replayable transport and executor, so a resumed run replays
// the same event sequence. Events that match the on-disk prefix are
// verified byte-for-byte instead of rewritten; divergence means the
// journal does not belong to this configuration and raises
// JournalCorrupt.
class Journal {
  public:
    Journal() = default;
    Journal(const Journal&) = delete;
    Journal& operator=(const Journal&) = delete;
    Journal(Journal&&) noexcept;
    Journal& operator=(Journal&&) noexcept;
    ~Journal();

    static Journal open(const std::filesystem::path& dir, const TaskSpec& task,
                        std::optional<int> crash_after_writes = {});

    void add_node(const SolutionRecord& record, int round);
    void set_status(const std::string& solution_id, NodeStatus status,
                    const std::optional<sandbox::ExecutionResult>& exec = {});
    void add_judgment(const std::string& champion_id, const std::string& challenger_id, int round,
                      const Judgment& judgment);

    const std::vector<SearchNode>& nodes() const { return nodes_; }
    const SearchNode& node(const std::string& solution_id) const;
    bool has_node(const std::string& solution_id) const;

    // Execution result recorded by a previous (interrupted) run for this
    // node, if any; lets resume skip re-running the sandbox.
    std::optional<sandbox::ExecutionResult> recorded_exec(const std::string& solution_id) const;

    // Best executed node by canonical val score, earliest on ties.
    std::optional<std::string> incumbent(MetricDirection direction) const;

    const std::filesystem::path& dir() const { return dir_; }
    const TaskSpec& task() const { return task_; }
    Ledger& ledger() { return ledger_; }
    const Ledger& ledger() const { return ledger_; }

    int total_events() const { return static_cast<int>(next_); }
    int replayed_events() const { return replayed_; }

  private:
    void append(const json& event);
    void apply(const json& event);

    std::filesystem::path dir_;
    TaskSpec task_;
    std::vector<std::string> existing_;  // loaded prefix
    std::size_t next_ = 0;
    int replayed_ = 0;
    std::FILE* out_ = nullptr;
    std::optional<int> crash_after_writes_;
    int writes_ = 0;

    std::vector<SearchNode> nodes_;
    std::map<std::string, std::size_t> index_;
    std::map<std::string, sandbox::ExecutionResult> recorded_;
    Ledger ledger_;
};

}  // namespace mlpref::agent
