#include "mlpref/agent/journal.hpp"

#include <signal.h>
#include <unistd.h>

#include <array>
#include <fstream>

#include "mlpref/core/error.hpp"
#include "mlpref/core/score.hpp"

namespace mlpref::agent {

namespace {
const std::array<std::string, 6> kStatus{"proposed",  "judged_winner", "judged_pruned",
                                         "executing", "executed",      "failed"};
}

const std::string& to_string(NodeStatus v) { return kStatus[static_cast<std::size_t>(v)]; }

NodeStatus node_status_from_string(const std::string& s) {
    for (std::size_t i = 0; i < kStatus.size(); ++i)
        if (kStatus[i] == s) return static_cast<NodeStatus>(i);
    throw ParseError("unknown node status: " + s);
}

Journal::Journal(Journal&& other) noexcept { *this = std::move(other); }

Journal& Journal::operator=(Journal&& other) noexcept {
    if (this != &other) {
        if (out_) std::fclose(out_);
        dir_ = std::move(other.dir_);
        task_ = std::move(other.task_);
        existing_ = std::move(other.existing_);
        next_ = other.next_;
        replayed_ = other.replayed_;
        out_ = other.out_;
        other.out_ = nullptr;
        crash_after_writes_ = other.crash_after_writes_;
        writes_ = other.writes_;
        nodes_ = std::move(other.nodes_);
        index_ = std::move(other.index_);
        recorded_ = std::move(other.recorded_);
        ledger_ = other.ledger_;
    }
    return *this;
}

Journal::~Journal() {
    if (out_) std::fclose(out_);
}

Journal Journal::open(const std::filesystem::path& dir, const TaskSpec& task,
                      std::optional<int> crash_after_writes) {
    Journal j;
    j.dir_ = dir;
    j.task_ = task;
    j.crash_after_writes_ = crash_after_writes;
    std::filesystem::create_directories(dir);

    auto path = dir / "nodes.jsonl";
    if (std::filesystem::exists(path)) {
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            j.existing_.push_back(line);
            json event = json::parse(line);
            if (event.value("e", "") == "status" && event.contains("exec"))
                j.recorded_[event.at("id").get<std::string>()] =
                    event.at("exec").get<sandbox::ExecutionResult>();
        }
    }

    j.out_ = std::fopen(path.c_str(), "ab");
    if (!j.out_) throw Error("cannot open journal for append: " + path.string());
    return j;
}

void Journal::append(const json& event) {
    std::string line = event.dump();
    if (next_ < existing_.size()) {
        if (existing_[next_] != line)
            throw JournalCorrupt("journal " + dir_.string() + " diverges at event " +
                                 std::to_string(next_) + ":\n  on disk: " + existing_[next_] +
                                 "\n  derived: " + line);
        ++next_;
        ++replayed_;
        apply(event);
        return;
    }
    std::fwrite(line.data(), 1, line.size(), out_);
    std::fputc('\n', out_);
    std::fflush(out_);
    ++next_;
    apply(event);
    ++writes_;
    if (crash_after_writes_ && writes_ >= *crash_after_writes_) {
        // test hook: simulate a hard crash exactly at a flush point
        ::kill(::getpid(), SIGKILL);
    }
}

void Journal::apply(const json& event) {
    const std::string kind = event.at("e").get<std::string>();
    if (kind == "node") {
        SearchNode node;
        node.record = event.at("record").get<SolutionRecord>();
        node.round = event.at("round").get<int>();
        index_[node.record.solution_id] = nodes_.size();
        nodes_.push_back(std::move(node));
        return;
    }
    if (kind == "status") {
        auto it = index_.find(event.at("id").get<std::string>());
        if (it == index_.end()) throw JournalCorrupt("status event for unknown node");
        SearchNode& node = nodes_[it->second];
        node.status = node_status_from_string(event.at("status").get<std::string>());
        if (event.contains("exec")) {
            node.exec = event.at("exec").get<sandbox::ExecutionResult>();
            if (node.exec->extracted_val_score)
                node.record.val_score = node.exec->extracted_val_score->value;
        }
        return;
    }
    if (kind == "judgment") {
        Judgment j = event.at("judgment").get<Judgment>();
        for (const char* key : {"a", "b"}) {
            auto it = index_.find(event.at(key).get<std::string>());
            if (it == index_.end()) throw JournalCorrupt("judgment event for unknown node");
            nodes_[it->second].judgment_trace.push_back(j);
        }
        return;
    }
    throw JournalCorrupt("unknown journal event kind: " + kind);
}

void Journal::add_node(const SolutionRecord& record, int round) {
    append(json{{"e", "node"}, {"round", round}, {"record", record}});
}

void Journal::set_status(const std::string& solution_id, NodeStatus status,
                         const std::optional<sandbox::ExecutionResult>& exec) {
    json event{{"e", "status"}, {"id", solution_id}, {"status", to_string(status)}};
    if (exec) event["exec"] = *exec;
    append(event);
}

void Journal::add_judgment(const std::string& champion_id, const std::string& challenger_id,
                           int round, const Judgment& judgment) {
    append(json{{"e", "judgment"},
                {"a", champion_id},
                {"b", challenger_id},
                {"round", round},
                {"judgment", judgment}});
}

const SearchNode& Journal::node(const std::string& solution_id) const {
    auto it = index_.find(solution_id);
    if (it == index_.end()) throw Error("unknown node: " + solution_id);
    return nodes_[it->second];
}

bool Journal::has_node(const std::string& solution_id) const { return index_.count(solution_id) > 0; }

std::optional<sandbox::ExecutionResult> Journal::recorded_exec(const std::string& solution_id) const {
    auto it = recorded_.find(solution_id);
    if (it == recorded_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::string> Journal::incumbent(MetricDirection direction) const {
    std::optional<std::string> best;
    double best_score = 0;
    for (const auto& node : nodes_) {
        if (node.status != NodeStatus::executed || !node.record.val_score) continue;
        double score = canonical_score({*node.record.val_score, direction});
        if (!best || score > best_score) {  // strict: earliest wins ties
            best = node.record.solution_id;
            best_score = score;
        }
    }
    return best;
}

}  // namespace mlpref::agent
