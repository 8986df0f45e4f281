#pragma once
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mlpref/core/types.hpp"
#include "mlpref/llm/gateway.hpp"
#include "mlpref/prompts/library.hpp"
#include "mlpref/sandbox/sandbox.hpp"

namespace mlpref::report {

struct ProfilingLog {
    std::string task_id;
    std::string script;
    std::string script_hash;
    std::string log;  // captured stdout, truncated to budget
    std::string log_hash;
    int exit_code = -1;
    bool verified = false;  // exit 0, within timeout
    bool timed_out = false;
    bool truncated = false;
    double wall_time_s = 0;
};

void to_json(json& j, const ProfilingLog& v);
void from_json(const json& j, ProfilingLog& v);

struct ReportConfig {
    int raw_records_per_file = 20;           // raw_data excerpt: lines per file
    std::size_t raw_bytes_per_file = 4096;   // ... or bytes, whichever first
    std::size_t log_budget = 64 * 1024;
    double profiling_timeout_s = 300;
    int leakage_regen_attempts = 2;
    int verbalize_retries = 2;
    std::string model_id = "default";
    double temperature = 1.0;
    int max_tokens = 8192;
    std::string cmd_template = "python3 {script}";
    // best-effort screens, from the prompt's own bans
    std::vector<std::string> model_name_keywords;  // empty -> defaults
    std::vector<std::string> training_keywords;    // empty -> defaults
};

std::vector<std::string> default_model_name_keywords();
std::vector<std::string> default_training_keywords();

// Static scan: does the script mention a masked path (the glob literal,
// a matching relative path, or a matching basename)?
bool script_references_masked(const std::string& script, const TaskSpec& task,
                              std::string* offending = nullptr);

// Heuristic scan for "use/choose/recommend <model>" sentences.
bool names_recommended_model(const std::string& body, const std::vector<std::string>& keywords,
                             std::string* sentence = nullptr);

// First-K-records excerpt of every readable (non-masked) data file.
std::string raw_data_excerpt(const TaskSpec& task, const ReportConfig& cfg);

// The Profile -> Verify -> Verbalize pipeline plus the ablation
// representation levels. Scripts, logs and reports are cached under the
// artifacts directory; recomputation with unchanged inputs makes zero
// gateway calls.
class ReportBuilder {
  public:
    ReportBuilder(llm::Gateway& gateway, const prompts::Library& prompts, ReportConfig cfg,
                  std::filesystem::path artifacts_dir, std::vector<TaskSpec> corpus);

    // One generation call; rejects scripts referencing masked paths with
    // up to leakage_regen_attempts regenerations, then LeakageRejected.
    // Unusable completions -> ScriptInvalid.
    std::string generate_profiling_script(const TaskSpec& task);

    // Runs the script in the sandbox with masked paths unreadable.
    // Always returns the captured log; verified=false on failure.
    ProfilingLog execute_and_verify(const std::string& script, const TaskSpec& task);

    // Requires a verified log. Validates the four headings and the
    // no-model-recommendation screen; retries then ReportMalformed.
    DataReport verbalize(const ProfilingLog& log, const TaskSpec& task);

    DataReport make_representation(const TaskSpec& task, RepLevel level);

    const std::vector<std::string>& review_log() const { return review_log_; }

  private:
    const TaskSpec& ring_next(const TaskSpec& task) const;
    std::string cached_script(const TaskSpec& task);
    ProfilingLog cached_log(const TaskSpec& task, const std::string& script);
    std::optional<DataReport> load_report(const std::string& task_id, RepLevel level,
                                          const std::string& script_hash) const;
    void store_report(const DataReport& report) const;

    llm::Gateway& gateway_;
    const prompts::Library& prompts_;
    ReportConfig cfg_;
    std::filesystem::path artifacts_;
    std::vector<TaskSpec> corpus_;  // sorted by task_id
    std::mutex mu_;
    std::vector<std::string> review_log_;
};

// Throws ProfilingTimeout / ProfilingFailed when the log cannot back a
// verified report.
void require_verified(const ProfilingLog& log);

}  // namespace mlpref::report
