#pragma once
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mlpref/core/types.hpp"

namespace mlpref::sandbox {

struct SandboxConfig {
    std::string cmd_template = "python3 {script}";  // {script} -> script filename
    double timeout_s = 3600;                        // solutions run for hours; tests override
    std::size_t stdout_budget = 64 * 1024;
    std::size_t stderr_budget = 64 * 1024;
    double grace_s = 2.0;  // supervisor kill grace
    bool keep_workdir = false;
};

struct ExecutionResult {
    int exit_code = -1;  // 128+signal when killed
    std::string stdout_text;
    std::string stderr_text;
    double wall_time_s = 0.0;
    bool timed_out = false;
    bool stdout_truncated = false;
    bool stderr_truncated = false;
    std::optional<Score> extracted_val_score;

    bool ok() const { return exit_code == 0 && !timed_out; }
    bool operator==(const ExecutionResult&) const = default;
};

void to_json(json& j, const ExecutionResult& v);
void from_json(const json& j, ExecutionResult& v);

// Runs a shell command in an isolated working copy of data_dir. Paths
// matching `denied` are never materialized in the copy, so reads fail at
// runtime and nothing can leak. The process tree is killed at timeout;
// streams are captured up to their budgets (a marker flags truncation).
// Throws SandboxError on spawn failure only.
ExecutionResult run(const std::string& cmd_template, const std::filesystem::path& workdir,
                    double timeout_s, const std::vector<std::string>& denied,
                    const SandboxConfig& cfg = {});

// Writes script_text into the working copy and substitutes {script} in
// the command template before running.
ExecutionResult run_script(const std::string& script_text, const std::filesystem::path& data_dir,
                           const std::vector<std::string>& denied, const SandboxConfig& cfg = {});

// Last match wins (the final epoch's validation metric). The pattern
// needs exactly one numeric capture group. Throws ExtractionError.
std::optional<Score> extract_val_score(const std::string& stdout_text, const std::string& pattern,
                                       MetricDirection direction);

}  // namespace mlpref::sandbox
