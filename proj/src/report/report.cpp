#include "mlpref/report/report.hpp"

#include <algorithm>
#include <cctype>

#include "mlpref/core/error.hpp"
#include "mlpref/core/glob.hpp"
#include "mlpref/core/hash.hpp"
#include "mlpref/core/jsonl.hpp"
#include "mlpref/core/text.hpp"

namespace mlpref::report {

namespace fs = std::filesystem;

void to_json(json& j, const ProfilingLog& v) {
    j = json{{"task_id", v.task_id},     {"script", v.script},
             {"script_hash", v.script_hash}, {"log", v.log},
             {"log_hash", v.log_hash},   {"exit_code", v.exit_code},
             {"verified", v.verified},   {"timed_out", v.timed_out},
             {"truncated", v.truncated}, {"wall_time_s", v.wall_time_s}};
}

void from_json(const json& j, ProfilingLog& v) {
    v.task_id = j.at("task_id").get<std::string>();
    v.script = j.at("script").get<std::string>();
    v.script_hash = j.at("script_hash").get<std::string>();
    v.log = j.at("log").get<std::string>();
    v.log_hash = j.at("log_hash").get<std::string>();
    v.exit_code = j.at("exit_code").get<int>();
    v.verified = j.at("verified").get<bool>();
    v.timed_out = j.at("timed_out").get<bool>();
    v.truncated = j.at("truncated").get<bool>();
    v.wall_time_s = j.at("wall_time_s").get<double>();
}

std::vector<std::string> default_model_name_keywords() {
    return {"lightgbm", "xgboost",     "catboost",   "random forest", "resnet",  "efficientnet",
            "transformer", "bert',",   "bert",       "roberta",       "deberta", "cnn",
            "lstm",        "gru",      "u-net",      "unet",          "svm",     "logistic regression",
            "gradient boosting",       "mlp",        "vit"};
}

std::vector<std::string> default_training_keywords() {
    return {".fit(", "model.train(", "RandomForest", "GradientBoosting", "xgb.train",
            "lgb.train", "optimizer.step", "backward()"};
}

bool script_references_masked(const std::string& script, const TaskSpec& task,
                              std::string* offending) {
    auto hit = [&](const std::string& needle) {
        if (needle.empty()) return false;
        if (script.find(needle) == std::string::npos) return false;
        if (offending) *offending = needle;
        return true;
    };
    for (const auto& pattern : task.masked_paths) {
        // literal pattern text (covers plain filenames like train_labels.csv)
        std::string stripped = pattern;
        std::erase(stripped, '*');
        std::erase(stripped, '?');
        if (stripped.size() >= 3 && hit(stripped)) return true;
        // expand against the data directory when it exists
        if (!fs::is_directory(task.data_dir)) continue;
        for (auto it = fs::recursive_directory_iterator(task.data_dir);
             it != fs::recursive_directory_iterator(); ++it) {
            if (!it->is_regular_file()) continue;
            fs::path rel = fs::relative(it->path(), task.data_dir);
            if (!matches_any({pattern}, rel.generic_string())) continue;
            if (hit(rel.generic_string()) || hit(rel.filename().string())) return true;
        }
    }
    return false;
}

bool names_recommended_model(const std::string& body, const std::vector<std::string>& keywords,
                             std::string* sentence) {
    static const std::vector<std::string> verbs{"use ",      "uses ",      "using ",
                                                "choose ",   "choosing ",  "recommend",
                                                "prefer ",   "go with ",   "should adopt "};
    std::string lower;
    lower.reserve(body.size());
    for (char c : body) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    std::size_t start = 0;
    while (start < lower.size()) {
        std::size_t end = lower.find_first_of(".!?\n", start);
        if (end == std::string::npos) end = lower.size();
        std::string_view sent(lower.data() + start, end - start);
        bool has_verb = std::any_of(verbs.begin(), verbs.end(), [&](const std::string& v) {
            return sent.find(v) != std::string_view::npos;
        });
        if (has_verb) {
            for (const auto& kw : keywords) {
                if (sent.find(kw) != std::string_view::npos) {
                    if (sentence) *sentence = std::string(body.substr(start, end - start));
                    return true;
                }
            }
        }
        start = end + 1;
    }
    return false;
}

std::string raw_data_excerpt(const TaskSpec& task, const ReportConfig& cfg) {
    if (!fs::is_directory(task.data_dir))
        throw Error("data_dir does not exist: " + task.data_dir);

    std::vector<fs::path> files;
    for (auto it = fs::recursive_directory_iterator(task.data_dir);
         it != fs::recursive_directory_iterator(); ++it) {
        if (!it->is_regular_file()) continue;
        fs::path rel = fs::relative(it->path(), task.data_dir);
        if (matches_any(task.masked_paths, rel.generic_string())) continue;
        files.push_back(rel);
    }
    std::sort(files.begin(), files.end());

    std::string body;
    for (const auto& rel : files) {
        std::string content = read_file(fs::path(task.data_dir) / rel);
        std::string head = content.substr(0, cfg.raw_bytes_per_file);

        std::size_t unprintable = 0;
        for (unsigned char c : head)
            if (c != '\n' && c != '\t' && c != '\r' && (c < 0x20 || c == 0x7f)) ++unprintable;

        body += "=== " + rel.generic_string() + " ===\n";
        if (!head.empty() && unprintable * 10 > head.size() * 3) {
            body += "[binary data: " + std::to_string(content.size()) + " bytes]\n";
            continue;
        }
        int lines = 0;
        std::size_t cut = head.size();
        for (std::size_t i = 0; i < head.size(); ++i) {
            if (head[i] == '\n' && ++lines >= cfg.raw_records_per_file) {
                cut = i + 1;
                break;
            }
        }
        body += head.substr(0, cut);
        if (body.back() != '\n') body += '\n';
    }
    return body;
}

void require_verified(const ProfilingLog& log) {
    if (log.verified) return;
    if (log.timed_out)
        throw ProfilingTimeout("profiling script timed out for task " + log.task_id);
    throw ProfilingFailed("profiling script exited with " + std::to_string(log.exit_code) +
                          " for task " + log.task_id);
}

ReportBuilder::ReportBuilder(llm::Gateway& gateway, const prompts::Library& prompts,
                             ReportConfig cfg, fs::path artifacts_dir, std::vector<TaskSpec> corpus)
    : gateway_(gateway), prompts_(prompts), cfg_(std::move(cfg)), artifacts_(std::move(artifacts_dir)),
      corpus_(std::move(corpus)) {
    if (cfg_.model_name_keywords.empty()) cfg_.model_name_keywords = default_model_name_keywords();
    if (cfg_.training_keywords.empty()) cfg_.training_keywords = default_training_keywords();
    std::sort(corpus_.begin(), corpus_.end(),
              [](const TaskSpec& a, const TaskSpec& b) { return a.task_id < b.task_id; });
    fs::create_directories(artifacts_ / "scripts");
    fs::create_directories(artifacts_ / "logs");
    fs::create_directories(artifacts_ / "reports");
}

const TaskSpec& ReportBuilder::ring_next(const TaskSpec& task) const {
    if (corpus_.size() < 2)
        throw Error("context_mismatch needs a corpus of at least two tasks");
    auto it = std::find_if(corpus_.begin(), corpus_.end(),
                           [&](const TaskSpec& t) { return t.task_id == task.task_id; });
    if (it == corpus_.end()) throw Error("task not registered in corpus: " + task.task_id);
    ++it;
    return it == corpus_.end() ? corpus_.front() : *it;
}

std::string ReportBuilder::generate_profiling_script(const TaskSpec& task) {
    llm::ChatRequest req = prompts_.request(
        "data_analysis_code", {{"task-desc", task.instruction}, {"data-dir", task.data_dir}});
    req.model_id = cfg_.model_id;
    req.temperature = cfg_.temperature;
    req.max_tokens = cfg_.max_tokens;

    std::string offending;
    for (int attempt = 0; attempt <= cfg_.leakage_regen_attempts; ++attempt) {
        llm::ChatResponse resp = gateway_.complete(req);
        std::string script = extract_code_block(resp.text);
        if (script.empty()) throw ScriptInvalid("completion holds no script for " + task.task_id);

        if (script_references_masked(script, task, &offending)) continue;

        for (const auto& kw : cfg_.training_keywords) {
            if (script.find(kw) != std::string::npos) {
                std::lock_guard lock(mu_);
                review_log_.push_back("task " + task.task_id + ": profiling script contains '" +
                                      kw + "' despite the no-training instruction");
                break;
            }
        }
        return script;
    }
    throw LeakageRejected("profiling script for " + task.task_id + " keeps referencing masked path '" +
                          offending + "'");
}

ProfilingLog ReportBuilder::execute_and_verify(const std::string& script, const TaskSpec& task) {
    sandbox::SandboxConfig sbx;
    sbx.cmd_template = cfg_.cmd_template;
    sbx.timeout_s = cfg_.profiling_timeout_s;
    sbx.stdout_budget = cfg_.log_budget;
    sandbox::ExecutionResult result =
        sandbox::run_script(script, task.data_dir, task.masked_paths, sbx);

    ProfilingLog log;
    log.task_id = task.task_id;
    log.script = script;
    log.script_hash = content_hash(script);
    log.log = result.stdout_text;
    log.log_hash = content_hash(log.log);
    log.exit_code = result.exit_code;
    log.timed_out = result.timed_out;
    log.truncated = result.stdout_truncated;
    log.wall_time_s = result.wall_time_s;
    log.verified = result.ok();
    return log;
}

DataReport ReportBuilder::verbalize(const ProfilingLog& log, const TaskSpec& task) {
    require_verified(log);
    if (trim(log.log).empty())
        throw ReportMalformed("nothing to verbalize: empty profiling log for " + task.task_id);

    llm::ChatRequest req = prompts_.request("data_analysis_report",
                                            {{"task", task.task_id},
                                             {"desc-block", task.instruction},
                                             {"analysis-text", log.log}});
    req.model_id = cfg_.model_id;
    req.temperature = cfg_.temperature;
    req.max_tokens = cfg_.max_tokens;

    std::string failure;
    for (int attempt = 0; attempt <= cfg_.verbalize_retries; ++attempt) {
        llm::ChatResponse resp = gateway_.complete(req);
        std::string body = trim(resp.text);

        bool headings_ok = true;
        for (const auto& h : report_headings())
            if (body.find(h) == std::string::npos) {
                headings_ok = false;
                failure = "missing heading " + h;
                break;
            }
        if (!headings_ok) continue;

        std::string sentence;
        if (names_recommended_model(body, cfg_.model_name_keywords, &sentence)) {
            failure = "recommends a model: " + sentence;
            continue;
        }

        DataReport report;
        report.task_id = task.task_id;
        report.level = RepLevel::verbal_report;
        report.body = body;
        report.script_hash = log.script_hash;
        report.log_hash = log.log_hash;
        report.verified = true;
        report.sections = report_headings();
        return report;
    }
    throw ReportMalformed("report generation for " + task.task_id + " failed: " + failure);
}

std::string ReportBuilder::cached_script(const TaskSpec& task) {
    fs::path path = artifacts_ / "scripts" / (task.task_id + ".py");
    {
        std::lock_guard lock(mu_);
        if (fs::exists(path)) return read_file(path);
    }
    std::string script = generate_profiling_script(task);
    std::lock_guard lock(mu_);
    write_file(path, script);
    return script;
}

ProfilingLog ReportBuilder::cached_log(const TaskSpec& task, const std::string& script) {
    std::string script_hash = content_hash(script);
    fs::path path = artifacts_ / "logs" / (task.task_id + "." + script_hash + ".json");
    {
        std::lock_guard lock(mu_);
        if (fs::exists(path)) return json::parse(read_file(path)).get<ProfilingLog>();
    }
    ProfilingLog log = execute_and_verify(script, task);
    std::lock_guard lock(mu_);
    write_file(path, json(log).dump());
    return log;
}

std::optional<DataReport> ReportBuilder::load_report(const std::string& task_id, RepLevel level,
                                                     const std::string& script_hash) const {
    fs::path path =
        artifacts_ / "reports" / (task_id + "." + to_string(level) + "." + script_hash + ".json");
    if (!fs::exists(path)) return std::nullopt;
    return json::parse(read_file(path)).get<DataReport>();
}

void ReportBuilder::store_report(const DataReport& report) const {
    std::string script_hash = report.script_hash.value_or("none");
    fs::path path = artifacts_ / "reports" /
                    (report.task_id + "." + to_string(report.level) + "." + script_hash + ".json");
    write_file(path, json(report).dump());
}

DataReport ReportBuilder::make_representation(const TaskSpec& task, RepLevel level) {
    switch (level) {
        case RepLevel::code_only: {
            DataReport r;
            r.task_id = task.task_id;
            r.level = level;
            return r;
        }
        case RepLevel::raw_data: {
            DataReport r;
            r.task_id = task.task_id;
            r.level = level;
            r.body = raw_data_excerpt(task, cfg_);
            return r;
        }
        case RepLevel::numerical_stats: {
            std::string script = cached_script(task);
            ProfilingLog log = cached_log(task, script);
            require_verified(log);
            DataReport r;
            r.task_id = task.task_id;
            r.level = level;
            r.body = log.log;  // the verified log, verbatim
            r.script_hash = log.script_hash;
            r.log_hash = log.log_hash;
            r.verified = true;
            return r;
        }
        case RepLevel::verbal_report: {
            std::string script = cached_script(task);
            std::string script_hash = content_hash(script);
            if (auto cached = load_report(task.task_id, level, script_hash)) return *cached;
            ProfilingLog log = cached_log(task, script);
            DataReport report = verbalize(log, task);
            store_report(report);
            return report;
        }
        case RepLevel::context_mismatch: {
            const TaskSpec& other = ring_next(task);
            DataReport donor = make_representation(other, RepLevel::verbal_report);
            DataReport r = donor;
            r.task_id = task.task_id;  // used with this task, body from the ring neighbor
            r.level = RepLevel::context_mismatch;
            return r;
        }
    }
    throw Error("unknown representation level");
}

}  // namespace mlpref::report
