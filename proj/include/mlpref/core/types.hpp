#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mlpref {

using json = nlohmann::json;

enum class MetricDirection { maximize, minimize };
enum class Domain { CV, NLP, DataScience, Other };
enum class Difficulty { Easy, Medium, Hard };
enum class Stage { draft, debug, improve };
enum class AlgoEra { traditional, modern, unknown };
enum class Side { A, B };
enum class Granularity { cross_algo, self_comparison };
enum class PresentationOrder { AB, BA };
enum class RepLevel { code_only, raw_data, numerical_stats, verbal_report, context_mismatch };

const std::string& to_string(MetricDirection v);
const std::string& to_string(Domain v);
const std::string& to_string(Difficulty v);
const std::string& to_string(Stage v);
const std::string& to_string(AlgoEra v);
const std::string& to_string(Side v);
const std::string& to_string(Granularity v);
const std::string& to_string(PresentationOrder v);
const std::string& to_string(RepLevel v);

template <typename E>
E enum_from_string(const std::string& s);

struct StrataTags {
    Domain domain = Domain::Other;
    Difficulty difficulty = Difficulty::Medium;
    std::string paradigm;  // nonempty

    bool operator==(const StrataTags&) const = default;
};

struct TaskSpec {
    std::string task_id;
    std::string instruction;
    std::string data_dir;
    std::string metric_name;
    MetricDirection metric_direction = MetricDirection::maximize;
    std::vector<std::string> masked_paths;  // globs relative to data_dir
    StrataTags strata;

    bool operator==(const TaskSpec&) const = default;
};

struct Score {
    double value = 0.0;
    MetricDirection direction = MetricDirection::maximize;

    bool operator==(const Score&) const = default;
};

struct ComplexityScore {
    int code_engineering = 1;  // 1..10
    int model_arch = 1;        // 1..10
    int data_pipeline = 1;     // 1..10
    std::string reasoning;
    int aggregate = 3;  // sum of the three dimensions

    bool operator==(const ComplexityScore&) const = default;
};

struct SolutionRecord {
    std::string solution_id;
    std::string task_id;
    std::string code;
    std::optional<std::string> parent_id;
    Stage stage = Stage::draft;
    std::optional<double> val_score;
    std::optional<double> test_score;
    std::vector<std::string> algo_tags;
    AlgoEra algo_era = AlgoEra::unknown;
    std::optional<ComplexityScore> complexity;
    std::int64_t created_at = 0;  // per-task monotonic counter

    // first tag, or "" when untagged
    std::string primary_tag() const { return algo_tags.empty() ? std::string{} : algo_tags.front(); }

    bool operator==(const SolutionRecord&) const = default;
};

struct PreferencePair {
    std::string pair_id;
    std::string task_id;
    std::string sol_a;
    std::string sol_b;
    Side winner = Side::A;  // ground truth by canonical test score
    StrataTags strata;
    Granularity granularity = Granularity::self_comparison;
    std::optional<double> complexity_gap;

    bool operator==(const PreferencePair&) const = default;
};

struct Judgment {
    std::string reasoning;
    Side predicted = Side::A;
    double confidence = 0.5;  // in [0,1]
    PresentationOrder presentation_order = PresentationOrder::AB;
    std::string raw_response;
    RepLevel representation_level = RepLevel::code_only;

    bool operator==(const Judgment&) const = default;
};

struct DataReport {
    std::string task_id;
    RepLevel level = RepLevel::code_only;
    std::string body;
    std::optional<std::string> script_hash;
    std::optional<std::string> log_hash;
    bool verified = false;
    std::vector<std::string> sections;  // verbal_report: the four required headings

    bool operator==(const DataReport&) const = default;
};

// Required verbal-report headings, in order.
const std::vector<std::string>& report_headings();

void to_json(json& j, const StrataTags& v);
void from_json(const json& j, StrataTags& v);
void to_json(json& j, const TaskSpec& v);
void from_json(const json& j, TaskSpec& v);
void to_json(json& j, const Score& v);
void from_json(const json& j, Score& v);
void to_json(json& j, const ComplexityScore& v);
void from_json(const json& j, ComplexityScore& v);
void to_json(json& j, const SolutionRecord& v);
void from_json(const json& j, SolutionRecord& v);
void to_json(json& j, const PreferencePair& v);
void from_json(const json& j, PreferencePair& v);
void to_json(json& j, const Judgment& v);
void from_json(const json& j, Judgment& v);
void to_json(json& j, const DataReport& v);
void from_json(const json& j, DataReport& v);

// Invariant checks; throw InvalidRecord on violation.
void validate(const TaskSpec& t);
void validate(const SolutionRecord& s);
void validate(const PreferencePair& p);
void validate(const Judgment& j);
void validate(const ComplexityScore& c);
void validate(const DataReport& r);

}  // namespace mlpref
