#include "mlpref/core/types.hpp"

#include <array>
#include <cmath>

#include "mlpref/core/error.hpp"

namespace mlpref {

namespace {

template <typename E, std::size_t N>
const std::string& lookup(const std::array<std::string, N>& names, E v) {
    auto i = static_cast<std::size_t>(v);
    if (i >= N) throw ParseError("enum value out of range");
    return names[i];
}

template <typename E, std::size_t N>
E reverse_lookup(const std::array<std::string, N>& names, const std::string& s, const char* what) {
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == s) return static_cast<E>(i);
    throw ParseError(std::string("unknown ") + what + ": '" + s + "'");
}

const std::array<std::string, 2> kDirection{"maximize", "minimize"};
const std::array<std::string, 4> kDomain{"CV", "NLP", "DataScience", "Other"};
const std::array<std::string, 3> kDifficulty{"Easy", "Medium", "Hard"};
const std::array<std::string, 3> kStage{"draft", "debug", "improve"};
const std::array<std::string, 3> kEra{"traditional", "modern", "unknown"};
const std::array<std::string, 2> kSide{"A", "B"};
const std::array<std::string, 2> kGranularity{"cross_algo", "self_comparison"};
const std::array<std::string, 2> kOrder{"AB", "BA"};
const std::array<std::string, 5> kLevel{"code_only", "raw_data", "numerical_stats",
                                        "verbal_report", "context_mismatch"};

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
    if (j.contains(key) && !j.at(key).is_null())
        v = j.at(key).get<T>();
    else
        v.reset();
}

}  // namespace

const std::string& to_string(MetricDirection v) { return lookup(kDirection, v); }
const std::string& to_string(Domain v) { return lookup(kDomain, v); }
const std::string& to_string(Difficulty v) { return lookup(kDifficulty, v); }
const std::string& to_string(Stage v) { return lookup(kStage, v); }
const std::string& to_string(AlgoEra v) { return lookup(kEra, v); }
const std::string& to_string(Side v) { return lookup(kSide, v); }
const std::string& to_string(Granularity v) { return lookup(kGranularity, v); }
const std::string& to_string(PresentationOrder v) { return lookup(kOrder, v); }
const std::string& to_string(RepLevel v) { return lookup(kLevel, v); }

template <>
MetricDirection enum_from_string(const std::string& s) {
    return reverse_lookup<MetricDirection>(kDirection, s, "metric_direction");
}
template <>
Domain enum_from_string(const std::string& s) {
    return reverse_lookup<Domain>(kDomain, s, "domain");
}
template <>
Difficulty enum_from_string(const std::string& s) {
    return reverse_lookup<Difficulty>(kDifficulty, s, "difficulty");
}
template <>
Stage enum_from_string(const std::string& s) {
    return reverse_lookup<Stage>(kStage, s, "stage");
}
template <>
AlgoEra enum_from_string(const std::string& s) {
    return reverse_lookup<AlgoEra>(kEra, s, "algo_era");
}
template <>
Side enum_from_string(const std::string& s) {
    return reverse_lookup<Side>(kSide, s, "side");
}
template <>
Granularity enum_from_string(const std::string& s) {
    return reverse_lookup<Granularity>(kGranularity, s, "granularity");
}
template <>
PresentationOrder enum_from_string(const std::string& s) {
    return reverse_lookup<PresentationOrder>(kOrder, s, "presentation_order");
}
template <>
RepLevel enum_from_string(const std::string& s) {
    return reverse_lookup<RepLevel>(kLevel, s, "representation_level");
}

const std::vector<std::string>& report_headings() {
    static const std::vector<std::string> h{"## Data Overview", "## Key Statistical Findings",
                                            "## Implications for Model Design", "## Summary"};
    return h;
}

void to_json(json& j, const StrataTags& v) {
    j = json{{"domain", to_string(v.domain)},
             {"difficulty", to_string(v.difficulty)},
             {"paradigm", v.paradigm}};
}

void from_json(const json& j, StrataTags& v) {
    v.domain = enum_from_string<Domain>(j.at("domain").get<std::string>());
    v.difficulty = enum_from_string<Difficulty>(j.at("difficulty").get<std::string>());
    v.paradigm = j.at("paradigm").get<std::string>();
}

void to_json(json& j, const TaskSpec& v) {
    j = json{{"task_id", v.task_id},
             {"instruction", v.instruction},
             {"data_dir", v.data_dir},
             {"metric_name", v.metric_name},
             {"metric_direction", to_string(v.metric_direction)},
             {"masked_paths", v.masked_paths},
             {"strata", v.strata}};
}

void from_json(const json& j, TaskSpec& v) {
    v.task_id = j.at("task_id").get<std::string>();
    v.instruction = j.at("instruction").get<std::string>();
    v.data_dir = j.at("data_dir").get<std::string>();
    v.metric_name = j.at("metric_name").get<std::string>();
    v.metric_direction = enum_from_string<MetricDirection>(j.at("metric_direction").get<std::string>());
    v.masked_paths = j.value("masked_paths", std::vector<std::string>{});
    v.strata = j.at("strata").get<StrataTags>();
}

void to_json(json& j, const Score& v) {
    j = json{{"value", v.value}, {"direction", to_string(v.direction)}};
}

void from_json(const json& j, Score& v) {
    v.value = j.at("value").get<double>();
    v.direction = enum_from_string<MetricDirection>(j.at("direction").get<std::string>());
}

void to_json(json& j, const ComplexityScore& v) {
    j = json{{"code_engineering", v.code_engineering},
             {"model_arch", v.model_arch},
             {"data_pipeline", v.data_pipeline},
             {"reasoning", v.reasoning},
             {"aggregate", v.aggregate}};
}

void from_json(const json& j, ComplexityScore& v) {
    v.code_engineering = j.at("code_engineering").get<int>();
    v.model_arch = j.at("model_arch").get<int>();
    v.data_pipeline = j.at("data_pipeline").get<int>();
    v.reasoning = j.value("reasoning", std::string{});
    v.aggregate = j.at("aggregate").get<int>();
}

void to_json(json& j, const SolutionRecord& v) {
    j = json{{"solution_id", v.solution_id},
             {"task_id", v.task_id},
             {"code", v.code},
             {"stage", to_string(v.stage)},
             {"algo_tags", v.algo_tags},
             {"algo_era", to_string(v.algo_era)},
             {"created_at", v.created_at}};
    put_optional(j, "parent_id", v.parent_id);
    put_optional(j, "val_score", v.val_score);
    put_optional(j, "test_score", v.test_score);
    put_optional(j, "complexity", v.complexity);
}

void from_json(const json& j, SolutionRecord& v) {
    v.solution_id = j.at("solution_id").get<std::string>();
    v.task_id = j.at("task_id").get<std::string>();
    v.code = j.at("code").get<std::string>();
    v.stage = enum_from_string<Stage>(j.value("stage", std::string{"draft"}));
    v.algo_tags = j.value("algo_tags", std::vector<std::string>{});
    v.algo_era = enum_from_string<AlgoEra>(j.value("algo_era", std::string{"unknown"}));
    v.created_at = j.value("created_at", std::int64_t{0});
    get_optional(j, "parent_id", v.parent_id);
    get_optional(j, "val_score", v.val_score);
    get_optional(j, "test_score", v.test_score);
    get_optional(j, "complexity", v.complexity);
}

void to_json(json& j, const PreferencePair& v) {
    j = json{{"pair_id", v.pair_id},
             {"task_id", v.task_id},
             {"sol_a", v.sol_a},
             {"sol_b", v.sol_b},
             {"winner", to_string(v.winner)},
             {"strata", v.strata},
             {"granularity", to_string(v.granularity)}};
    put_optional(j, "complexity_gap", v.complexity_gap);
}

void from_json(const json& j, PreferencePair& v) {
    v.pair_id = j.at("pair_id").get<std::string>();
    v.task_id = j.at("task_id").get<std::string>();
    v.sol_a = j.at("sol_a").get<std::string>();
    v.sol_b = j.at("sol_b").get<std::string>();
    v.winner = enum_from_string<Side>(j.at("winner").get<std::string>());
    v.strata = j.at("strata").get<StrataTags>();
    v.granularity = enum_from_string<Granularity>(j.value("granularity", std::string{"self_comparison"}));
    get_optional(j, "complexity_gap", v.complexity_gap);
}

void to_json(json& j, const Judgment& v) {
    j = json{{"reasoning", v.reasoning},
             {"predicted", to_string(v.predicted)},
             {"confidence", v.confidence},
             {"presentation_order", to_string(v.presentation_order)},
             {"raw_response", v.raw_response},
             {"representation_level", to_string(v.representation_level)}};
}

void from_json(const json& j, Judgment& v) {
    v.reasoning = j.at("reasoning").get<std::string>();
    v.predicted = enum_from_string<Side>(j.at("predicted").get<std::string>());
    v.confidence = j.at("confidence").get<double>();
    v.presentation_order = enum_from_string<PresentationOrder>(j.at("presentation_order").get<std::string>());
    v.raw_response = j.value("raw_response", std::string{});
    v.representation_level = enum_from_string<RepLevel>(j.at("representation_level").get<std::string>());
}

void to_json(json& j, const DataReport& v) {
    j = json{{"task_id", v.task_id},
             {"level", to_string(v.level)},
             {"body", v.body},
             {"verified", v.verified},
             {"sections", v.sections}};
    put_optional(j, "script_hash", v.script_hash);
    put_optional(j, "log_hash", v.log_hash);
}

void from_json(const json& j, DataReport& v) {
    v.task_id = j.at("task_id").get<std::string>();
    v.level = enum_from_string<RepLevel>(j.at("level").get<std::string>());
    v.body = j.at("body").get<std::string>();
    v.verified = j.value("verified", false);
    v.sections = j.value("sections", std::vector<std::string>{});
    get_optional(j, "script_hash", v.script_hash);
    get_optional(j, "log_hash", v.log_hash);
}

void validate(const TaskSpec& t) {
    if (t.task_id.empty()) throw InvalidRecord("task_id must be nonempty");
    if (t.strata.paradigm.empty()) throw InvalidRecord("strata.paradigm must be nonempty");
}

void validate(const SolutionRecord& s) {
    if (s.solution_id.empty()) throw InvalidRecord("solution_id must be nonempty");
    if (s.code.empty()) throw InvalidRecord("solution code must be nonempty: " + s.solution_id);
    if (s.val_score && !std::isfinite(*s.val_score))
        throw InvalidRecord("val_score must be finite: " + s.solution_id);
    if (s.test_score && !std::isfinite(*s.test_score))
        throw InvalidRecord("test_score must be finite: " + s.solution_id);
    if (s.complexity) validate(*s.complexity);
}

void validate(const PreferencePair& p) {
    if (p.sol_a == p.sol_b) throw InvalidRecord("pair must reference two distinct solutions: " + p.pair_id);
    if (p.strata.paradigm.empty()) throw InvalidRecord("pair strata.paradigm must be nonempty: " + p.pair_id);
}

void validate(const Judgment& j) {
    if (j.confidence < 0.0 || j.confidence > 1.0)
        throw InvalidRecord("confidence must lie in [0,1]");
}

void validate(const ComplexityScore& c) {
    auto in_range = [](int v) { return v >= 1 && v <= 10; };
    if (!in_range(c.code_engineering) || !in_range(c.model_arch) || !in_range(c.data_pipeline))
        throw InvalidRecord("complexity dimensions must lie in [1,10]");
    if (c.aggregate != c.code_engineering + c.model_arch + c.data_pipeline)
        throw InvalidRecord("complexity aggregate must equal the sum of dimensions");
}

void validate(const DataReport& r) {
    if (r.level == RepLevel::verbal_report) {
        for (const auto& h : report_headings())
            if (r.body.find(h) == std::string::npos)
                throw InvalidRecord("verbal report missing heading: " + h);
    }
    if (r.verified && (!r.script_hash || !r.log_hash))
        throw InvalidRecord("verified report requires script_hash and log_hash");
}

}  // namespace mlpref
