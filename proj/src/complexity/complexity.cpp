#include "mlpref/complexity/complexity.hpp"

#include <cmath>
#include <fstream>

#include "mlpref/core/error.hpp"
#include "mlpref/core/hash.hpp"
#include "mlpref/core/jsonl.hpp"
#include "mlpref/core/jsonutil.hpp"

namespace mlpref::complexity {

std::optional<ComplexityScore> parse_complexity_reply(const std::string& text) {
    auto extracted = last_json_object(text, [](const json& j) {
        return j.contains("code_engineering_score") && j.contains("model_arch_score") &&
               j.contains("data_pipeline_score");
    });
    if (!extracted) return std::nullopt;
    const json& j = extracted->value;
    auto dim = [&](const char* key) -> std::optional<int> {
        if (!j.at(key).is_number_integer()) return std::nullopt;
        int v = j.at(key).get<int>();
        if (v < 1 || v > 10) return std::nullopt;
        return v;
    };
    auto ce = dim("code_engineering_score");
    auto ma = dim("model_arch_score");
    auto dp = dim("data_pipeline_score");
    if (!ce || !ma || !dp) return std::nullopt;
    ComplexityScore score;
    score.code_engineering = *ce;
    score.model_arch = *ma;
    score.data_pipeline = *dp;
    score.reasoning = j.value("reasoning", std::string{});
    score.aggregate = *ce + *ma + *dp;
    return score;
}

Scorer::Scorer(llm::Gateway& gateway, const prompts::Library& prompts, ComplexityConfig cfg)
    : gateway_(gateway), prompts_(prompts), cfg_(std::move(cfg)) {
    load_cache();
}

void Scorer::load_cache() {
    if (cfg_.cache_file.empty() || !std::filesystem::exists(cfg_.cache_file)) return;
    std::ifstream in(cfg_.cache_file);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        cache_[j.at("code_hash").get<std::string>()] = j.at("score").get<ComplexityScore>();
    }
}

void Scorer::persist(const std::string& code_hash, const ComplexityScore& score) {
    if (cfg_.cache_file.empty()) return;
    if (cfg_.cache_file.has_parent_path())
        std::filesystem::create_directories(cfg_.cache_file.parent_path());
    std::ofstream out(cfg_.cache_file, std::ios::app);
    out << json{{"code_hash", code_hash}, {"score", score}}.dump() << '\n';
}

ComplexityScore Scorer::score(const SolutionRecord& sol) {
    std::string code_hash = content_hash(sol.code);
    {
        std::lock_guard lock(mu_);
        auto it = cache_.find(code_hash);
        if (it != cache_.end()) return it->second;
    }

    llm::ChatRequest req = prompts_.request("complexity", {{"code_snippet", sol.code}});
    req.model_id = cfg_.model_id;
    req.temperature = cfg_.temperature;
    req.max_tokens = cfg_.max_tokens;

    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
        llm::ChatResponse resp = gateway_.complete(req);
        auto parsed = parse_complexity_reply(resp.text);
        if (parsed) {
            std::lock_guard lock(mu_);
            auto [it, inserted] = cache_.emplace(code_hash, *parsed);
            if (inserted) persist(code_hash, *parsed);
            return it->second;
        }
    }
    throw ComplexityUnavailable("no valid complexity reply for solution " + sol.solution_id);
}

std::map<std::string, ComplexityScore> Scorer::score_all(const std::vector<SolutionRecord>& sols) {
    std::map<std::string, ComplexityScore> out;
    for (const auto& s : sols) out[s.solution_id] = score(s);
    return out;
}

HeuristicOutcome heuristic_predict(const ComplexityScore& a, const ComplexityScore& b) {
    if (a.aggregate > b.aggregate) return HeuristicOutcome::A;
    if (b.aggregate > a.aggregate) return HeuristicOutcome::B;
    return HeuristicOutcome::Tie;
}

HeuristicOutcome heuristic_predict(const PreferencePair& pair,
                                   const std::map<std::string, ComplexityScore>& scores) {
    auto a = scores.find(pair.sol_a);
    auto b = scores.find(pair.sol_b);
    if (a == scores.end() || b == scores.end())
        throw MissingComplexity("pair " + pair.pair_id + " has an unscored side");
    return heuristic_predict(a->second, b->second);
}

std::size_t gap_bucket_index(double gap, const std::vector<double>& edges) {
    if (edges.empty()) throw Error("gap buckets need at least one edge");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (edges[i] <= edges[i - 1]) throw Error("gap bucket edges must be strictly increasing");
    if (gap < edges.front()) throw Error("gap below first bucket edge");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (gap < edges[i]) return i - 1;
    return edges.size() - 1;  // open-ended last bucket
}

std::string gap_bucket_label(std::size_t index, const std::vector<double>& edges) {
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", v);
        return std::string(buf);
    };
    if (index + 1 < edges.size())
        return "[" + fmt(edges[index]) + "," + fmt(edges[index + 1]) + ")";
    return "[" + fmt(edges[index]) + ",inf)";
}

std::map<std::size_t, std::vector<PreferencePair>> gap_buckets(
    const std::vector<PreferencePair>& pairs, const std::map<std::string, ComplexityScore>& scores,
    const std::vector<double>& edges) {
    std::map<std::size_t, std::vector<PreferencePair>> out;
    for (const auto& p : pairs) {
        auto a = scores.find(p.sol_a);
        auto b = scores.find(p.sol_b);
        if (a == scores.end() || b == scores.end())
            throw MissingComplexity("pair " + p.pair_id + " has an unscored side");
        double gap = std::fabs(static_cast<double>(a->second.aggregate) -
                               static_cast<double>(b->second.aggregate));
        out[gap_bucket_index(gap, edges)].push_back(p);
    }
    return out;
}

}  // namespace mlpref::complexity
