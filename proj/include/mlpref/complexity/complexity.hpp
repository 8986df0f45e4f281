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

namespace mlpref::complexity {

struct ComplexityConfig {
    std::string model_id = "default";
    double temperature = 1.0;
    int max_tokens = 2048;
    int retries = 2;                       // re-asks on malformed or out-of-range replies
    std::filesystem::path cache_file;      // optional JSONL persistence keyed by code hash
};

// Three-dimension complexity scoring via one model call per distinct
// code body. Scores are cached by code hash, in memory and optionally
// on disk.
class Scorer {
  public:
    Scorer(llm::Gateway& gateway, const prompts::Library& prompts, ComplexityConfig cfg = {});

    // Throws ComplexityUnavailable after retries are exhausted.
    ComplexityScore score(const SolutionRecord& sol);

    std::map<std::string, ComplexityScore> score_all(const std::vector<SolutionRecord>& sols);

  private:
    llm::Gateway& gateway_;
    const prompts::Library& prompts_;
    ComplexityConfig cfg_;
    std::mutex mu_;
    std::map<std::string, ComplexityScore> cache_;  // code hash -> score

    void load_cache();
    void persist(const std::string& code_hash, const ComplexityScore& score);
};

// Parses the scoring reply; nullopt when malformed or out of range.
std::optional<ComplexityScore> parse_complexity_reply(const std::string& text);

enum class HeuristicOutcome { A, B, Tie };

// "Complex is better": the side with the strictly larger aggregate.
HeuristicOutcome heuristic_predict(const ComplexityScore& a, const ComplexityScore& b);
// Throws MissingComplexity when either side is unscored.
HeuristicOutcome heuristic_predict(const PreferencePair& pair,
                                   const std::map<std::string, ComplexityScore>& scores);

// Half-open buckets [e_i, e_{i+1}) with the last bucket open-ended.
// Edges must be strictly increasing.
std::size_t gap_bucket_index(double gap, const std::vector<double>& edges);
std::string gap_bucket_label(std::size_t index, const std::vector<double>& edges);
std::map<std::size_t, std::vector<PreferencePair>> gap_buckets(
    const std::vector<PreferencePair>& pairs, const std::map<std::string, ComplexityScore>& scores,
    const std::vector<double>& edges);

}  // namespace mlpref::complexity
