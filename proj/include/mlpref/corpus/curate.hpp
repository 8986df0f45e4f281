#pragma once
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mlpref/core/score.hpp"
#include "mlpref/core/types.hpp"

namespace mlpref::corpus {

struct PositionBalance {
    int winner_first = 0;
    int winner_second = 0;
};

struct CurationReport {
    int ingested = 0;
    int deduped = 0;  // records removed as duplicates
    int capped = 0;   // records removed by the per-method cap
    int pairs_raw = 0;
    int pairs_ambiguous_dropped = 0;
    int pairs_final = 0;
    std::map<std::string, PositionBalance> position_balance;  // bucket -> counts
};

void to_json(json& j, const CurationReport& v);
void from_json(const json& j, CurationReport& v);

struct CurationConfig {
    int cap = 5;  // per algorithm family per task
    std::uint64_t seed = 0;
    double tie_eps = kTieEpsilon;
};

using TagKey = std::function<std::string(const SolutionRecord&)>;
TagKey primary_tag_key();

// Drops records whose whitespace-normalized code collides with an
// earlier record of the same task; first by created_at survives.
std::vector<SolutionRecord> dedup(const std::vector<SolutionRecord>& sols);

// Per task, keeps at most `cap` records per method tag via seeded
// sampling; survivors keep journal order.
std::vector<SolutionRecord> cap_per_method(const std::vector<SolutionRecord>& sols, int cap,
                                           std::uint64_t seed, const TagKey& tag_key = primary_tag_key());

struct InstantiateResult {
    std::vector<PreferencePair> pairs;
    int raw = 0;
    int ambiguous_dropped = 0;
};

// All C(n,2) combinations for one task; ambiguous pairs dropped.
InstantiateResult instantiate_pairs(
    const std::vector<SolutionRecord>& sols, const TaskSpec& task, double tie_eps = kTieEpsilon,
    const std::map<std::string, ComplexityScore>* scores = nullptr);

struct BalanceResult {
    std::vector<PreferencePair> pairs;  // sorted by pair_id
    std::map<std::string, PositionBalance> position_balance;
};

// Within each (task, strata) bucket: seeded shuffle, then alternate the
// slot holding the ground-truth winner, so per-bucket imbalance <= 1.
// The assignment depends only on (seed, bucket, pair ids), which makes
// re-balancing balanced output a no-op.
BalanceResult balance_positions(std::vector<PreferencePair> pairs, std::uint64_t seed);

struct CurationOutput {
    std::vector<PreferencePair> pairs;
    CurationReport report;
};

// Full pipeline: dedup -> cap -> exhaustive pairing -> ambiguity filter
// -> position balancing. Tasks must cover every record's task_id.
CurationOutput curate(const std::vector<SolutionRecord>& sols, const std::vector<TaskSpec>& tasks,
                      const CurationConfig& cfg);

}  // namespace mlpref::corpus
