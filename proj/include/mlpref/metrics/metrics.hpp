#pragma once
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlpref/core/score.hpp"
#include "mlpref/core/types.hpp"

namespace mlpref::metrics {

enum class Predicted { A, B, Tie };

// One judged (or heuristic-scored) pair with its stratification labels.
struct PairOutcome {
    Side truth = Side::A;
    Predicted predicted = Predicted::A;
    double confidence = 0.5;
    StrataTags strata;
    Granularity granularity = Granularity::self_comparison;
    std::string era = "mixed";       // traditional / modern / mixed
    std::string gap_bucket;          // complexity-gap bucket label, "" when unscored
};

// 1 for a correct call, 0.5 for a tie outcome, 0 otherwise.
double outcome_credit(const PairOutcome& o);

struct StratumStats {
    double correct = 0;
    int total = 0;
    double acc() const { return total ? correct / total : 0.0; }
};

struct StratifiedAccuracy {
    double overall = 0;  // micro: pooled correct / pooled total
    double correct = 0;
    int total = 0;
    int skipped = 0;  // pairs excluded for missing ground truth
    std::map<std::pair<std::string, std::string>, StratumStats> by_stratum;
    int runs = 1;
    double stdev = 0;  // sample stdev of per-run overall accuracy
};

StratifiedAccuracy pairwise_accuracy(const std::vector<PairOutcome>& outcomes);
StratifiedAccuracy pairwise_accuracy(const std::vector<std::vector<PairOutcome>>& runs);

struct CalibrationBin {
    double lo = 0;
    double hi = 0;
    int count = 0;
    double accuracy = 0;
    double mean_confidence = 0;
};

struct CalibrationTable {
    std::vector<CalibrationBin> bins;  // partition of [0,1]
};

// n_bins equal-width bins over [0,1]; the last bin includes 1.0.
CalibrationTable calibration(const std::vector<PairOutcome>& outcomes, int n_bins);
CalibrationTable calibration(const std::vector<PairOutcome>& outcomes,
                             const std::vector<double>& edges);
// Catch-all [0,0.5) plus n equal bins over [0.5,1.0]: chosen-side
// confidence rarely drops below 0.5.
std::vector<double> confidence_edges(int bins_above_half);
std::vector<double> default_confidence_edges();  // confidence_edges(5)

// rho = 1 - 6*sum(d^2) / (n(n^2-1)); both lists must be permutations of
// the same ids, n >= 2. Throws RankMismatch.
double spearman(const std::vector<std::string>& rank_pred, const std::vector<std::string>& rank_true);

// 1 iff the first k positions match in order; nullopt when k >= n.
std::optional<int> accuracy_at_k(const std::vector<std::string>& rank_pred,
                                 const std::vector<std::string>& rank_true, int k);

// Both-score observation for the validation-vs-test agreement rate.
struct ScoredPairObs {
    double val_a = 0, val_b = 0;
    double test_a = 0, test_b = 0;
    MetricDirection direction = MetricDirection::maximize;
};

struct GapResult {
    double accuracy = 0;  // test winner predicted by val winner
    int compared = 0;
    int val_ties = 0;
    int test_ties = 0;
};

GapResult validation_test_gap(const std::vector<ScoredPairObs>& pairs, double tie_eps = kTieEpsilon);

// Fraction of leaderboard entries strictly worse than the agent in
// canonical space; nullopt on an empty board.
std::optional<double> beat_ratio(const Score& agent_score, const std::vector<double>& leaderboard,
                                 MetricDirection board_direction);

// Canonical (val, test) of one executed node, in execution order.
struct ScorePoint {
    double val = 0;
    double test = 0;
};

struct Consistency {
    double value = 0;
    int used = 0;
    int ties_excluded = 0;
};

// Sign agreement of val/test deltas over consecutive executed steps.
std::optional<Consistency> evolution_consistency(const std::vector<ScorePoint>& journal,
                                                 double tie_eps = kTieEpsilon);
// Concordance of val/test orderings over all executed-node pairs.
std::optional<Consistency> global_pairwise_consistency(const std::vector<ScorePoint>& journal,
                                                       double tie_eps = kTieEpsilon);

}  // namespace mlpref::metrics
