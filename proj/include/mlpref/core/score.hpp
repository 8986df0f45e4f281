#pragma once
#include "mlpref/core/types.hpp"

namespace mlpref {

// Scores within this absolute distance (in canonical space) are treated
// as ties and the pair is ambiguous. Leaderboard metrics are O(1), so an
// absolute epsilon removes float noise without a relative scheme.
inline constexpr double kTieEpsilon = 1e-9;

// Maps a score into higher-is-better space. Throws InvalidScore on
// non-finite values.
double canonical_score(const Score& s);

enum class Verdict { A, B, Ambiguous };

// Winner by strictly greater canonical test score; Ambiguous within
// tie_eps. Throws MissingGroundTruth / TaskMismatch.
Verdict ground_truth_winner(const SolutionRecord& a, const SolutionRecord& b,
                            MetricDirection direction, double tie_eps = kTieEpsilon);

}  // namespace mlpref
