#include "mlpref/core/score.hpp"

#include <cmath>

#include "mlpref/core/error.hpp"

namespace mlpref {

double canonical_score(const Score& s) {
    if (!std::isfinite(s.value)) throw InvalidScore("score value must be finite");
    return s.direction == MetricDirection::maximize ? s.value : -s.value;
}

Verdict ground_truth_winner(const SolutionRecord& a, const SolutionRecord& b,
                            MetricDirection direction, double tie_eps) {
    if (a.task_id != b.task_id)
        throw TaskMismatch("cannot compare solutions from different tasks: " + a.task_id + " vs " +
                           b.task_id);
    if (!a.test_score || !b.test_score)
        throw MissingGroundTruth("both solutions need a test_score: " + a.solution_id + " vs " +
                                 b.solution_id);
    double ca = canonical_score({*a.test_score, direction});
    double cb = canonical_score({*b.test_score, direction});
    if (std::fabs(ca - cb) <= tie_eps) return Verdict::Ambiguous;
    return ca > cb ? Verdict::A : Verdict::B;
}

}  // namespace mlpref
