#include "mlpref/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mlpref/core/error.hpp"

namespace mlpref::metrics {

double outcome_credit(const PairOutcome& o) {
    if (o.predicted == Predicted::Tie) return 0.5;
    bool said_a = o.predicted == Predicted::A;
    return (said_a == (o.truth == Side::A)) ? 1.0 : 0.0;
}

namespace {

void accumulate(StratifiedAccuracy& acc, const PairOutcome& o) {
    double credit = outcome_credit(o);
    acc.correct += credit;
    acc.total += 1;
    auto bump = [&](const std::string& dim, const std::string& value) {
        auto& s = acc.by_stratum[{dim, value}];
        s.correct += credit;
        s.total += 1;
    };
    bump("domain", to_string(o.strata.domain));
    bump("difficulty", to_string(o.strata.difficulty));
    bump("paradigm", o.strata.paradigm);
    bump("era", o.era);
    bump("granularity", to_string(o.granularity));
    if (!o.gap_bucket.empty()) bump("gap", o.gap_bucket);
}

}  // namespace

StratifiedAccuracy pairwise_accuracy(const std::vector<PairOutcome>& outcomes) {
    StratifiedAccuracy acc;
    for (const auto& o : outcomes) accumulate(acc, o);
    acc.overall = acc.total ? acc.correct / acc.total : 0.0;
    return acc;
}

StratifiedAccuracy pairwise_accuracy(const std::vector<std::vector<PairOutcome>>& runs) {
    StratifiedAccuracy acc;
    std::vector<double> per_run;
    for (const auto& run : runs) {
        StratifiedAccuracy one = pairwise_accuracy(run);
        per_run.push_back(one.overall);
        for (const auto& o : run) accumulate(acc, o);
    }
    acc.overall = acc.total ? acc.correct / acc.total : 0.0;
    acc.runs = static_cast<int>(runs.size());
    if (per_run.size() >= 2) {
        double mean = 0;
        for (double v : per_run) mean += v;
        mean /= per_run.size();
        double ss = 0;
        for (double v : per_run) ss += (v - mean) * (v - mean);
        acc.stdev = std::sqrt(ss / (per_run.size() - 1));
    }
    return acc;
}

CalibrationTable calibration(const std::vector<PairOutcome>& outcomes,
                             const std::vector<double>& edges) {
    if (edges.size() < 2) throw Error("calibration needs at least two bin edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (edges[i] <= edges[i - 1]) throw Error("calibration edges must be strictly increasing");

    CalibrationTable table;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        table.bins.push_back(CalibrationBin{edges[i], edges[i + 1], 0, 0, 0});

    for (const auto& o : outcomes) {
        std::size_t idx = table.bins.size() - 1;  // confidences at the top edge land last
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            if (o.confidence >= edges[i] && o.confidence < edges[i + 1]) {
                idx = i;
                break;
            }
        }
        auto& bin = table.bins[idx];
        bin.count += 1;
        bin.accuracy += outcome_credit(o);
        bin.mean_confidence += o.confidence;
    }
    for (auto& bin : table.bins) {
        if (bin.count) {
            bin.accuracy /= bin.count;
            bin.mean_confidence /= bin.count;
        }
    }
    return table;
}

CalibrationTable calibration(const std::vector<PairOutcome>& outcomes, int n_bins) {
    if (n_bins < 2) throw Error("calibration needs n_bins >= 2");
    std::vector<double> edges;
    for (int i = 0; i <= n_bins; ++i) edges.push_back(static_cast<double>(i) / n_bins);
    return calibration(outcomes, edges);
}

std::vector<double> confidence_edges(int bins_above_half) {
    if (bins_above_half < 1) throw Error("calibration needs at least one bin above 0.5");
    std::vector<double> edges{0.0};
    for (int i = 0; i <= bins_above_half; ++i)
        edges.push_back(0.5 + 0.5 * static_cast<double>(i) / bins_above_half);
    return edges;
}

std::vector<double> default_confidence_edges() { return confidence_edges(5); }

double spearman(const std::vector<std::string>& rank_pred,
                const std::vector<std::string>& rank_true) {
    const std::size_t n = rank_pred.size();
    if (n != rank_true.size())
        throw RankMismatch("ranking lengths differ: " + std::to_string(n) + " vs " +
                           std::to_string(rank_true.size()));
    if (n < 2) throw RankMismatch("rankings need at least two entries");

    std::unordered_map<std::string, std::size_t> true_rank;
    for (std::size_t i = 0; i < n; ++i) true_rank[rank_true[i]] = i;
    if (true_rank.size() != n) throw RankMismatch("rank_true contains duplicate ids");

    double sum_d2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto it = true_rank.find(rank_pred[i]);
        if (it == true_rank.end())
            throw RankMismatch("rankings are not permutations of the same ids: " + rank_pred[i]);
        double d = static_cast<double>(i) - static_cast<double>(it->second);
        sum_d2 += d * d;
        true_rank.erase(it);  // also catches duplicates in rank_pred
    }
    double dn = static_cast<double>(n);
    return 1.0 - 6.0 * sum_d2 / (dn * (dn * dn - 1.0));
}

std::optional<int> accuracy_at_k(const std::vector<std::string>& rank_pred,
                                 const std::vector<std::string>& rank_true, int k) {
    if (rank_pred.size() != rank_true.size())
        throw RankMismatch("ranking lengths differ");
    if (k < 1) throw RankMismatch("k must be >= 1");
    if (static_cast<std::size_t>(k) >= rank_pred.size()) return std::nullopt;
    for (int i = 0; i < k; ++i)
        if (rank_pred[static_cast<std::size_t>(i)] != rank_true[static_cast<std::size_t>(i)]) return 0;
    return 1;
}

GapResult validation_test_gap(const std::vector<ScoredPairObs>& pairs, double tie_eps) {
    GapResult out;
    double correct = 0;
    for (const auto& p : pairs) {
        double va = canonical_score({p.val_a, p.direction});
        double vb = canonical_score({p.val_b, p.direction});
        double ta = canonical_score({p.test_a, p.direction});
        double tb = canonical_score({p.test_b, p.direction});
        if (std::fabs(va - vb) <= tie_eps) {
            ++out.val_ties;
            continue;
        }
        if (std::fabs(ta - tb) <= tie_eps) {
            ++out.test_ties;
            continue;
        }
        ++out.compared;
        if ((va > vb) == (ta > tb)) correct += 1;
    }
    out.accuracy = out.compared ? correct / out.compared : 0.0;
    return out;
}

std::optional<double> beat_ratio(const Score& agent_score, const std::vector<double>& leaderboard,
                                 MetricDirection board_direction) {
    if (leaderboard.empty()) return std::nullopt;
    double agent = canonical_score(agent_score);
    std::size_t beaten = 0;
    for (double entry : leaderboard)
        if (canonical_score({entry, board_direction}) < agent) ++beaten;
    return static_cast<double>(beaten) / static_cast<double>(leaderboard.size());
}

std::optional<Consistency> evolution_consistency(const std::vector<ScorePoint>& journal,
                                                 double tie_eps) {
    if (journal.size() < 2) return std::nullopt;
    Consistency c;
    double consistent = 0;
    for (std::size_t i = 0; i + 1 < journal.size(); ++i) {
        double dv = journal[i + 1].val - journal[i].val;
        double dt = journal[i + 1].test - journal[i].test;
        if (std::fabs(dv) <= tie_eps || std::fabs(dt) <= tie_eps) {
            ++c.ties_excluded;
            continue;
        }
        ++c.used;
        if ((dv > 0) == (dt > 0)) consistent += 1;
    }
    if (c.used == 0) return std::nullopt;
    c.value = consistent / c.used;
    return c;
}

std::optional<Consistency> global_pairwise_consistency(const std::vector<ScorePoint>& journal,
                                                       double tie_eps) {
    if (journal.size() < 2) return std::nullopt;
    Consistency c;
    double concordant = 0;
    for (std::size_t i = 0; i < journal.size(); ++i) {
        for (std::size_t j = i + 1; j < journal.size(); ++j) {
            double dv = journal[j].val - journal[i].val;
            double dt = journal[j].test - journal[i].test;
            if (std::fabs(dv) <= tie_eps || std::fabs(dt) <= tie_eps) {
                ++c.ties_excluded;
                continue;
            }
            ++c.used;
            if ((dv > 0) == (dt > 0)) concordant += 1;
        }
    }
    if (c.used == 0) return std::nullopt;
    c.value = concordant / c.used;
    return c;
}

}  // namespace mlpref::metrics
