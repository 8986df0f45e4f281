#include "mlpref/corpus/curate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "mlpref/core/error.hpp"
#include "mlpref/core/hash.hpp"
#include "mlpref/core/rand.hpp"
#include "mlpref/core/text.hpp"

namespace mlpref::corpus {

void to_json(json& j, const CurationReport& v) {
    json balance = json::object();
    for (const auto& [bucket, counts] : v.position_balance)
        balance[bucket] = json{{"winner_first", counts.winner_first},
                               {"winner_second", counts.winner_second}};
    j = json{{"ingested", v.ingested},
             {"deduped", v.deduped},
             {"capped", v.capped},
             {"pairs_raw", v.pairs_raw},
             {"pairs_ambiguous_dropped", v.pairs_ambiguous_dropped},
             {"pairs_final", v.pairs_final},
             {"position_balance", balance}};
}

void from_json(const json& j, CurationReport& v) {
    v.ingested = j.at("ingested").get<int>();
    v.deduped = j.at("deduped").get<int>();
    v.capped = j.at("capped").get<int>();
    v.pairs_raw = j.at("pairs_raw").get<int>();
    v.pairs_ambiguous_dropped = j.at("pairs_ambiguous_dropped").get<int>();
    v.pairs_final = j.at("pairs_final").get<int>();
    v.position_balance.clear();
    for (const auto& [bucket, counts] : j.at("position_balance").items())
        v.position_balance[bucket] = PositionBalance{counts.at("winner_first").get<int>(),
                                                     counts.at("winner_second").get<int>()};
}

TagKey primary_tag_key() {
    return [](const SolutionRecord& s) { return s.primary_tag(); };
}

namespace {

std::vector<SolutionRecord> sorted_by_journal(std::vector<SolutionRecord> sols) {
    std::stable_sort(sols.begin(), sols.end(), [](const SolutionRecord& a, const SolutionRecord& b) {
        if (a.task_id != b.task_id) return a.task_id < b.task_id;
        if (a.created_at != b.created_at) return a.created_at < b.created_at;
        return a.solution_id < b.solution_id;
    });
    return sols;
}

std::string strata_bucket(const PreferencePair& p) {
    return p.task_id + "|" + to_string(p.strata.domain) + "|" + to_string(p.strata.difficulty) +
           "|" + p.strata.paradigm;
}

std::optional<double> record_aggregate(const SolutionRecord& s,
                                       const std::map<std::string, ComplexityScore>* scores) {
    if (s.complexity) return static_cast<double>(s.complexity->aggregate);
    if (scores) {
        auto it = scores->find(s.solution_id);
        if (it != scores->end()) return static_cast<double>(it->second.aggregate);
    }
    return std::nullopt;
}

}  // namespace

std::vector<SolutionRecord> dedup(const std::vector<SolutionRecord>& sols) {
    auto ordered = sorted_by_journal(sols);
    std::unordered_set<std::string> seen;
    std::vector<SolutionRecord> out;
    out.reserve(ordered.size());
    for (auto& s : ordered) {
        std::string key = s.task_id + "\x1f" + content_hash(normalize_whitespace(s.code));
        if (seen.insert(std::move(key)).second) out.push_back(std::move(s));
    }
    return out;
}

std::vector<SolutionRecord> cap_per_method(const std::vector<SolutionRecord>& sols, int cap,
                                           std::uint64_t seed, const TagKey& tag_key) {
    if (cap < 1) throw Error("cap_per_method requires cap >= 1");
    auto ordered = sorted_by_journal(sols);

    std::map<std::string, std::vector<std::size_t>> groups;  // (task, tag) -> indices
    for (std::size_t i = 0; i < ordered.size(); ++i)
        groups[ordered[i].task_id + "\x1f" + tag_key(ordered[i])].push_back(i);

    std::vector<bool> keep(ordered.size(), true);
    for (const auto& [key, indices] : groups) {
        if (indices.size() <= static_cast<std::size_t>(cap)) continue;
        std::vector<std::size_t> pool = indices;
        std::mt19937_64 eng(derive_seed(seed, "cap\x1f" + key));
        deterministic_shuffle(pool, eng);
        for (std::size_t i = static_cast<std::size_t>(cap); i < pool.size(); ++i)
            keep[pool[i]] = false;
    }

    std::vector<SolutionRecord> out;
    for (std::size_t i = 0; i < ordered.size(); ++i)
        if (keep[i]) out.push_back(ordered[i]);
    return out;
}

InstantiateResult instantiate_pairs(const std::vector<SolutionRecord>& sols, const TaskSpec& task,
                                    double tie_eps,
                                    const std::map<std::string, ComplexityScore>* scores) {
    InstantiateResult out;
    auto ordered = sorted_by_journal(sols);
    for (const auto& s : ordered) {
        if (s.task_id != task.task_id)
            throw TaskMismatch("record " + s.solution_id + " does not belong to " + task.task_id);
        if (!s.test_score)
            throw MissingGroundTruth("record lacks test_score: " + s.solution_id);
    }

    for (std::size_t i = 0; i < ordered.size(); ++i) {
        for (std::size_t j = i + 1; j < ordered.size(); ++j) {
            const auto& a = ordered[i];
            const auto& b = ordered[j];
            ++out.raw;
            Verdict verdict = ground_truth_winner(a, b, task.metric_direction, tie_eps);
            if (verdict == Verdict::Ambiguous) {
                ++out.ambiguous_dropped;
                continue;
            }
            PreferencePair p;
            p.pair_id = task.task_id + ":" + a.solution_id + ":" + b.solution_id;
            p.task_id = task.task_id;
            p.sol_a = a.solution_id;
            p.sol_b = b.solution_id;
            p.winner = verdict == Verdict::A ? Side::A : Side::B;
            p.strata = task.strata;
            std::string tag_a = a.primary_tag();
            std::string tag_b = b.primary_tag();
            p.granularity = (!tag_a.empty() && !tag_b.empty() && tag_a != tag_b)
                                ? Granularity::cross_algo
                                : Granularity::self_comparison;
            auto agg_a = record_aggregate(a, scores);
            auto agg_b = record_aggregate(b, scores);
            if (agg_a && agg_b) p.complexity_gap = std::fabs(*agg_a - *agg_b);
            out.pairs.push_back(std::move(p));
        }
    }
    return out;
}

BalanceResult balance_positions(std::vector<PreferencePair> pairs, std::uint64_t seed) {
    std::map<std::string, std::vector<PreferencePair*>> buckets;
    for (auto& p : pairs) buckets[strata_bucket(p)].push_back(&p);

    BalanceResult out;
    for (auto& [bucket, members] : buckets) {
        std::sort(members.begin(), members.end(),
                  [](const PreferencePair* a, const PreferencePair* b) { return a->pair_id < b->pair_id; });
        std::mt19937_64 eng(derive_seed(seed, "balance\x1f" + bucket));
        deterministic_shuffle(members, eng);

        auto& tally = out.position_balance[bucket];
        for (std::size_t pos = 0; pos < members.size(); ++pos) {
            PreferencePair& p = *members[pos];
            bool want_first = pos % 2 == 0;  // winner in slot A on even positions
            bool is_first = p.winner == Side::A;
            if (is_first != want_first) {
                std::swap(p.sol_a, p.sol_b);
                p.winner = p.winner == Side::A ? Side::B : Side::A;
            }
            (want_first ? tally.winner_first : tally.winner_second) += 1;
        }
    }

    std::sort(pairs.begin(), pairs.end(),
              [](const PreferencePair& a, const PreferencePair& b) { return a.pair_id < b.pair_id; });
    out.pairs = std::move(pairs);
    return out;
}

CurationOutput curate(const std::vector<SolutionRecord>& sols, const std::vector<TaskSpec>& tasks,
                      const CurationConfig& cfg) {
    std::map<std::string, const TaskSpec*> by_id;
    for (const auto& t : tasks) {
        validate(t);
        if (!by_id.emplace(t.task_id, &t).second)
            throw InvalidRecord("duplicate task_id in corpus: " + t.task_id);
    }
    for (const auto& s : sols) {
        validate(s);
        if (!by_id.count(s.task_id))
            throw TaskMismatch("record " + s.solution_id + " references unknown task " + s.task_id);
    }

    CurationOutput out;
    out.report.ingested = static_cast<int>(sols.size());

    auto unique = dedup(sols);
    out.report.deduped = out.report.ingested - static_cast<int>(unique.size());

    auto sampled = cap_per_method(unique, cfg.cap, cfg.seed);
    out.report.capped = static_cast<int>(unique.size()) - static_cast<int>(sampled.size());

    std::map<std::string, std::vector<SolutionRecord>> per_task;
    for (auto& s : sampled) per_task[s.task_id].push_back(std::move(s));

    std::vector<PreferencePair> all_pairs;
    for (const auto& [task_id, records] : per_task) {
        auto inst = instantiate_pairs(records, *by_id.at(task_id), cfg.tie_eps);
        out.report.pairs_raw += inst.raw;
        out.report.pairs_ambiguous_dropped += inst.ambiguous_dropped;
        all_pairs.insert(all_pairs.end(), inst.pairs.begin(), inst.pairs.end());
    }

    auto balanced = balance_positions(std::move(all_pairs), cfg.seed);
    out.report.pairs_final = static_cast<int>(balanced.pairs.size());
    out.report.position_balance = std::move(balanced.position_balance);
    out.pairs = std::move(balanced.pairs);

    if (out.report.pairs_final != out.report.pairs_raw - out.report.pairs_ambiguous_dropped)
        throw Error("curation count identity violated");
    return out;
}

}  // namespace mlpref::corpus
