#include <doctest.h>

#include "mlpref/complexity/complexity.hpp"
#include "mlpref/core/error.hpp"
#include "mlpref/corpus/curate.hpp"
#include "mlpref/metrics/metrics.hpp"

#include "testutil.hpp"

using namespace mlpref;
using namespace mlpref::complexity;
using testutil::make_solution;
using testutil::make_task;

namespace {

std::string reply(int ce, int ma, int dp) {
    return "{\"code_engineering_score\": " + std::to_string(ce) +
           ", \"model_arch_score\": " + std::to_string(ma) +
           ", \"data_pipeline_score\": " + std::to_string(dp) +
           ", \"reasoning\": \"summary\"}";
}

prompts::Library& lib() {
    static prompts::Library instance = prompts::Library::open_default();
    return instance;
}

}  // namespace

TEST_CASE("parse_complexity_reply happy path sums the aggregate") {
    auto s = parse_complexity_reply("Scores below.\n" + reply(3, 5, 7));
    REQUIRE(s.has_value());
    CHECK(s->aggregate == 15);
    CHECK(s->code_engineering == 3);
    CHECK(s->reasoning == "summary");
    validate(*s);
}

TEST_CASE("parse_complexity_reply rejects out-of-range and malformed replies") {
    CHECK_FALSE(parse_complexity_reply(reply(11, 5, 5)).has_value());
    CHECK_FALSE(parse_complexity_reply(reply(0, 5, 5)).has_value());
    CHECK_FALSE(parse_complexity_reply("{\"code_engineering_score\": 3}").has_value());
    CHECK_FALSE(parse_complexity_reply("no json at all").has_value());
    CHECK_FALSE(parse_complexity_reply(
                    "{\"code_engineering_score\": 3.7, \"model_arch_score\": 5, "
                    "\"data_pipeline_score\": 5}")
                    .has_value());
}

TEST_CASE("scorer caches by code hash") {
    auto transport = std::make_shared<llm::ScriptedTransport>(
        [](const llm::ChatRequest&) { return reply(3, 5, 7); });
    llm::Gateway gw(transport);
    Scorer scorer(gw, lib());

    auto a = make_solution("t", "a", 0.1);
    auto b = make_solution("t", "b", 0.2);
    b.code = a.code;  // identical code, different id
    ComplexityScore sa = scorer.score(a);
    ComplexityScore sb = scorer.score(b);
    CHECK(sa == sb);
    CHECK(transport->calls() == 1);  // one gateway call for identical code

    auto c = make_solution("t", "c", 0.3);
    c.code = "entirely different";
    scorer.score(c);
    CHECK(transport->calls() == 2);
}

TEST_CASE("scorer persists its cache across instances") {
    testutil::TempDir tmp;
    ComplexityConfig cfg;
    cfg.cache_file = tmp.path() / "scores_cache.jsonl";
    auto transport = std::make_shared<llm::ScriptedTransport>(
        [](const llm::ChatRequest&) { return reply(2, 2, 2); });
    llm::Gateway gw(transport);
    auto sol = make_solution("t", "a", 0.1);
    {
        Scorer first(gw, lib(), cfg);
        first.score(sol);
    }
    CHECK(transport->calls() == 1);
    Scorer second(gw, lib(), cfg);
    CHECK(second.score(sol).aggregate == 6);
    CHECK(transport->calls() == 1);  // served from disk
}

TEST_CASE("invalid replies retry then fail") {
    int calls = 0;
    auto transport = std::make_shared<llm::ScriptedTransport>([&](const llm::ChatRequest&) {
        ++calls;
        return reply(11, 5, 5);  // always out of range
    });
    llm::Gateway gw(transport);
    ComplexityConfig cfg;
    cfg.retries = 2;
    Scorer scorer(gw, lib(), cfg);
    CHECK_THROWS_AS(scorer.score(make_solution("t", "a", 0.1)), ComplexityUnavailable);
    CHECK(calls == 3);  // initial + 2 retries
}

TEST_CASE("a bad first reply recovers on retry") {
    int calls = 0;
    auto transport = std::make_shared<llm::ScriptedTransport>([&](const llm::ChatRequest&) {
        ++calls;
        return calls == 1 ? "garbage" : reply(4, 4, 4);
    });
    llm::Gateway gw(transport);
    Scorer scorer(gw, lib());
    CHECK(scorer.score(make_solution("t", "a", 0.1)).aggregate == 12);
    CHECK(calls == 2);
}

TEST_CASE("heuristic_predict picks the larger aggregate") {
    ComplexityScore low{3, 5, 7, "", 15};
    ComplexityScore high{7, 7, 7, "", 21};
    CHECK(heuristic_predict(low, high) == HeuristicOutcome::B);
    CHECK(heuristic_predict(high, low) == HeuristicOutcome::A);
    ComplexityScore same{6, 6, 6, "", 18};
    CHECK(heuristic_predict(same, same) == HeuristicOutcome::Tie);
}

TEST_CASE("heuristic_predict is antisymmetric and scale-free") {
    std::mt19937_64 eng(13);
    for (int i = 0; i < 100; ++i) {
        auto dim = [&] { return 1 + static_cast<int>(eng() % 10); };
        ComplexityScore a{dim(), dim(), dim(), "", 0};
        a.aggregate = a.code_engineering + a.model_arch + a.data_pipeline;
        ComplexityScore b{dim(), dim(), dim(), "", 0};
        b.aggregate = b.code_engineering + b.model_arch + b.data_pipeline;
        auto ab = heuristic_predict(a, b);
        auto ba = heuristic_predict(b, a);
        if (ab == HeuristicOutcome::Tie) {
            CHECK(ba == HeuristicOutcome::Tie);
        } else {
            CHECK(ab == (ba == HeuristicOutcome::A ? HeuristicOutcome::B : HeuristicOutcome::A));
        }
        // only the sign of the aggregate difference matters
        int diff = a.aggregate - b.aggregate;
        CHECK(ab == (diff > 0   ? HeuristicOutcome::A
                     : diff < 0 ? HeuristicOutcome::B
                                : HeuristicOutcome::Tie));
    }
}

TEST_CASE("heuristic_predict requires both sides scored") {
    PreferencePair p;
    p.pair_id = "t:a:b";
    p.sol_a = "a";
    p.sol_b = "b";
    std::map<std::string, ComplexityScore> scores{{"a", ComplexityScore{3, 3, 3, "", 9}}};
    CHECK_THROWS_AS(heuristic_predict(p, scores), MissingComplexity);
}

TEST_CASE("gap buckets partition pairs over half-open edges") {
    std::vector<double> edges{0, 3, 6};
    CHECK(gap_bucket_index(0, edges) == 0);
    CHECK(gap_bucket_index(2.9, edges) == 0);
    CHECK(gap_bucket_index(3, edges) == 1);
    CHECK(gap_bucket_index(6, edges) == 2);  // third bucket, open-ended
    CHECK(gap_bucket_index(42, edges) == 2);
    CHECK(gap_bucket_label(0, edges) == "[0,3)");
    CHECK(gap_bucket_label(2, edges) == "[6,inf)");
    CHECK_THROWS_AS(gap_bucket_index(1, {3, 3}), Error);
}

TEST_CASE("gap bucket sizes sum to the pair count") {
    auto task = make_task("t");
    std::vector<SolutionRecord> sols;
    std::map<std::string, ComplexityScore> scores;
    std::mt19937_64 eng(77);
    for (int i = 0; i < 12; ++i) {
        auto s = make_solution("t", "s" + std::to_string(i), 0.01 * i, "", i);
        sols.push_back(s);
        int ce = 1 + static_cast<int>(eng() % 10);
        int ma = 1 + static_cast<int>(eng() % 10);
        int dp = 1 + static_cast<int>(eng() % 10);
        scores[s.solution_id] = ComplexityScore{ce, ma, dp, "", ce + ma + dp};
    }
    auto pairs = corpus::instantiate_pairs(sols, task).pairs;
    auto buckets = gap_buckets(pairs, scores, {0, 3, 6});
    std::size_t total = 0;
    for (const auto& [_, members] : buckets) total += members.size();
    CHECK(total == pairs.size());
}

TEST_CASE("heuristic accuracy drops below chance on an anti-correlated corpus") {
    // constructed corpus: simpler solutions always score better
    auto task = make_task("t");
    std::vector<SolutionRecord> sols;
    std::map<std::string, ComplexityScore> scores;
    for (int i = 0; i < 10; ++i) {
        auto s = make_solution("t", "s" + std::to_string(i), 1.0 - 0.05 * i, "", i);
        sols.push_back(s);
        int d = 1 + i;  // complexity rises as quality falls
        scores[s.solution_id] = ComplexityScore{d, d, d, "", 3 * d};
    }
    auto pairs = corpus::instantiate_pairs(sols, task).pairs;
    double correct = 0;
    for (const auto& p : pairs) {
        auto h = heuristic_predict(p, scores);
        if (h == HeuristicOutcome::Tie)
            correct += 0.5;
        else if ((h == HeuristicOutcome::A) == (p.winner == Side::A))
            correct += 1.0;
    }
    CHECK(correct / pairs.size() < 0.5);
}
