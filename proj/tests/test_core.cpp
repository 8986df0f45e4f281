#include <doctest.h>

#include <random>

#include "mlpref/core/error.hpp"
#include "mlpref/core/glob.hpp"
#include "mlpref/core/hash.hpp"
#include "mlpref/core/jsonl.hpp"
#include "mlpref/core/score.hpp"
#include "mlpref/core/text.hpp"
#include "mlpref/core/types.hpp"

#include "testutil.hpp"

using namespace mlpref;
using testutil::make_solution;

TEST_CASE("canonical_score identity and sign flip") {
    CHECK(canonical_score({0.7, MetricDirection::maximize}) == doctest::Approx(0.7));
    CHECK(canonical_score({0.3, MetricDirection::minimize}) == doctest::Approx(-0.3));
}

TEST_CASE("canonical_score orders minimize metrics best-first") {
    // brute-force oracle: compare both orderings of RMSE 1.2 vs 0.9
    Score worse{1.2, MetricDirection::minimize};
    Score better{0.9, MetricDirection::minimize};
    CHECK(canonical_score(better) > canonical_score(worse));
    CHECK_FALSE(canonical_score(worse) > canonical_score(better));
}

TEST_CASE("canonical_score rejects non-finite values") {
    CHECK_THROWS_AS(canonical_score({std::nan(""), MetricDirection::maximize}), InvalidScore);
    CHECK_THROWS_AS(canonical_score({INFINITY, MetricDirection::minimize}), InvalidScore);
}

TEST_CASE("canonical_score monotone per direction") {
    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> dist(-100, 100);
    for (int i = 0; i < 200; ++i) {
        double a = dist(eng), b = dist(eng);
        if (a == b) continue;
        if (a < b) {
            CHECK(canonical_score({a, MetricDirection::maximize}) <
                  canonical_score({b, MetricDirection::maximize}));
            CHECK(canonical_score({a, MetricDirection::minimize}) >
                  canonical_score({b, MetricDirection::minimize}));
        }
    }
}

TEST_CASE("ground_truth_winner basics") {
    auto a = make_solution("t", "a", 0.90);
    auto b = make_solution("t", "b", 0.80);
    CHECK(ground_truth_winner(a, b, MetricDirection::maximize) == Verdict::A);
    CHECK(ground_truth_winner(b, a, MetricDirection::maximize) == Verdict::B);

    auto c = make_solution("t", "c", 0.5);
    auto d = make_solution("t", "d", 0.5);
    CHECK(ground_truth_winner(c, d, MetricDirection::maximize) == Verdict::Ambiguous);
}

TEST_CASE("ground_truth_winner epsilon boundary") {
    auto a = make_solution("t", "a", 1.0000000001);
    auto b = make_solution("t", "b", 1.0);
    CHECK(ground_truth_winner(a, b, MetricDirection::maximize, 1e-9) == Verdict::Ambiguous);
    // outside epsilon the order is strict
    auto c = make_solution("t", "c", 1.0 + 1e-6);
    CHECK(ground_truth_winner(c, b, MetricDirection::maximize, 1e-9) == Verdict::A);
}

TEST_CASE("ground_truth_winner error paths") {
    auto a = make_solution("t", "a", 0.9);
    auto b = make_solution("t", "b", 0.8);
    b.test_score.reset();
    CHECK_THROWS_AS(ground_truth_winner(a, b, MetricDirection::maximize), MissingGroundTruth);
    auto c = make_solution("other", "c", 0.7);
    CHECK_THROWS_AS(ground_truth_winner(a, c, MetricDirection::maximize), TaskMismatch);
}

TEST_CASE("ground_truth_winner antisymmetry property") {
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> dist(0, 1);
    for (int i = 0; i < 300; ++i) {
        auto a = make_solution("t", "a", dist(eng));
        auto b = make_solution("t", "b", dist(eng));
        auto dir = i % 2 ? MetricDirection::maximize : MetricDirection::minimize;
        Verdict ab = ground_truth_winner(a, b, dir);
        Verdict ba = ground_truth_winner(b, a, dir);
        if (ab == Verdict::Ambiguous) {
            CHECK(ba == Verdict::Ambiguous);
        } else {
            CHECK(ab == (ba == Verdict::A ? Verdict::B : Verdict::A));
        }
    }
}

TEST_CASE("serialization round-trips preserve every field") {
    TaskSpec task = testutil::make_task("spooky-author", MetricDirection::minimize, Domain::NLP,
                                        Difficulty::Easy, "Classification");
    task.masked_paths = {"labels/*.csv", "answers.csv"};
    CHECK(json::parse(json(task).dump()).get<TaskSpec>() == task);

    SolutionRecord sol = make_solution("spooky-author", "s1", 0.42, "lightgbm", 3, AlgoEra::modern);
    sol.parent_id = "s0";
    sol.stage = Stage::improve;
    sol.val_score = 0.4;
    sol.complexity = ComplexityScore{3, 5, 7, "three heads", 15};
    CHECK(json::parse(json(sol).dump()).get<SolutionRecord>() == sol);

    PreferencePair pair;
    pair.pair_id = "spooky-author:s1:s2";
    pair.task_id = "spooky-author";
    pair.sol_a = "s1";
    pair.sol_b = "s2";
    pair.winner = Side::B;
    pair.strata = task.strata;
    pair.granularity = Granularity::cross_algo;
    pair.complexity_gap = 4.0;
    CHECK(json::parse(json(pair).dump()).get<PreferencePair>() == pair);

    Judgment j;
    j.reasoning = "solution 1 fits the small sample";
    j.predicted = Side::B;
    j.confidence = 0.85;
    j.presentation_order = PresentationOrder::BA;
    j.raw_response = "...{}";
    j.representation_level = RepLevel::verbal_report;
    CHECK(json::parse(json(j).dump()).get<Judgment>() == j);

    DataReport r;
    r.task_id = "spooky-author";
    r.level = RepLevel::numerical_stats;
    r.body = "rows: 19579\n";
    r.script_hash = "abc";
    r.log_hash = "def";
    r.verified = true;
    CHECK(json::parse(json(r).dump()).get<DataReport>() == r);
}

TEST_CASE("optional fields are omitted, not null") {
    SolutionRecord sol = make_solution("t", "s", 0.5);
    sol.test_score.reset();
    json j = sol;
    CHECK_FALSE(j.contains("val_score"));
    CHECK_FALSE(j.contains("test_score"));
    CHECK_FALSE(j.contains("parent_id"));
}

TEST_CASE("validate enforces invariants") {
    SolutionRecord empty_code = make_solution("t", "s", 0.5);
    empty_code.code.clear();
    CHECK_THROWS_AS(validate(empty_code), InvalidRecord);

    ComplexityScore bad{3, 5, 11, "", 19};
    CHECK_THROWS_AS(validate(bad), InvalidRecord);
    ComplexityScore wrong_sum{3, 5, 7, "", 16};
    CHECK_THROWS_AS(validate(wrong_sum), InvalidRecord);

    Judgment j;
    j.confidence = 1.5;
    CHECK_THROWS_AS(validate(j), InvalidRecord);

    PreferencePair p;
    p.pair_id = "x";
    p.sol_a = p.sol_b = "same";
    p.strata.paradigm = "Regression";
    CHECK_THROWS_AS(validate(p), InvalidRecord);
}

TEST_CASE("jsonl errors carry line numbers") {
    testutil::TempDir tmp;
    auto path = tmp.path() / "bad.jsonl";
    write_file(path, json(testutil::make_task("ok")).dump() + "\nnot json\n");
    try {
        read_jsonl<TaskSpec>(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
}

TEST_CASE("glob matching") {
    CHECK(glob_match("train_labels.csv", "train_labels.csv"));
    CHECK_FALSE(glob_match("train_labels.csv", "other.csv"));
    CHECK(glob_match("labels/*.csv", "labels/y.csv"));
    CHECK_FALSE(glob_match("labels/*.csv", "labels/deep/y.csv"));
    CHECK(glob_match("**/y_*.csv", "a/b/y_train.csv"));
    CHECK(glob_match("*.csv", "data.csv"));
    CHECK_FALSE(glob_match("*.csv", "dir/data.csv"));
    CHECK(matches_any({"train_labels.csv"}, "nested/train_labels.csv"));  // bare names match deep
    CHECK_FALSE(matches_any({"labels/*.csv"}, "train.csv"));
}

TEST_CASE("hash determinism and sensitivity") {
    CHECK(content_hash("abc") == content_hash("abc"));
    CHECK(content_hash("abc") != content_hash("abd"));
    CHECK(content_hash("").size() == 16);
}

TEST_CASE("whitespace normalization collapses runs") {
    CHECK(normalize_whitespace("a  b\n\tc") == "a b c");
    CHECK(normalize_whitespace("  x ") == "x");
    CHECK(normalize_whitespace("def f():\n    return 1") ==
          normalize_whitespace("def f():\n\treturn 1"));
}

TEST_CASE("head_tail_truncate keeps both ends under budget") {
    std::string text(1000, 'h');
    text += std::string(1000, 't');
    std::string cut = head_tail_truncate(text, 100, 0.75);
    CHECK(cut.size() <= 100);
    CHECK(cut.find("...[truncated]...") != std::string::npos);
    CHECK(cut.front() == 'h');
    CHECK(cut.back() == 't');
    CHECK(head_tail_truncate("short", 100) == "short");
}

TEST_CASE("extract_code_block") {
    CHECK(extract_code_block("```python\nx = 1\n```") == "x = 1");
    CHECK(extract_code_block("prose\n```\ny = 2\n```\ntrailing") == "y = 2");
    CHECK(extract_code_block("no fences at all") == "no fences at all");
    // the last block wins
    CHECK(extract_code_block("```python\na\n```\ntext\n```python\nb\n```") == "b");
}
