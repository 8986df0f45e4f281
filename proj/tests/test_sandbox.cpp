#include <doctest.h>

#include <filesystem>
#include <map>

#include "mlpref/core/error.hpp"
#include "mlpref/core/hash.hpp"
#include "mlpref/core/jsonl.hpp"
#include "mlpref/sandbox/sandbox.hpp"

#include "testutil.hpp"

using namespace mlpref;
using namespace mlpref::sandbox;
namespace fs = std::filesystem;

namespace {

SandboxConfig fast_cfg(double timeout_s = 20) {
    SandboxConfig cfg;
    cfg.timeout_s = timeout_s;
    return cfg;
}

fs::path make_dataset(const testutil::TempDir& tmp) {
    fs::path data = tmp.path() / "data";
    fs::create_directories(data / "labels");
    write_file(data / "train.csv", "x,y\n1,2\n3,4\n");
    write_file(data / "labels" / "answers.csv", "id,label\n1,SECRET\n");
    return data;
}

}  // namespace

TEST_CASE("run_script happy path") {
    testutil::TempDir tmp;
    auto data = make_dataset(tmp);
    ExecutionResult r = run_script("print('ok')", data, {}, fast_cfg());
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text == "ok\n");
    CHECK_FALSE(r.timed_out);
    CHECK(r.wall_time_s >= 0);
}

TEST_CASE("timeout kills the process tree and marks the exit") {
    testutil::TempDir tmp;
    auto data = make_dataset(tmp);
    SandboxConfig cfg = fast_cfg(2.0);
    ExecutionResult r = run_script("import time\nprint('spinning', flush=True)\n"
                                   "while True:\n    time.sleep(0.1)\n",
                                   data, {}, cfg);
    CHECK(r.timed_out);
    CHECK(r.exit_code == 137);  // killed
    CHECK(r.wall_time_s == doctest::Approx(2.0).epsilon(0.25));  // ~2s +- 0.5
    CHECK(r.wall_time_s <= cfg.timeout_s + cfg.grace_s);
    CHECK(r.stdout_text.find("spinning") != std::string::npos);
}

TEST_CASE("stream budgets are respected with a truncation marker") {
    testutil::TempDir tmp;
    auto data = make_dataset(tmp);
    SandboxConfig cfg = fast_cfg();
    cfg.stdout_budget = 64 * 1024;
    // ~10 MB of output against a 64 KB budget
    ExecutionResult r = run_script("import sys\n"
                                   "for _ in range(10240):\n"
                                   "    sys.stdout.write('x' * 1024)\n",
                                   data, {}, cfg);
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_truncated);
    CHECK(r.stdout_text.size() <= cfg.stdout_budget);  // byte-count oracle
    CHECK(r.stdout_text.find("[truncated]") != std::string::npos);
}

TEST_CASE("denied paths are unreadable at runtime") {
    testutil::TempDir tmp;
    auto data = make_dataset(tmp);
    ExecutionResult r =
        run_script("print(open('labels/answers.csv').read())", data, {"labels/*.csv"}, fast_cfg());
    CHECK(r.exit_code != 0);  // read error -> verified=false upstream
    CHECK(r.stdout_text.find("SECRET") == std::string::npos);
}

TEST_CASE("writes never mutate the original data directory") {
    testutil::TempDir tmp;
    auto data = make_dataset(tmp);
    std::map<std::string, std::string> before;
    for (auto& entry : fs::recursive_directory_iterator(data))
        if (entry.is_regular_file())
            before[entry.path().string()] = content_hash(read_file(entry.path()));

    ExecutionResult r = run_script("open('train.csv','w').write('clobbered')\n"
                                   "open('new_file.txt','w').write('junk')\n"
                                   "print('done')",
                                   data, {}, fast_cfg());
    CHECK(r.exit_code == 0);

    std::map<std::string, std::string> after;
    for (auto& entry : fs::recursive_directory_iterator(data))
        if (entry.is_regular_file())
            after[entry.path().string()] = content_hash(read_file(entry.path()));
    CHECK(before == after);
}

TEST_CASE("spawn failure raises SandboxError") {
    CHECK_THROWS_AS(run_script("print(1)", "/nonexistent/nowhere", {}, fast_cfg()), SandboxError);
    CHECK_THROWS_AS(run("true", "/nonexistent/nowhere", 5, {}), SandboxError);
}

TEST_CASE("plain commands run against the isolated copy") {
    testutil::TempDir tmp;
    auto data = make_dataset(tmp);
    ExecutionResult r = run("cat train.csv", data, 10, {}, fast_cfg());
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text == "x,y\n1,2\n3,4\n");
    // denied entries are absent from the copy
    ExecutionResult denied = run("cat labels/answers.csv", data, 10, {"labels/*.csv"}, fast_cfg());
    CHECK(denied.exit_code != 0);
}

TEST_CASE("extract_val_score last match wins") {
    auto s = extract_val_score("val_rmse: 0.31\nval_rmse: 0.27\n", R"(val_rmse:\s*([0-9.eE+-]+))",
                               MetricDirection::minimize);
    REQUIRE(s.has_value());
    CHECK(s->value == doctest::Approx(0.27));
    CHECK(s->direction == MetricDirection::minimize);
}

TEST_CASE("extract_val_score no match and scientific notation") {
    CHECK_FALSE(extract_val_score("nothing here", R"(val:\s*([0-9.]+))", MetricDirection::maximize)
                    .has_value());
    auto s = extract_val_score("score=1e-3", R"(score=([0-9.eE+-]+))", MetricDirection::maximize);
    REQUIRE(s.has_value());
    CHECK(s->value == doctest::Approx(0.001));
}

TEST_CASE("extract_val_score error paths") {
    CHECK_THROWS_AS(
        extract_val_score("x", R"(no capture group)", MetricDirection::maximize),
        ExtractionError);
    CHECK_THROWS_AS(
        extract_val_score("score=..", R"(score=([.]+))", MetricDirection::maximize),
        ExtractionError);
}

TEST_CASE("execution result serialization round-trip") {
    ExecutionResult r;
    r.exit_code = 0;
    r.stdout_text = "val_metric: 0.5\n";
    r.stderr_text = "warn\n";
    r.wall_time_s = 1.25;
    r.extracted_val_score = Score{0.5, MetricDirection::maximize};
    json j = r;
    CHECK(j.get<ExecutionResult>() == r);
}
