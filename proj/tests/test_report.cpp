#include <doctest.h>

#include <filesystem>

#include "mlpref/core/error.hpp"
#include "mlpref/core/jsonl.hpp"
#include "mlpref/core/text.hpp"
#include "mlpref/report/report.hpp"

#include "testutil.hpp"

using namespace mlpref;
using namespace mlpref::report;
namespace fs = std::filesystem;
using testutil::make_task;

namespace {

constexpr const char* kSentinel = "ZX9QW-SENTINEL-LABEL-77413";

prompts::Library& lib() {
    static prompts::Library instance = prompts::Library::open_default();
    return instance;
}

// dataset with a masked labels file carrying a sentinel token
TaskSpec make_dataset_task(const testutil::TempDir& tmp, const std::string& id) {
    fs::path data = tmp.path() / ("data-" + id);
    fs::create_directories(data);
    write_file(data / "train.csv", "x,y\n1,2\n3,4\n5,6\n");
    write_file(data / "notes.txt", "collected from sensor " + id + "\n");
    write_file(data / "train_labels.csv", std::string("id,label\n1,") + kSentinel + "\n");
    TaskSpec task = make_task(id);
    task.data_dir = data.string();
    task.masked_paths = {"train_labels.csv"};
    return task;
}

std::string good_script() {
    return "```python\n"
           "import os\n"
           "rows = sum(1 for _ in open('train.csv'))\n"
           "print('files:', sorted(os.listdir('.')))\n"
           "print('train rows:', rows)\n"
           "```";
}

std::string good_report_body() {
    return "## Data Overview\nSmall tabular set, 3 rows.\n\n"
           "## Key Statistical Findings\nTwo numeric columns, no missing values.\n\n"
           "## Implications for Model Design\nSample efficiency dominates; regularization "
           "pressure is high.\n\n"
           "## Summary\nTiny tabular data; validation rigor matters most.\n";
}

ReportConfig fast_cfg() {
    ReportConfig cfg;
    cfg.profiling_timeout_s = 30;
    return cfg;
}

}  // namespace

TEST_CASE("static scan flags masked-path references") {
    testutil::TempDir tmp;
    TaskSpec task = make_dataset_task(tmp, "t1");
    std::string offending;
    CHECK(script_references_masked("df = pd.read_csv('train_labels.csv')", task, &offending));
    CHECK(offending == "train_labels.csv");
    CHECK_FALSE(script_references_masked("df = pd.read_csv('train.csv')", task, nullptr));

    TaskSpec globbed = task;
    globbed.masked_paths = {"*_labels.csv"};
    CHECK(script_references_masked("open('train_labels.csv')", globbed, nullptr));
}

TEST_CASE("generate_profiling_script accepts a clean script") {
    testutil::TempDir tmp;
    TaskSpec task = make_dataset_task(tmp, "t1");
    auto transport = std::make_shared<llm::ScriptedTransport>(
        [](const llm::ChatRequest&) { return good_script(); });
    llm::Gateway gw(transport);
    ReportBuilder builder(gw, lib(), fast_cfg(), tmp.path() / "artifacts", {task});
    std::string script = builder.generate_profiling_script(task);
    CHECK(script.find("train rows") != std::string::npos);
    CHECK(builder.review_log().empty());
}

TEST_CASE("leaky scripts are regenerated then rejected") {
    testutil::TempDir tmp;
    TaskSpec task = make_dataset_task(tmp, "t1");
    int calls = 0;
    auto transport = std::make_shared<llm::ScriptedTransport>([&](const llm::ChatRequest&) {
        ++calls;
        return "```python\nprint(open('train_labels.csv').read())\n```";
    });
    llm::Gateway gw(transport);
    ReportBuilder builder(gw, lib(), fast_cfg(), tmp.path() / "artifacts", {task});
    CHECK_THROWS_AS(builder.generate_profiling_script(task), LeakageRejected);
    CHECK(calls == 3);  // initial + 2 regenerations
}

TEST_CASE("a leaky first script can recover on regeneration") {
    testutil::TempDir tmp;
    TaskSpec task = make_dataset_task(tmp, "t1");
    int calls = 0;
    auto transport = std::make_shared<llm::ScriptedTransport>([&](const llm::ChatRequest&) {
        ++calls;
        if (calls == 1) return std::string("```python\nopen('train_labels.csv')\n```");
        return std::string(good_script());
    });
    llm::Gateway gw(transport);
    ReportBuilder builder(gw, lib(), fast_cfg(), tmp.path() / "artifacts", {task});
    CHECK(builder.generate_profiling_script(task).find("train rows") != std::string::npos);
    CHECK(calls == 2);
}

TEST_CASE("training keywords go to the review log only") {
    testutil::TempDir tmp;
    TaskSpec task = make_dataset_task(tmp, "t1");
    auto transport = std::make_shared<llm::ScriptedTransport>([](const llm::ChatRequest&) {
        return std::string("```python\nmodel.fit(X)\nprint('stats')\n```");
    });
    llm::Gateway gw(transport);
    ReportBuilder builder(gw, lib(), fast_cfg(), tmp.path() / "artifacts", {task});
    std::string script = builder.generate_profiling_script(task);  // accepted despite the hit
    CHECK(script.find("model.fit") != std::string::npos);
    REQUIRE(builder.review_log().size() == 1);
    CHECK(builder.review_log()[0].find("no-training") != std::string::npos);
}

TEST_CASE("empty completions raise ScriptInvalid") {
    testutil::TempDir tmp;
    TaskSpec task = make_dataset_task(tmp, "t1");
    auto transport = std::make_shared<llm::ScriptedTransport>(
        [](const llm::ChatRequest&) { return std::string("```python\n```"); });
    llm::Gateway gw(transport);
    ReportBuilder builder(gw, lib(), fast_cfg(), tmp.path() / "artifacts", {task});
    CHECK_THROWS_AS(builder.generate_profiling_script(task), ScriptInvalid);
}

TEST_CASE("execute_and_verify verifies exit-0 logs and hashes artifacts") {
    testutil::TempDir tmp;
    TaskSpec task = make_dataset_task(tmp, "t1");
    auto transport = std::make_shared<llm::ScriptedTransport>(
        [](const llm::ChatRequest&) { return std::string(); });
    llm::Gateway gw(transport);
    ReportBuilder builder(gw, lib(), fast_cfg(), tmp.path() / "artifacts", {task});
    ProfilingLog log =
        builder.execute_and_verify("rows = sum(1 for _ in open('train.csv'))\n"
                                   "print('train rows:', rows)\n",
                                   task);
    CHECK(log.verified);
    CHECK(log.exit_code == 0);
    CHECK(log.log == "train rows: 4\n");
    CHECK_FALSE(log.script_hash.empty());
    CHECK_FALSE(log.log_hash.empty());
}

TEST_CASE("masked reads fail at runtime and unverify the log") {
    testutil::TempDir tmp;
    TaskSpec task = make_dataset_task(tmp, "t1");
    auto transport = std::make_shared<llm::ScriptedTransport>(
        [](const llm::ChatRequest&) { return std::string(); });
    llm::Gateway gw(transport);
    ReportBuilder builder(gw, lib(), fast_cfg(), tmp.path() / "artifacts", {task});
    ProfilingLog log = builder.execute_and_verify("print(open('train_labels.csv').read())", task);
    CHECK_FALSE(log.verified);
    CHECK(log.exit_code != 0);
    CHECK(log.log.find(kSentinel) == std::string::npos);
    CHECK_THROWS_AS(require_verified(log), ProfilingFailed);
}

TEST_CASE("oversized logs are truncated to the budget") {
    testutil::TempDir tmp;
    TaskSpec task = make_dataset_task(tmp, "t1");
    auto transport = std::make_shared<llm::ScriptedTransport>(
        [](const llm::ChatRequest&) { return std::string(); });
    llm::Gateway gw(transport);
    ReportConfig cfg = fast_cfg();
    cfg.log_budget = 4096;
    ReportBuilder builder(gw, lib(), cfg, tmp.path() / "artifacts", {task});
    ProfilingLog log = builder.execute_and_verify("print('y' * 100000)", task);
    CHECK(log.truncated);
    CHECK(log.log.size() <= 4096);
}

TEST_CASE("verbalize validates headings and retries") {
    testutil::TempDir tmp;
    TaskSpec task = make_dataset_task(tmp, "t1");
    int calls = 0;
    auto transport = std::make_shared<llm::ScriptedTransport>([&](const llm::ChatRequest&) {
        ++calls;
        if (calls == 1) return std::string("## Data Overview\nonly one heading\n");
        return good_report_body();
    });
    llm::Gateway gw(transport);
    ReportBuilder builder(gw, lib(), fast_cfg(), tmp.path() / "artifacts", {task});
    ProfilingLog log = builder.execute_and_verify("print('train rows: 3')", task);
    DataReport report = builder.verbalize(log, task);
    CHECK(calls == 2);  // heading missing once, present on retry
    CHECK(report.level == RepLevel::verbal_report);
    CHECK(report.verified);
    CHECK(report.sections == report_headings());
    validate(report);
}

TEST_CASE("verbalize gives up after retries") {
    testutil::TempDir tmp;
    TaskSpec task = make_dataset_task(tmp, "t1");
    int calls = 0;
    auto transport = std::make_shared<llm::ScriptedTransport>([&](const llm::ChatRequest&) {
        ++calls;
        return std::string("not a structured report");
    });
    llm::Gateway gw(transport);
    ReportBuilder builder(gw, lib(), fast_cfg(), tmp.path() / "artifacts", {task});
    ProfilingLog log = builder.execute_and_verify("print('train rows: 3')", task);
    CHECK_THROWS_AS(builder.verbalize(log, task), ReportMalformed);
    CHECK(calls == 3);
}

TEST_CASE("verbalize rejects empty logs without a gateway call") {
    testutil::TempDir tmp;
    TaskSpec task = make_dataset_task(tmp, "t1");
    auto transport = std::make_shared<llm::ScriptedTransport>(
        [](const llm::ChatRequest&) { return good_report_body(); });
    llm::Gateway gw(transport);
    ReportBuilder builder(gw, lib(), fast_cfg(), tmp.path() / "artifacts", {task});
    ProfilingLog log = builder.execute_and_verify("pass", task);  // prints nothing
    CHECK(log.verified);
    CHECK_THROWS_AS(builder.verbalize(log, task), ReportMalformed);
    CHECK(transport->calls() == 0);
}

TEST_CASE("verbalize screens direct model recommendations") {
    testutil::TempDir tmp;
    TaskSpec task = make_dataset_task(tmp, "t1");
    int calls = 0;
    auto transport = std::make_shared<llm::ScriptedTransport>([&](const llm::ChatRequest&) {
        ++calls;
        if (calls == 1)
            return good_report_body() + "\nYou should use LightGBM for this dataset.\n";
        return good_report_body();
    });
    llm::Gateway gw(transport);
    ReportBuilder builder(gw, lib(), fast_cfg(), tmp.path() / "artifacts", {task});
    ProfilingLog log = builder.execute_and_verify("print('train rows: 3')", task);
    DataReport report = builder.verbalize(log, task);
    CHECK(calls == 2);
    CHECK(report.body.find("LightGBM") == std::string::npos);
}

TEST_CASE("names_recommended_model heuristic") {
    auto kws = default_model_name_keywords();
    std::string hit;
    CHECK(names_recommended_model("We recommend XGBoost here.", kws, &hit));
    CHECK(names_recommended_model("you should use a transformer.", kws, nullptr));
    CHECK_FALSE(names_recommended_model(
        "Tree models face high variance risk on this sample size.", kws, nullptr));
    CHECK_FALSE(names_recommended_model("Attention mechanisms may help or hurt.", kws, nullptr));
}

TEST_CASE("make_representation per level") {
    testutil::TempDir tmp;
    TaskSpec t1 = make_dataset_task(tmp, "t1");
    TaskSpec t2 = make_dataset_task(tmp, "t2");
    TaskSpec t3 = make_dataset_task(tmp, "t3");

    auto transport = std::make_shared<llm::ScriptedTransport>([&](const llm::ChatRequest& r) {
        if (r.user.find("generate a Python script") != std::string::npos) return good_script();
        // the verbal report echoes which task's log it saw
        auto pos = r.user.find("[Task Name]");
        std::string task_name = r.user.substr(pos + 12, 2);
        return good_report_body() + "\ntask marker: " + task_name + "\n";
    });
    llm::Gateway gw(transport);
    ReportBuilder builder(gw, lib(), fast_cfg(), tmp.path() / "artifacts", {t1, t2, t3});

    SUBCASE("code_only is empty") {
        DataReport r = builder.make_representation(t1, RepLevel::code_only);
        CHECK(r.body.empty());
        CHECK(r.level == RepLevel::code_only);
    }

    SUBCASE("raw_data excerpts skip masked files") {
        DataReport r = builder.make_representation(t1, RepLevel::raw_data);
        CHECK(r.body.find("train.csv") != std::string::npos);
        CHECK(r.body.find("x,y") != std::string::npos);
        CHECK(r.body.find("train_labels.csv") == std::string::npos);
        CHECK(r.body.find(kSentinel) == std::string::npos);
    }

    SUBCASE("numerical_stats body is the verified log verbatim") {
        DataReport r = builder.make_representation(t1, RepLevel::numerical_stats);
        ProfilingLog log = builder.execute_and_verify(extract_code_block(good_script()), t1);
        CHECK(r.body == log.log);
        CHECK(r.verified);
    }

    SUBCASE("verbal_report carries provenance") {
        DataReport r = builder.make_representation(t1, RepLevel::verbal_report);
        CHECK(r.verified);
        CHECK(r.script_hash.has_value());
        CHECK(r.log_hash.has_value());
        validate(r);
    }

    SUBCASE("context_mismatch serves the ring neighbor's verbal report") {
        DataReport mismatch = builder.make_representation(t1, RepLevel::context_mismatch);
        DataReport donor = builder.make_representation(t2, RepLevel::verbal_report);
        CHECK(mismatch.task_id == "t1");
        CHECK(mismatch.level == RepLevel::context_mismatch);
        CHECK(mismatch.body == donor.body);
        DataReport own = builder.make_representation(t1, RepLevel::verbal_report);
        CHECK(mismatch.body != own.body);
        // the ring wraps: t3's mismatch comes from t1
        DataReport wrap = builder.make_representation(t3, RepLevel::context_mismatch);
        CHECK(wrap.body == own.body);
    }
}

TEST_CASE("reports are cached; recomputation makes zero gateway calls") {
    testutil::TempDir tmp;
    TaskSpec t1 = make_dataset_task(tmp, "t1");
    TaskSpec t2 = make_dataset_task(tmp, "t2");
    auto transport = std::make_shared<llm::ScriptedTransport>([&](const llm::ChatRequest& r) {
        if (r.user.find("generate a Python script") != std::string::npos) return good_script();
        return good_report_body();
    });
    llm::Gateway gw(transport);
    auto artifacts = tmp.path() / "artifacts";
    {
        ReportBuilder builder(gw, lib(), fast_cfg(), artifacts, {t1, t2});
        builder.make_representation(t1, RepLevel::verbal_report);
    }
    auto calls_after_first = transport->calls();
    CHECK(calls_after_first == 2);  // script + verbalization
    {
        ReportBuilder builder(gw, lib(), fast_cfg(), artifacts, {t1, t2});
        DataReport again = builder.make_representation(t1, RepLevel::verbal_report);
        CHECK(again.verified);
    }
    CHECK(transport->calls() == calls_after_first);  // fully served from the cache
}

TEST_CASE("sentinel tokens never reach any representation level") {
    testutil::TempDir tmp;
    TaskSpec t1 = make_dataset_task(tmp, "t1");
    TaskSpec t2 = make_dataset_task(tmp, "t2");
    // adversarial verbalizer: echoes the whole profiling log it is given
    auto transport = std::make_shared<llm::ScriptedTransport>([&](const llm::ChatRequest& r) {
        if (r.user.find("generate a Python script") != std::string::npos)
            return std::string("```python\n"
                               "import os, glob\n"
                               "for p in sorted(glob.glob('**/*', recursive=True)):\n"
                               "    print('entry:', p)\n"
                               "    try:\n"
                               "        print(open(p).read()[:200])\n"
                               "    except Exception as e:\n"
                               "        print('unreadable:', type(e).__name__)\n"
                               "```");
        return good_report_body() + "\nRaw extraction follows.\n" + r.user;
    });
    llm::Gateway gw(transport);
    ReportBuilder builder(gw, lib(), fast_cfg(), tmp.path() / "artifacts", {t1, t2});
    for (auto level : {RepLevel::code_only, RepLevel::raw_data, RepLevel::numerical_stats,
                       RepLevel::verbal_report, RepLevel::context_mismatch}) {
        DataReport r = builder.make_representation(t1, level);
        CHECK(r.body.find(kSentinel) == std::string::npos);
    }
}
