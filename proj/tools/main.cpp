// mlpref — execution-free preference evaluation harness.
//
// Subcommands: corpus-build, report-build, judge-eval, rank-eval,
// complexity-score, agent-run, agent-baseline, metrics-recompute.
// Machine-readable outputs go to files under --out; logs go to stderr.
// Exit codes: 0 success, 1 usage, 2 runtime failure.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>

#include <CLI11.hpp>

#include "mlpref/agent/agent.hpp"
#include "mlpref/complexity/complexity.hpp"
#include "mlpref/config.hpp"
#include "mlpref/core/error.hpp"
#include "mlpref/core/hash.hpp"
#include "mlpref/core/jsonl.hpp"
#include "mlpref/core/rand.hpp"
#include "mlpref/core/score.hpp"
#include "mlpref/corpus/curate.hpp"
#include "mlpref/judge/judge.hpp"
#include "mlpref/metrics/metrics.hpp"
#include "mlpref/prompts/library.hpp"
#include "mlpref/report/report.hpp"

namespace fs = std::filesystem;
using namespace mlpref;

namespace {

std::shared_ptr<llm::Transport> make_transport(const Config& cfg, const fs::path& out_dir) {
    if (cfg.gateway.transport == "replay")
        return std::make_shared<llm::ReplayTransport>(cfg.gateway.fixtures_dir);
    std::string api_key;
    if (const char* env = std::getenv(cfg.gateway.api_key_env.c_str())) api_key = env;
    auto http = std::make_shared<llm::HttpTransport>(cfg.gateway.endpoint, api_key,
                                                     cfg.gateway.timeout_s);
    if (cfg.gateway.transport == "http+cache")
        return std::make_shared<llm::CachingTransport>(http, out_dir / "response_cache");
    return http;
}

llm::Gateway make_gateway(const Config& cfg, const fs::path& out_dir) {
    llm::GatewayConfig gw;
    gw.retries = cfg.gateway.retries;
    gw.backoff_base_ms = cfg.gateway.backoff_base_ms;
    gw.parallelism = cfg.gateway.parallelism;
    return llm::Gateway(make_transport(cfg, out_dir), gw);
}

std::map<std::string, TaskSpec> load_tasks(const fs::path& path) {
    std::map<std::string, TaskSpec> out;
    for (auto& t : read_jsonl<TaskSpec>(path)) {
        validate(t);
        if (!out.emplace(t.task_id, t).second)
            throw InvalidRecord("duplicate task_id: " + t.task_id);
    }
    return out;
}

std::map<std::string, SolutionRecord> load_solutions(const fs::path& path) {
    std::map<std::string, SolutionRecord> out;
    for (auto& s : read_jsonl<SolutionRecord>(path)) {
        validate(s);
        out[s.solution_id] = s;
    }
    return out;
}

std::map<std::string, ComplexityScore> load_scores(const fs::path& path) {
    std::map<std::string, ComplexityScore> out;
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        out[j.at("solution_id").get<std::string>()] = j.at("score").get<ComplexityScore>();
    }
    return out;
}

// (task_id, level) -> report
std::map<std::pair<std::string, std::string>, DataReport> load_reports(const fs::path& path) {
    std::map<std::pair<std::string, std::string>, DataReport> out;
    for (auto& r : read_jsonl<DataReport>(path)) out[{r.task_id, to_string(r.level)}] = r;
    return out;
}

std::string era_label(const SolutionRecord& a, const SolutionRecord& b) {
    if (a.algo_era == b.algo_era && a.algo_era != AlgoEra::unknown) return to_string(a.algo_era);
    return "mixed";
}

metrics::PairOutcome make_outcome(const PreferencePair& pair, metrics::Predicted predicted,
                                  double confidence,
                                  const std::map<std::string, SolutionRecord>& sols,
                                  const std::map<std::string, ComplexityScore>* scores,
                                  const std::vector<double>& gap_edges) {
    metrics::PairOutcome o;
    o.truth = pair.winner;
    o.predicted = predicted;
    o.confidence = confidence;
    o.strata = pair.strata;
    o.granularity = pair.granularity;
    auto a = sols.find(pair.sol_a);
    auto b = sols.find(pair.sol_b);
    if (a != sols.end() && b != sols.end()) o.era = era_label(a->second, b->second);
    std::optional<double> gap = pair.complexity_gap;
    if (scores) {
        auto sa = scores->find(pair.sol_a);
        auto sb = scores->find(pair.sol_b);
        if (sa != scores->end() && sb != scores->end())
            gap = std::fabs(static_cast<double>(sa->second.aggregate) -
                            static_cast<double>(sb->second.aggregate));
    }
    if (gap)
        o.gap_bucket = complexity::gap_bucket_label(complexity::gap_bucket_index(*gap, gap_edges),
                                                    gap_edges);
    return o;
}

std::string fmt_pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v * 100.0);
    return buf;
}

// Stratified accuracy as text: solution attributes down, task dimensions
// across.
std::string accuracy_table(const std::vector<metrics::PairOutcome>& outcomes, double overall,
                           double stdev, int runs) {
    using Match = std::function<bool(const metrics::PairOutcome&)>;
    std::vector<std::pair<std::string, Match>> cols;
    for (auto d : {Domain::CV, Domain::NLP, Domain::DataScience})
        cols.emplace_back(to_string(d),
                          [d](const metrics::PairOutcome& o) { return o.strata.domain == d; });
    for (auto d : {Difficulty::Easy, Difficulty::Medium, Difficulty::Hard})
        cols.emplace_back(to_string(d),
                          [d](const metrics::PairOutcome& o) { return o.strata.difficulty == d; });
    cols.emplace_back("Class.", [](const metrics::PairOutcome& o) {
        return o.strata.paradigm == "Classification";
    });
    cols.emplace_back("Regres.", [](const metrics::PairOutcome& o) {
        return o.strata.paradigm == "Regression";
    });
    cols.emplace_back("Others", [](const metrics::PairOutcome& o) {
        return o.strata.paradigm != "Classification" && o.strata.paradigm != "Regression";
    });

    std::vector<std::pair<std::string, Match>> rows;
    for (const char* era : {"traditional", "modern", "mixed"})
        rows.emplace_back(std::string("Era ") + era,
                          [era](const metrics::PairOutcome& o) { return o.era == era; });
    rows.emplace_back("Cross-Algo", [](const metrics::PairOutcome& o) {
        return o.granularity == Granularity::cross_algo;
    });
    rows.emplace_back("Self-Comp.", [](const metrics::PairOutcome& o) {
        return o.granularity == Granularity::self_comparison;
    });
    std::set<std::string> buckets;
    for (const auto& o : outcomes)
        if (!o.gap_bucket.empty()) buckets.insert(o.gap_bucket);
    for (const auto& b : buckets)
        rows.emplace_back("Gap " + b,
                          [b](const metrics::PairOutcome& o) { return o.gap_bucket == b; });

    auto micro = [&](const Match& row, const Match& col) -> std::string {
        double correct = 0;
        int total = 0;
        for (const auto& o : outcomes) {
            if (!row(o) || !col(o)) continue;
            correct += metrics::outcome_credit(o);
            ++total;
        }
        return total ? fmt_pct(correct / total) : std::string("--");
    };
    Match everything = [](const metrics::PairOutcome&) { return true; };

    std::string out = "Pairwise preference accuracy (%)\n\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-18s", "Attr \\ Dim");
    out += buf;
    for (const auto& [header, _] : cols) {
        std::snprintf(buf, sizeof(buf), " %11s", header.c_str());
        out += buf;
    }
    out += "         Avg\n";
    for (const auto& [label, row] : rows) {
        std::snprintf(buf, sizeof(buf), "%-18s", label.c_str());
        out += buf;
        for (const auto& [_, col] : cols) {
            std::snprintf(buf, sizeof(buf), " %11s", micro(row, col).c_str());
            out += buf;
        }
        std::snprintf(buf, sizeof(buf), " %11s", micro(row, everything).c_str());
        out += buf;
        out += '\n';
    }
    std::snprintf(buf, sizeof(buf), "%-18s", "Tasks Avg");
    out += buf;
    for (const auto& [_, col] : cols) {
        std::snprintf(buf, sizeof(buf), " %11s", micro(everything, col).c_str());
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), " %11s", fmt_pct(overall).c_str());
    out += buf;
    out += "\n\nOverall: " + fmt_pct(overall) + "%";
    if (runs > 1) out += " +- " + fmt_pct(stdev) + " over " + std::to_string(runs) + " runs";
    out += "\n";
    return out;
}

json calibration_json(const metrics::CalibrationTable& table) {
    json bins = json::array();
    for (const auto& b : table.bins)
        bins.push_back(json{{"lo", b.lo},
                            {"hi", b.hi},
                            {"count", b.count},
                            {"accuracy", b.accuracy},
                            {"mean_confidence", b.mean_confidence}});
    return json{{"bins", bins}};
}

DataReport select_report(const std::map<std::pair<std::string, std::string>, DataReport>& reports,
                         const TaskSpec& task, RepLevel level) {
    if (level == RepLevel::code_only) {
        DataReport r;
        r.task_id = task.task_id;
        r.level = RepLevel::code_only;
        return r;
    }
    auto it = reports.find({task.task_id, to_string(level)});
    if (it == reports.end())
        throw Error("no " + to_string(level) + " report for task " + task.task_id +
                    " (build one with report-build and pass --reports)");
    return it->second;
}

int cmd_corpus_build(const Config& cfg, const fs::path& trajectories, const fs::path& tasks_path,
                     const fs::path& out) {
    auto tasks = load_tasks(tasks_path);
    auto records = read_jsonl<SolutionRecord>(trajectories);
    std::vector<TaskSpec> task_list;
    task_list.reserve(tasks.size());
    for (auto& [_, t] : tasks) task_list.push_back(t);

    corpus::CurationOutput result = corpus::curate(records, task_list, cfg.corpus);

    fs::create_directories(out);
    write_jsonl(out / "pairs.jsonl", result.pairs);
    write_file(out / "curation_report.json", json(result.report).dump(2) + "\n");
    json manifest{{"seed", cfg.corpus.seed},
                  {"cap", cfg.corpus.cap},
                  {"tie_eps", cfg.corpus.tie_eps},
                  {"cap_note", "per-method cap and seeded sampling stand in for expert review; "
                               "values are artifact defaults"},
                  {"tasks", task_list.size()},
                  {"ingested", result.report.ingested},
                  {"pairs_final", result.report.pairs_final}};
    write_file(out / "manifest.json", manifest.dump(2) + "\n");
    std::cerr << "corpus-build: " << result.report.pairs_final << " pairs from "
              << result.report.ingested << " records\n";
    return 0;
}

int cmd_report_build(const Config& cfg, const fs::path& tasks_path, const std::string& level_name,
                     const fs::path& out) {
    auto tasks = load_tasks(tasks_path);
    std::vector<TaskSpec> task_list;
    for (auto& [_, t] : tasks) task_list.push_back(t);

    RepLevel level = enum_from_string<RepLevel>(level_name);
    llm::Gateway gateway = make_gateway(cfg, out);
    auto prompts = prompts::Library::open_default();
    report::ReportBuilder builder(gateway, prompts, cfg.report, fs::path(out) / "artifacts",
                                  task_list);

    std::vector<DataReport> reports;
    reports.reserve(task_list.size());
    for (const auto& t : task_list) reports.push_back(builder.make_representation(t, level));

    fs::create_directories(out);
    write_jsonl(out / "reports.jsonl", reports);
    for (const auto& note : builder.review_log()) std::cerr << "review: " << note << "\n";
    std::cerr << "report-build: " << reports.size() << " reports at level " << level_name << "\n";
    return 0;
}

int cmd_judge_eval(const Config& cfg, const fs::path& pairs_path, const fs::path& tasks_path,
                   const fs::path& sols_path, const fs::path& reports_path,
                   const fs::path& scores_path, int runs, const fs::path& out) {
    if (runs < 1) throw ConfigError("--runs must be >= 1");
    auto tasks = load_tasks(tasks_path);
    auto sols = load_solutions(sols_path);
    auto pairs = read_jsonl<PreferencePair>(pairs_path);
    std::map<std::pair<std::string, std::string>, DataReport> reports;
    if (!reports_path.empty()) reports = load_reports(reports_path);
    std::map<std::string, ComplexityScore> scores;
    if (!scores_path.empty()) scores = load_scores(scores_path);

    llm::Gateway gateway = make_gateway(cfg, out);
    auto prompts = prompts::Library::open_default();
    judge::Judge judge(gateway, prompts, cfg.judge);

    fs::create_directories(out);
    std::ofstream judgments_out(out / "judgments.jsonl", std::ios::trunc);

    std::vector<std::vector<metrics::PairOutcome>> run_outcomes;
    std::vector<metrics::PairOutcome> pooled;
    for (int run = 1; run <= runs; ++run) {
        std::vector<metrics::PairOutcome> outcomes;
        outcomes.reserve(pairs.size());
        for (const auto& pair : pairs) {
            auto t = tasks.find(pair.task_id);
            if (t == tasks.end()) throw Error("pair references unknown task " + pair.task_id);
            auto a = sols.find(pair.sol_a);
            auto b = sols.find(pair.sol_b);
            if (a == sols.end() || b == sols.end())
                throw Error("pair " + pair.pair_id + " references unknown solutions");
            DataReport report = select_report(reports, t->second, cfg.judge.representation_level);
            Judgment j = judge.judge_pair(t->second, report, a->second, b->second);
            judgments_out << json{{"pair_id", pair.pair_id}, {"run", run}, {"judgment", j}}.dump()
                          << '\n';
            auto predicted = j.predicted == Side::A ? metrics::Predicted::A : metrics::Predicted::B;
            outcomes.push_back(make_outcome(pair, predicted, j.confidence, sols,
                                            scores.empty() ? nullptr : &scores,
                                            cfg.metrics.gap_edges));
        }
        pooled.insert(pooled.end(), outcomes.begin(), outcomes.end());
        run_outcomes.push_back(std::move(outcomes));
    }

    metrics::StratifiedAccuracy acc = metrics::pairwise_accuracy(run_outcomes);
    metrics::CalibrationTable cal =
        metrics::calibration(pooled, metrics::confidence_edges(cfg.metrics.calibration_bins));

    json by_stratum = json::object();
    for (const auto& [key, stats] : acc.by_stratum)
        by_stratum[key.first + "/" + key.second] =
            json{{"correct", stats.correct}, {"total", stats.total}, {"acc", stats.acc()}};

    json results{{"overall", acc.overall},   {"correct", acc.correct},
                 {"total", acc.total},       {"runs", acc.runs},
                 {"stdev", acc.stdev},       {"by_stratum", by_stratum},
                 {"calibration", calibration_json(cal)}, {"gateway_calls", gateway.calls()}};
    write_file(out / "results.json", results.dump(2) + "\n");
    write_file(out / "table.txt", accuracy_table(pooled, acc.overall, acc.stdev, acc.runs));
    std::cerr << "judge-eval: overall " << fmt_pct(acc.overall) << "% over " << acc.total
              << " judgments\n";
    return 0;
}

int cmd_rank_eval(const Config& cfg, const fs::path& tasks_path, const fs::path& sols_path,
                  const fs::path& reports_path, int n_max, int samples_per_task,
                  const fs::path& out) {
    if (n_max < 2) throw ConfigError("--n-max must be >= 2");
    auto tasks = load_tasks(tasks_path);
    auto sols_by_id = load_solutions(sols_path);
    std::map<std::string, std::vector<SolutionRecord>> by_task;
    for (auto& [_, s] : sols_by_id)
        if (s.test_score) by_task[s.task_id].push_back(s);

    std::map<std::pair<std::string, std::string>, DataReport> reports;
    if (!reports_path.empty()) reports = load_reports(reports_path);

    llm::Gateway gateway = make_gateway(cfg, out);
    auto prompts = prompts::Library::open_default();
    judge::JudgeConfig jcfg = cfg.judge;
    jcfg.max_list_size = std::max(jcfg.max_list_size, n_max);
    judge::Judge judge(gateway, prompts, jcfg);

    json grid = json::array();
    std::string table = "Listwise ranking ('--' marks undefined k >= N)\n\nN     Spearman";
    for (int k = 1; k < n_max; ++k) table += "      A@" + std::to_string(k);
    table += "    lists\n";

    for (int n = 2; n <= n_max; ++n) {
        double rho_sum = 0;
        std::vector<double> ak_sum(static_cast<std::size_t>(n_max), 0.0);
        int lists = 0, skipped_tasks = 0;

        for (const auto& [task_id, all] : by_task) {
            const TaskSpec& task = tasks.at(task_id);
            if (static_cast<int>(all.size()) < n) {
                ++skipped_tasks;
                continue;
            }
            std::mt19937_64 eng(
                derive_seed(cfg.seed, "rank\x1f" + task_id + "\x1f" + std::to_string(n)));
            std::set<std::vector<std::size_t>> seen;
            int attempts = 0;
            while (static_cast<int>(seen.size()) < samples_per_task &&
                   attempts < samples_per_task * 20) {
                ++attempts;
                std::vector<std::size_t> idx(all.size());
                for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
                deterministic_shuffle(idx, eng);
                idx.resize(static_cast<std::size_t>(n));
                std::sort(idx.begin(), idx.end());
                if (seen.count(idx)) continue;

                std::vector<SolutionRecord> sample;
                sample.reserve(idx.size());
                for (auto i : idx) sample.push_back(all[i]);
                bool tied = false;
                for (std::size_t i = 0; i < sample.size() && !tied; ++i)
                    for (std::size_t k2 = i + 1; k2 < sample.size(); ++k2)
                        if (ground_truth_winner(sample[i], sample[k2], task.metric_direction) ==
                            Verdict::Ambiguous) {
                            tied = true;
                            break;
                        }
                if (tied) continue;
                seen.insert(idx);

                std::vector<std::string> truth;
                {
                    auto ordered = sample;
                    std::sort(ordered.begin(), ordered.end(),
                              [&](const SolutionRecord& x, const SolutionRecord& y) {
                                  return canonical_score({*x.test_score, task.metric_direction}) >
                                         canonical_score({*y.test_score, task.metric_direction});
                              });
                    for (const auto& s : ordered) truth.push_back(s.solution_id);
                }
                DataReport report = select_report(reports, task, cfg.judge.representation_level);
                judge::RankingResult ranking = judge.rank_listwise(task, report, sample);
                rho_sum += metrics::spearman(ranking.order, truth);
                for (int k = 1; k < n; ++k)
                    ak_sum[static_cast<std::size_t>(k - 1)] +=
                        *metrics::accuracy_at_k(ranking.order, truth, k);
                ++lists;
            }
        }

        json row{{"n", n}, {"lists", lists}, {"skipped_tasks", skipped_tasks}};
        char buf[64];
        std::string line = std::to_string(n);
        line.resize(5, ' ');
        if (lists) {
            std::snprintf(buf, sizeof(buf), "%9.3f", rho_sum / lists);
            line += buf;
            row["spearman"] = rho_sum / lists;
        } else {
            line += "       --";
        }
        for (int k = 1; k < n_max; ++k) {
            if (k < n && lists) {
                double v = ak_sum[static_cast<std::size_t>(k - 1)] / lists;
                std::snprintf(buf, sizeof(buf), " %8s", fmt_pct(v).c_str());
                line += buf;
                row["a@" + std::to_string(k)] = v;
            } else {
                line += "       --";
                row["a@" + std::to_string(k)] = nullptr;
            }
        }
        std::snprintf(buf, sizeof(buf), " %8d", lists);
        line += buf;
        table += line + "\n";
        grid.push_back(row);
    }

    fs::create_directories(out);
    write_file(out / "ranking.json", json{{"grid", grid}}.dump(2) + "\n");
    write_file(out / "ranking.txt", table);
    std::cerr << "rank-eval: wrote " << (out / "ranking.txt").string() << "\n";
    return 0;
}

int cmd_complexity_score(const Config& cfg, const fs::path& sols_path, const fs::path& out_file,
                         const fs::path& out_dir) {
    auto sols = load_solutions(sols_path);
    llm::Gateway gateway = make_gateway(cfg, out_dir);
    auto prompts = prompts::Library::open_default();
    complexity::ComplexityConfig ccfg;
    ccfg.model_id = cfg.gateway.model_id;
    ccfg.temperature = cfg.gateway.temperature;
    complexity::Scorer scorer(gateway, prompts, ccfg);

    if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
    std::ofstream outf(out_file, std::ios::trunc);
    if (!outf) throw Error("cannot write " + out_file.string());
    for (const auto& [id, s] : sols) {
        ComplexityScore score = scorer.score(s);
        outf << json{{"solution_id", id}, {"code_hash", content_hash(s.code)}, {"score", score}}
                    .dump()
             << '\n';
    }
    std::cerr << "complexity-score: " << sols.size() << " solutions\n";
    return 0;
}

int run_agent_command(const Config& cfg, const fs::path& task_path, const fs::path& report_path,
                      const fs::path& leaderboard_path, const fs::path& test_scores_path,
                      const fs::path& out, bool baseline) {
    TaskSpec task = json::parse(read_file(task_path)).get<TaskSpec>();
    validate(task);

    llm::Gateway gateway = make_gateway(cfg, out);
    auto prompts = prompts::Library::open_default();

    DataReport report;
    if (cfg.agent.rep_level == RepLevel::code_only) {
        report.task_id = task.task_id;
        report.level = RepLevel::code_only;
    } else if (!report_path.empty()) {
        report = json::parse(read_file(report_path)).get<DataReport>();
    } else {
        report::ReportBuilder builder(gateway, prompts, cfg.report, fs::path(out) / "artifacts",
                                      {task});
        report = builder.make_representation(task, cfg.agent.rep_level);
    }

    std::unique_ptr<agent::Executor> executor;
    if (cfg.executor == "simulated")
        executor = std::make_unique<agent::SimulatedExecutor>(cfg.sim_cost_s);
    else
        executor = std::make_unique<agent::SandboxExecutor>(cfg.sandbox);

    agent::AgentDeps deps{gateway, *executor, prompts, report};
    agent::Journal journal = baseline
                                 ? agent::run_baseline(task, cfg.agent, deps, fs::path(out) / "journal")
                                 : agent::run_agent(task, cfg.agent, deps, fs::path(out) / "journal");

    if (!test_scores_path.empty()) {
        json ts = json::parse(read_file(test_scores_path));
        for (auto& node : const_cast<std::vector<agent::SearchNode>&>(journal.nodes()))
            if (ts.contains(node.record.solution_id))
                node.record.test_score = ts.at(node.record.solution_id).get<double>();
    }

    json summary = agent::journal_summary(journal, gateway);
    if (!leaderboard_path.empty()) {
        json board = json::parse(read_file(leaderboard_path));
        auto direction =
            enum_from_string<MetricDirection>(board.at("direction").get<std::string>());
        auto entries = board.at("scores").get<std::vector<double>>();
        if (auto best = journal.incumbent(task.metric_direction)) {
            const auto& record = journal.node(*best).record;
            double agent_score = record.test_score.value_or(record.val_score.value_or(0.0));
            if (auto ratio = metrics::beat_ratio({agent_score, direction}, entries, direction))
                summary["beat_ratio"] = *ratio;
        }
    } else {
        summary["beat_ratio_note"] = "no leaderboard file provided";
    }

    // content-addressed execution artifacts
    for (const auto& node : journal.nodes()) {
        if (!node.exec) continue;
        fs::path dir = fs::path(out) / "artifacts" / content_hash(node.record.code);
        write_file(dir / "solution.py", node.record.code);
        write_file(dir / "stdout.txt", node.exec->stdout_text);
        write_file(dir / "stderr.txt", node.exec->stderr_text);
    }

    write_file(fs::path(out) / "report.json", summary.dump(2) + "\n");
    std::cerr << (baseline ? "agent-baseline" : "agent-run") << ": "
              << summary.value("nodes_explored", 0) << " nodes, "
              << summary.value("executions", 0) << " executions\n";
    return 0;
}

int cmd_metrics_recompute(const Config& cfg, const fs::path& pairs_path,
                          const fs::path& judgments_path, const fs::path& tasks_path,
                          const fs::path& sols_path, const fs::path& scores_path,
                          const fs::path& out) {
    auto pairs_list = read_jsonl<PreferencePair>(pairs_path);
    std::map<std::string, PreferencePair> pairs;
    for (auto& p : pairs_list) pairs[p.pair_id] = p;
    std::map<std::string, TaskSpec> tasks;
    if (!tasks_path.empty()) tasks = load_tasks(tasks_path);
    std::map<std::string, SolutionRecord> sols;
    if (!sols_path.empty()) sols = load_solutions(sols_path);
    std::map<std::string, ComplexityScore> scores;
    if (!scores_path.empty()) scores = load_scores(scores_path);

    std::map<int, std::vector<metrics::PairOutcome>> per_run;
    std::ifstream in(judgments_path);
    if (!in) throw Error("cannot open " + judgments_path.string());
    std::string line;
    int skipped = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        auto it = pairs.find(j.at("pair_id").get<std::string>());
        if (it == pairs.end()) {
            ++skipped;
            continue;
        }
        Judgment judgment = j.at("judgment").get<Judgment>();
        auto predicted =
            judgment.predicted == Side::A ? metrics::Predicted::A : metrics::Predicted::B;
        per_run[j.value("run", 1)].push_back(
            make_outcome(it->second, predicted, judgment.confidence, sols,
                         scores.empty() ? nullptr : &scores, cfg.metrics.gap_edges));
    }

    std::vector<std::vector<metrics::PairOutcome>> runs;
    std::vector<metrics::PairOutcome> pooled;
    for (auto& [_, v] : per_run) {
        pooled.insert(pooled.end(), v.begin(), v.end());
        runs.push_back(std::move(v));
    }
    metrics::StratifiedAccuracy acc = metrics::pairwise_accuracy(runs);
    acc.skipped = skipped;  // judgments without a ground-truth pair
    metrics::CalibrationTable cal =
        metrics::calibration(pooled, metrics::confidence_edges(cfg.metrics.calibration_bins));

    json results{{"overall", acc.overall},
                 {"total", acc.total},
                 {"runs", acc.runs},
                 {"stdev", acc.stdev},
                 {"skipped_judgments", acc.skipped},
                 {"calibration", calibration_json(cal)}};

    if (!sols.empty()) {
        std::map<std::string, std::vector<const SolutionRecord*>> by_task;
        for (const auto& [_, s] : sols)
            if (s.val_score && s.test_score) by_task[s.task_id].push_back(&s);
        std::vector<metrics::ScoredPairObs> obs;
        for (const auto& [task_id, records] : by_task) {
            MetricDirection direction = MetricDirection::maximize;
            auto t = tasks.find(task_id);
            if (t != tasks.end()) direction = t->second.metric_direction;
            for (std::size_t i = 0; i < records.size(); ++i)
                for (std::size_t k = i + 1; k < records.size(); ++k)
                    obs.push_back({*records[i]->val_score, *records[k]->val_score,
                                   *records[i]->test_score, *records[k]->test_score, direction});
        }
        metrics::GapResult gap = metrics::validation_test_gap(obs);
        results["validation_test_gap"] = {{"accuracy", gap.accuracy},
                                          {"compared", gap.compared},
                                          {"val_ties", gap.val_ties},
                                          {"test_ties", gap.test_ties}};
    }

    fs::create_directories(out);
    write_file(out / "results.json", results.dump(2) + "\n");
    write_file(out / "table.txt", accuracy_table(pooled, acc.overall, acc.stdev, acc.runs));
    std::cerr << "metrics-recompute: " << acc.total << " judgments\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Execution-free preference evaluation harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });

    std::string trajectories, tasks_path, sols_path, pairs_path, reports_path, scores_path;
    std::string out_dir = "out", level = "verbal_report", task_path, report_path;
    std::string leaderboard_path, test_scores_path, scores_out = "scores.jsonl";
    std::string judgments_path;
    int runs = 3, n_max = 5, samples_per_task = 105;

    auto* corpus_cmd =
        app.add_subcommand("corpus-build", "curate trajectories into preference pairs");
    corpus_cmd->add_option("--trajectories", trajectories)->required();
    corpus_cmd->add_option("--tasks", tasks_path)->required();
    corpus_cmd->add_option("--out", out_dir);

    auto* report_cmd = app.add_subcommand("report-build", "build data reports for tasks");
    report_cmd->add_option("--tasks", tasks_path)->required();
    report_cmd->add_option("--level", level);
    report_cmd->add_option("--out", out_dir);

    auto* judge_cmd = app.add_subcommand("judge-eval", "judge a pair corpus and score accuracy");
    judge_cmd->add_option("--pairs", pairs_path)->required();
    judge_cmd->add_option("--tasks", tasks_path)->required();
    judge_cmd->add_option("--solutions", sols_path)->required();
    judge_cmd->add_option("--reports", reports_path);
    judge_cmd->add_option("--scores", scores_path);
    judge_cmd->add_option("--runs", runs);
    judge_cmd->add_option("--out", out_dir);

    auto* rank_cmd = app.add_subcommand("rank-eval", "listwise ranking evaluation");
    rank_cmd->add_option("--tasks", tasks_path)->required();
    rank_cmd->add_option("--solutions", sols_path)->required();
    rank_cmd->add_option("--reports", reports_path);
    rank_cmd->add_option("--n-max", n_max);
    rank_cmd->add_option("--samples-per-task", samples_per_task);
    rank_cmd->add_option("--out", out_dir);

    auto* cx_cmd = app.add_subcommand("complexity-score", "score solution complexity");
    cx_cmd->add_option("--solutions", sols_path)->required();
    cx_cmd->add_option("--out-file", scores_out);
    cx_cmd->add_option("--out", out_dir);

    auto* agent_cmd = app.add_subcommand("agent-run", "run the predictive search loop");
    agent_cmd->add_option("--task", task_path)->required();
    agent_cmd->add_option("--report", report_path);
    agent_cmd->add_option("--leaderboard", leaderboard_path);
    agent_cmd->add_option("--test-scores", test_scores_path);
    agent_cmd->add_option("--out", out_dir);

    auto* base_cmd = app.add_subcommand("agent-baseline", "run the execute-everything baseline");
    base_cmd->add_option("--task", task_path)->required();
    base_cmd->add_option("--report", report_path);
    base_cmd->add_option("--leaderboard", leaderboard_path);
    base_cmd->add_option("--test-scores", test_scores_path);
    base_cmd->add_option("--out", out_dir);

    auto* metrics_cmd =
        app.add_subcommand("metrics-recompute", "recompute metrics from stored judgments");
    metrics_cmd->add_option("--pairs", pairs_path)->required();
    metrics_cmd->add_option("--judgments", judgments_path)->required();
    metrics_cmd->add_option("--tasks", tasks_path);
    metrics_cmd->add_option("--solutions", sols_path);
    metrics_cmd->add_option("--scores", scores_path);
    metrics_cmd->add_option("--out", out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        Config cfg = config_path.empty() ? Config{} : load_config(config_path);
        if (seed_set) {
            cfg.seed = seed;
            cfg.corpus.seed = seed;
        }

        if (corpus_cmd->parsed()) return cmd_corpus_build(cfg, trajectories, tasks_path, out_dir);
        if (report_cmd->parsed()) return cmd_report_build(cfg, tasks_path, level, out_dir);
        if (judge_cmd->parsed())
            return cmd_judge_eval(cfg, pairs_path, tasks_path, sols_path, reports_path,
                                  scores_path, runs, out_dir);
        if (rank_cmd->parsed())
            return cmd_rank_eval(cfg, tasks_path, sols_path, reports_path, n_max, samples_per_task,
                                 out_dir);
        if (cx_cmd->parsed()) return cmd_complexity_score(cfg, sols_path, scores_out, out_dir);
        if (agent_cmd->parsed())
            return run_agent_command(cfg, task_path, report_path, leaderboard_path,
                                     test_scores_path, out_dir, false);
        if (base_cmd->parsed())
            return run_agent_command(cfg, task_path, report_path, leaderboard_path,
                                     test_scores_path, out_dir, true);
        if (metrics_cmd->parsed())
            return cmd_metrics_recompute(cfg, pairs_path, judgments_path, tasks_path, sols_path,
                                         scores_path, out_dir);
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
