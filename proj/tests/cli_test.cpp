#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>

#include <json.hpp>

#include "test_support.hpp"

namespace ts = testing_support;
using nlohmann::json;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    CliResult run(const std::string& args) {
        auto out = dir_.path() / "stdout.txt";
        auto err = dir_.path() / "stderr.txt";
        std::string cmd = std::string("'") + KGDEDUP_CLI + "' " + args + " >'" + out.string() + "' 2>'" +
                          err.string() + "'";
        int status = std::system(cmd.c_str());
        CliResult r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = ts::slurp(out);
        r.err = ts::slurp(err);
        return r;
    }

    std::string path(const std::string& name) const { return (dir_.path() / name).string(); }

    // 100 instances, 10 duplicates.
    void synth() {
        auto r = run("synth --instances 100 --dup-rate 0.1 --seed 7 --out " + path("kg"));
        ASSERT_EQ(r.code, 0) << r.err;
    }

    ts::TempDir dir_;
};

const std::string kEvent = "https://schema.org/Event";

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_F(Cli, UsageErrorsExitWithOne) {
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("frobnicate").code, 1);
    EXPECT_EQ(run("synth --instances -3").code, 1);
    EXPECT_EQ(run("run").code, 1);
    EXPECT_EQ(run("eval --truth x.csv").code, 1);
    EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, DataErrorsExitWithTwo) {
    auto missing = run("run --data " + path("nope.nt") + " --type " + kEvent);
    EXPECT_EQ(missing.code, 2);
    EXPECT_NE(missing.err.find("nope.nt"), std::string::npos);

    ts::spit(path("bad.nt"), "<http://e.org/s> <http://e.org/p> \"ok\" .\n<http://e.org/s> broken\n");
    auto bad = run("run --data " + path("bad.nt") + " --type " + kEvent);
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("bad.nt:2"), std::string::npos) << bad.err;

    ts::spit(path("truth.csv"), "source_id,target_id,is_duplicate\na,b,perhaps\n");
    ts::spit(path("empty.jsonl"), "");
    auto truth = run("eval --truth " + path("truth.csv") + " --results " + path("empty.jsonl"));
    EXPECT_EQ(truth.code, 2);
    EXPECT_NE(truth.err.find("truth.csv:2"), std::string::npos) << truth.err;
}

TEST_F(Cli, SynthRunAndEval) {
    synth();
    EXPECT_EQ(count_lines(ts::slurp(path("kg.truth.csv"))), 11u);

    auto run_res = run("run --data " + path("kg.nt") + " --type " + kEvent + " --out " + path("results.jsonl"));
    ASSERT_EQ(run_res.code, 0) << run_res.err;
    auto results = ts::slurp(path("results.jsonl"));
    EXPECT_EQ(count_lines(results), count_lines(run_res.out));
    EXPECT_GT(count_lines(results), 0u);
    json first = json::parse(results.substr(0, results.find('\n')));
    EXPECT_TRUE(first.contains("per_path"));

    auto eval = run("--json eval --truth " + path("kg.truth.csv") + " --results " + path("results.jsonl"));
    ASSERT_EQ(eval.code, 0) << eval.err;
    auto report = json::parse(eval.out);
    EXPECT_EQ(report["labelled_total"], 10);
    EXPECT_EQ(report["true_pos"].get<int>() + report["false_neg"].get<int>(), 10);

    auto closed = run("--json eval --closed-world --truth " + path("kg.truth.csv") + " --results " +
                      path("results.jsonl"));
    ASSERT_EQ(closed.code, 0) << closed.err;
    EXPECT_GE(json::parse(closed.out)["false_pos"].get<int>(), report["false_pos"].get<int>());

    auto direct = run("--json eval --truth " + path("kg.truth.csv") + " --data " + path("kg.nt") + " --type " + kEvent);
    ASSERT_EQ(direct.code, 0) << direct.err;
    EXPECT_EQ(json::parse(direct.out), report);
}

TEST_F(Cli, StateDirectoryWorkflow) {
    synth();
    std::string state = path("state");
    auto ingest = run("ingest --state " + state + " --name events " + path("kg.nt"));
    ASSERT_EQ(ingest.code, 0) << ingest.err;
    EXPECT_EQ(json::parse(ingest.out)["id"], "g1");
    auto index = run("index --state " + state + " --graph g1 --type " + kEvent);
    ASSERT_EQ(index.code, 0) << index.err;
    EXPECT_EQ(json::parse(index.out)["documents"], 100);
    auto first = run("run --state " + state + " --source i1 --accepted");
    ASSERT_EQ(first.code, 0) << first.err;
    auto second = run("run --state " + state + " --source i1 --accepted");
    ASSERT_EQ(second.code, 0) << second.err;
    EXPECT_EQ(first.out, second.out);
    EXPECT_NE(second.err.find("pair p1"), std::string::npos);  // the pair is reused
    EXPECT_EQ(run("index --state " + state + " --graph g9 --type " + kEvent).code, 2);
}

TEST_F(Cli, StrategyOverTruthLabels) {
    synth();
    ts::spit(path("steps.json"), R"([
        {"heuristic": "forward_selection", "target": "weights"},
        {"heuristic": "hill_climb", "target": "decision_threshold", "step": 0.05}
    ])");
    auto r = run("--json strategy --data " + path("kg.nt") + " --type " + kEvent + " --steps " + path("steps.json") +
                 " --truth " + path("kg.truth.csv") + " --audit " + path("audit.jsonl"));
    ASSERT_EQ(r.code, 0) << r.err;
    auto summary = json::parse(r.out);
    EXPECT_EQ(summary["steps_completed"], 2);
    EXPECT_GE(summary["final"]["f1"].get<double>(), summary["initial"]["f1"].get<double>());
    EXPECT_EQ(count_lines(ts::slurp(path("audit.jsonl"))), summary["evaluations"].get<std::size_t>());

    auto rounds = run("--json strategy --data " + path("kg.nt") + " --type " + kEvent + " --steps " +
                      path("steps.json") + " --truth " + path("kg.truth.csv") + " --rounds 2 --per-round 5");
    ASSERT_EQ(rounds.code, 0) << rounds.err;
    auto log = json::parse(rounds.out)["rounds"];
    ASSERT_EQ(log.size(), 2u);
    EXPECT_EQ(log[1]["labelled"], 10);

    ts::spit(path("bad_steps.json"), R"([{"heuristic": "genetic", "target": "weights"}])");
    EXPECT_EQ(run("strategy --data " + path("kg.nt") + " --type " + kEvent + " --steps " + path("bad_steps.json") +
                  " --truth " + path("kg.truth.csv"))
                  .code,
              2);
}
