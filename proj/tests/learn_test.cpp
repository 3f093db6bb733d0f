#include <gtest/gtest.h>

#include "kgdedup/learn.hpp"
#include "test_support.hpp"

using namespace kgdedup;
namespace ts = testing_support;

namespace {

ScoredPair scored(const std::string& a, const std::string& b, double sim, bool accepted) {
    ScoredPair p;
    p.source_id = a;
    p.target_id = b;
    p.similarity = sim;
    p.accepted = accepted;
    return p;
}

LabelRecord label(const std::string& a, const std::string& b, bool dup) { return {a, b, dup, ""}; }

// Counts must agree exactly; ratios up to rounding.
void expect_same_report(const MetricsReport& got, const MetricsReport& want) {
    EXPECT_EQ(got.true_pos, want.true_pos);
    EXPECT_EQ(got.false_pos, want.false_pos);
    EXPECT_EQ(got.false_neg, want.false_neg);
    EXPECT_EQ(got.true_neg, want.true_neg);
    EXPECT_DOUBLE_EQ(got.precision, want.precision);
    EXPECT_DOUBLE_EQ(got.recall, want.recall);
    EXPECT_DOUBLE_EQ(got.f1, want.f1);
    EXPECT_EQ(got.degenerate, want.degenerate);
}

// F1 of every non-empty weight subset, computed without the search code.
std::vector<double> subset_f1s(const ts::SelectionFixture& f) {
    std::vector<std::string> keys;
    for (const auto& [k, pc] : f.start.comparison) keys.push_back(k);
    std::vector<double> out;
    for (unsigned mask = 1; mask < (1u << keys.size()); ++mask) {
        auto cfg = f.start;
        for (std::size_t i = 0; i < keys.size(); ++i) cfg.comparison.at(keys[i]).weight.value = (mask >> i) & 1 ? 100 : 0;
        out.push_back(ts::count_report(run_duplicate_detection(f.index, f.index, cfg), f.labels).f1);
    }
    return out;
}

}  // namespace

TEST(Metrics, MakeReport) {
    auto r = make_report(3, 1, 2, 4);
    EXPECT_DOUBLE_EQ(r.precision, 0.75);
    EXPECT_DOUBLE_EQ(r.recall, 0.6);
    EXPECT_DOUBLE_EQ(r.f1, 2 * 0.75 * 0.6 / 1.35);
    EXPECT_EQ(r.labelled_total, 10u);
    EXPECT_FALSE(r.degenerate);

    auto none = make_report(0, 0, 3, 2);  // nothing accepted
    EXPECT_DOUBLE_EQ(none.precision, 1.0);
    EXPECT_DOUBLE_EQ(none.recall, 0.0);
    EXPECT_DOUBLE_EQ(none.f1, 0.0);
    EXPECT_TRUE(none.degenerate);

    auto empty = make_report(0, 0, 0, 0);
    EXPECT_DOUBLE_EQ(empty.f1, 1.0);
    EXPECT_TRUE(empty.degenerate);

    auto wrong = make_report(0, 2, 1, 0);
    EXPECT_DOUBLE_EQ(wrong.f1, 0.0);
    EXPECT_EQ(metrics_from_json(to_json(r)), r);
}

TEST(Metrics, AnalyzeCountsOnlyLabelledPairs) {
    std::vector<ScoredPair> results{scored("a", "b", 0.9, true), scored("c", "d", 0.8, true),
                                    scored("e", "f", 0.2, false), scored("x", "y", 0.95, true)};
    LabelSet labels;
    labels[normalized("b", "a")] = label("b", "a", true);  // orientation does not matter
    labels[normalized("c", "d")] = label("c", "d", false);
    labels[normalized("e", "f")] = label("e", "f", false);
    labels[normalized("g", "h")] = label("g", "h", true);  // never a candidate
    auto r = analyze(results, labels);
    EXPECT_EQ(r.true_pos, 1u);
    EXPECT_EQ(r.false_pos, 1u);
    EXPECT_EQ(r.true_neg, 1u);
    EXPECT_EQ(r.false_neg, 1u);
    expect_same_report(r, ts::count_report(results, labels));
}

TEST(Metrics, ClosedWorldAgainstTruth) {
    std::vector<ScoredPair> results{scored("a", "b", 0.9, true), scored("c", "d", 0.8, true),
                                    scored("e", "f", 0.7, false)};
    std::set<PairKey> truth{{"a", "b"}, {"e", "f"}, {"g", "h"}};
    auto r = analyze_against_truth(results, truth);
    EXPECT_EQ(r.true_pos, 1u);
    EXPECT_EQ(r.false_pos, 1u);
    EXPECT_EQ(r.false_neg, 2u);
}

TEST(Metrics, BetterThanIsLexicographic) {
    MetricPrefs f1_precision;
    auto a = make_report(2, 0, 2, 0);  // p 1, r .5
    auto b = make_report(2, 2, 0, 0);  // p .5, r 1
    EXPECT_DOUBLE_EQ(a.f1, b.f1);
    EXPECT_TRUE(better_than(a, b, f1_precision));
    EXPECT_FALSE(better_than(b, a, f1_precision));
    EXPECT_FALSE(better_than(a, a, f1_precision));
    MetricPrefs recall_first{Metric::Recall, Metric::F1};
    EXPECT_TRUE(better_than(b, a, recall_first));
    EXPECT_THROW(prefs_from_json({{"primary", "f1"}, {"secondary", "f1"}}), ConfigError);
    EXPECT_THROW(prefs_from_json({{"primary", "accuracy"}}), ConfigError);
    EXPECT_EQ(prefs_from_json(to_json(recall_first)).primary, Metric::Recall);
}

TEST(NextToLabel, MostUncertainUnlabelledFirst) {
    std::vector<ScoredPair> results{scored("a", "b", 0.95, true), scored("c", "d", 0.875, true),
                                    scored("e", "f", 0.625, false), scored("g", "h", 0.40, false),
                                    scored("i", "j", 0.76, true)};
    LabelSet labels;
    labels[normalized("i", "j")] = label("i", "j", true);
    auto next = next_to_label(results, labels, 3, Hundredths{75});
    ASSERT_EQ(next.size(), 3u);
    // c and e are equally far from the threshold; the higher similarity ranks first.
    EXPECT_EQ(next[0].source_id, "c");
    EXPECT_EQ(next[1].source_id, "e");
    EXPECT_EQ(next[2].source_id, "a");
    EXPECT_EQ(next_to_label(results, labels, 10, Hundredths{75}).size(), 4u);
}

TEST(DefaultConfig, WeightsAndIgnoreList) {
    auto shapes = parse_ntriples(ts::slurp(ts::data_dir() + "/running_example_shapes.nt"));
    auto spec = extract_domain_spec(shapes, "https://example.org/ds/EventShape", 1);
    auto cfg = default_config(spec, spec);
    EXPECT_EQ(cfg.pre_filter.properties,
              (std::vector<std::string>{"address", "address.addressLocality", "address.postalCode",
                                        "address.streetAddress", "description", "name"}));
    EXPECT_EQ(cfg.comparison.at("address.postalCode").weight.value, 0);
    EXPECT_EQ(cfg.comparison.at("address").weight.value, 100);
    EXPECT_EQ(cfg.comparison.at("address").comparator, Comparator::levenshtein());
    EXPECT_EQ(cfg.plan.at("name").back(), (Standardizer{"setify", {}}));
    EXPECT_EQ(cfg.pre_filter.limit, 50u);

    DefaultConfigOptions boot;
    boot.bootstrap = true;
    EXPECT_EQ(default_config(spec, spec, boot).decision.threshold.value, 30);

    auto other = spec;
    other.properties.pop_back();
    EXPECT_THROW(default_config(spec, other), SpecError);
}

TEST(Evaluator, RunMatchesDirectDetection) {
    auto f = ts::selection_fixture();
    Evaluator ev(f.index, f.index);
    for (int w : {0, 40, 100}) {
        auto cfg = f.start;
        cfg.comparison.at("color").weight.value = w;
        cfg.decision.threshold.value = 70;
        auto direct = run_duplicate_detection(f.index, f.index, cfg);
        auto cached = ev.run(cfg);
        ASSERT_EQ(direct.size(), cached.size());
        for (std::size_t i = 0; i < direct.size(); ++i) {
            EXPECT_EQ(direct[i].source_id, cached[i].source_id);
            EXPECT_EQ(direct[i].target_id, cached[i].target_id);
            EXPECT_DOUBLE_EQ(direct[i].similarity, cached[i].similarity);
            EXPECT_EQ(direct[i].accepted, cached[i].accepted);
            EXPECT_EQ(direct[i].per_path, cached[i].per_path);
        }
        expect_same_report(ev.evaluate(cfg, f.labels), ts::count_report(direct, f.labels));
    }
}

TEST(SearchContext, AuditRecordsEveryEvaluation) {
    auto f = ts::selection_fixture();
    Evaluator ev(f.index, f.index);
    AuditLog audit;
    SearchContext ctx(ev, f.labels, {}, &audit);
    auto r1 = ctx.evaluate(f.start);
    auto r2 = ctx.evaluate(f.start);
    EXPECT_EQ(r1, r2);
    ASSERT_EQ(audit.entries().size(), 2u);
    EXPECT_EQ(audit.entries()[0].config_hash, config_hash(f.start));
    EXPECT_EQ(ctx.evaluations(), 2u);
    auto line = audit.to_jsonl().substr(0, audit.to_jsonl().find('\n'));
    auto back = audit_entry_from_json(nlohmann::json::parse(line));
    EXPECT_EQ(back.config, f.start);
    EXPECT_EQ(back.report, r1);
}

TEST(Heuristics, SelectionReachesExhaustiveOptimum) {
    auto f = ts::selection_fixture();
    auto all = subset_f1s(f);
    double best = *std::max_element(all.begin(), all.end());
    Evaluator ev(f.index, f.index);
    SearchContext ctx(ev, f.labels, {});
    auto fwd = forward_selection(ctx, f.start, SelectionTarget::Weights);
    auto bwd = backward_elimination(ctx, f.start, SelectionTarget::Weights);
    EXPECT_DOUBLE_EQ(fwd.report.f1, best);
    EXPECT_DOUBLE_EQ(bwd.report.f1, best);
    expect_same_report(fwd.report, ts::count_report(run_duplicate_detection(f.index, f.index, fwd.config), f.labels));

    auto bf = brute_force(ctx, f.start, {BruteForceParam::Kind::Subset, {}, SelectionTarget::Weights, {}});
    EXPECT_DOUBLE_EQ(bf.report.f1, best);
}

TEST(Heuristics, SelectionErrors) {
    auto f = ts::selection_fixture();
    Evaluator ev(f.index, f.index);
    SearchContext ctx(ev, f.labels, {});
    EXPECT_THROW(forward_selection(ctx, f.start, SelectionTarget::Weights, {"nope"}), StrategyError);
    EXPECT_THROW(backward_elimination(ctx, f.start, SelectionTarget::Weights, {"title"}), StrategyError);
}

TEST(Heuristics, PreFilterSelectionChangesCandidates) {
    auto f = ts::selection_fixture();
    auto cfg = apply_selection(f.start, SelectionTarget::PreFilterProperties, {"color", "note", "title"}, {"title"});
    EXPECT_EQ(cfg.pre_filter.properties, (std::vector<std::string>{"title"}));
    EXPECT_EQ(cfg.comparison, f.start.comparison);
}

TEST(Heuristics, HillClimbFindsSweepOptimum) {
    auto f = ts::threshold_fixture();
    // Sweep the 0.05 grid directly.
    double best = -1;
    int best_t = -1;
    for (int t = 0; t <= 100; t += 5) {
        auto cfg = f.start;
        cfg.decision.threshold.value = t;
        double f1 = ts::count_report(run_duplicate_detection(f.index, f.index, cfg), f.labels).f1;
        if (f1 > best) best = f1, best_t = t;
    }
    EXPECT_EQ(best_t, 65);
    EXPECT_DOUBLE_EQ(best, 1.0);

    Evaluator ev(f.index, f.index);
    SearchContext ctx(ev, f.labels, {});
    auto start = f.start;
    start.decision.threshold.value = 75;
    auto r = hill_climb(ctx, start, {NumericParam::Kind::DecisionThreshold, {}}, {0.05, 40});
    EXPECT_EQ(r.config.decision.threshold.value, 65);
    EXPECT_DOUBLE_EQ(r.report.f1, best);

    auto bf = brute_force(ctx, start, {BruteForceParam::Kind::Numeric, {NumericParam::Kind::DecisionThreshold, {}}});
    EXPECT_DOUBLE_EQ(bf.report.f1, 1.0);
    EXPECT_GE(bf.config.decision.threshold.value, 62);  // first value with a perfect score
    EXPECT_LE(bf.config.decision.threshold.value, 67);
}

TEST(Heuristics, HillClimbErrors) {
    auto f = ts::threshold_fixture();
    Evaluator ev(f.index, f.index);
    SearchContext ctx(ev, f.labels, {});
    EXPECT_THROW(hill_climb(ctx, f.start, {NumericParam::Kind::DecisionThreshold, {}}, {0.0, 10}), StrategyError);
    EXPECT_THROW(hill_climb(ctx, f.start, {NumericParam::Kind::Weight, "nope"}), StrategyError);
}

TEST(Heuristics, BruteForceSpaceLimit) {
    auto f = ts::selection_fixture();
    Evaluator ev(f.index, f.index);
    SearchContext ctx(ev, f.labels, {});
    auto cfg = f.start;
    for (int i = 0; i < 14; ++i) cfg.comparison["extra" + std::to_string(i)] = {};
    EXPECT_THROW(brute_force(ctx, cfg, {BruteForceParam::Kind::Subset, {}, SelectionTarget::Weights, {}}),
                 SpaceTooLarge);
}

TEST(Heuristics, GeneticIsReproducible) {
    auto f = ts::selection_fixture();
    auto search = [&](std::uint64_t seed, GeneticTarget target) {
        Evaluator ev(f.index, f.index);
        AuditLog audit;
        SearchContext ctx(ev, f.labels, {}, &audit);
        auto r = genetic_search(ctx, f.start, target, {6, 5, 0.3, seed});
        std::vector<std::string> hashes;
        for (const auto& e : audit.entries()) hashes.push_back(e.config_hash);
        return std::pair{r, hashes};
    };
    for (auto target : {GeneticTarget::Comparators, GeneticTarget::Standardizers}) {
        auto [a, ha] = search(3, target);
        auto [b, hb] = search(3, target);
        EXPECT_EQ(a.config, b.config);
        EXPECT_EQ(a.report, b.report);
        EXPECT_EQ(ha, hb);
        EXPECT_EQ(ha.size(), 6u + 5u * 5u);  // the elite is carried over unscored
        auto baseline = ts::count_report(run_duplicate_detection(f.index, f.index, f.start), f.labels);
        EXPECT_FALSE(better_than(baseline, a.report, {}));  // elitism keeps the start
    }
    Evaluator ev(f.index, f.index);
    SearchContext ctx(ev, f.labels, {});
    EXPECT_THROW(genetic_search(ctx, f.start, GeneticTarget::Comparators, {1, 5, 0.2, 1}), StrategyError);
    EXPECT_THROW(genetic_search(ctx, f.start, GeneticTarget::Comparators, {4, 5, 1.5, 1}), StrategyError);
}

TEST(Strategy, JsonRoundTripAndCompatibility) {
    auto j = nlohmann::json::parse(R"([
        {"heuristic": "forward_selection", "target": "weights"},
        {"heuristic": "hill_climb", "target": "decision_threshold", "step": 0.05},
        {"heuristic": "hill_climb", "target": "weight", "path": "title"},
        {"heuristic": "genetic", "target": "comparators", "population": 8, "generations": 10, "seed": 7},
        {"heuristic": "brute_force", "target": "prefilter_properties", "paths": ["title", "note"]}
    ])");
    auto s = strategy_from_json(j);
    ASSERT_EQ(s.size(), 5u);
    EXPECT_EQ(s[1].step, 0.05);
    EXPECT_EQ(s[2].path, "title");
    EXPECT_EQ(s[3].genetic.seed, 7u);
    nlohmann::json back = nlohmann::json::array();
    for (const auto& step : s) back.push_back(to_json(step));
    EXPECT_EQ(strategy_from_json(back).size(), 5u);
    EXPECT_EQ(to_json(strategy_from_json(back)[3]), to_json(s[3]));

    auto bad = [](const char* text) { return strategy_from_json(nlohmann::json::parse(text)); };
    EXPECT_THROW(bad(R"([{"heuristic": "genetic", "target": "weights"}])"), StrategyError);
    EXPECT_THROW(bad(R"([{"heuristic": "hill_climb", "target": "comparators"}])"), StrategyError);
    EXPECT_THROW(bad(R"([{"heuristic": "annealing", "target": "weights"}])"), StrategyError);
    EXPECT_THROW(bad(R"([{"heuristic": "hill_climb", "target": "weight"}])"), StrategyError);
    EXPECT_THROW(bad(R"([{"heuristic": "hill_climb", "target": "decision_threshold", "step": "big"}])"),
                 StrategyError);
    EXPECT_THROW(bad(R"({"heuristic": "hill_climb"})"), StrategyError);
}

TEST(Strategy, ExecuteKeepsBestSoFarWhenAStepFails) {
    auto f = ts::threshold_fixture();
    Evaluator ev(f.index, f.index);
    SearchContext ctx(ev, f.labels, {});
    auto strategy = strategy_from_json(nlohmann::json::parse(R"([
        {"heuristic": "hill_climb", "target": "decision_threshold", "step": 0.05},
        {"heuristic": "hill_climb", "target": "weight", "path": "missing"},
        {"heuristic": "hill_climb", "target": "decision_threshold", "step": 0.01}
    ])"));
    std::vector<std::size_t> progress;
    auto r = execute_strategy(ctx, f.start, strategy, [&](std::size_t k, std::size_t) { progress.push_back(k); });
    EXPECT_EQ(r.steps_completed, 1u);
    ASSERT_TRUE(r.error);
    EXPECT_NE(r.error->find("step 2"), std::string::npos);
    EXPECT_DOUBLE_EQ(r.report.f1, 1.0);
    EXPECT_EQ(progress, (std::vector<std::size_t>{1, 2}));

    SearchContext empty(ev, {}, {});
    EXPECT_THROW(execute_strategy(empty, f.start, strategy), StrategyError);
}

TEST(Strategy, NeverReturnsWorseThanStart) {
    auto f = ts::selection_fixture();
    Evaluator ev(f.index, f.index);
    SearchContext ctx(ev, f.labels, {});
    auto start_report = ctx.evaluate(f.start);
    auto strategy = strategy_from_json(nlohmann::json::parse(R"([
        {"heuristic": "backward_elimination", "target": "prefilter_properties"},
        {"heuristic": "hill_climb", "target": "prefilter_threshold"},
        {"heuristic": "genetic", "target": "standardizers", "population": 4, "generations": 3, "seed": 1}
    ])"));
    auto r = execute_strategy(ctx, f.start, strategy);
    EXPECT_FALSE(r.error);
    EXPECT_EQ(r.steps_completed, 3u);
    EXPECT_FALSE(better_than(start_report, r.report, {}));
}
