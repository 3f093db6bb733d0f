#pragma once
// Result analysis against training labels, configuration search heuristics
// and search strategies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kgdedup/compare.hpp"
#include "kgdedup/error.hpp"
#include "kgdedup/index.hpp"
#include "kgdedup/labels.hpp"
#include "kgdedup/random.hpp"
#include "kgdedup/schema.hpp"
#include "kgdedup/standardize.hpp"

namespace kgdedup {

// ---------------------------------------------------------------------------
// Metrics

struct MetricsReport {
    std::size_t true_pos = 0;
    std::size_t false_pos = 0;
    std::size_t false_neg = 0;
    std::size_t true_neg = 0;
    std::size_t labelled_total = 0;
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 1.0;
    // No accepted labelled pairs or no labelled positives: a metric fell
    // back to the 1.0 convention.
    bool degenerate = true;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// precision = tp/(tp+fp), recall = tp/(tp+fn), each 1 when its denominator is
// 0; f1 = 2pr/(p+r), 0 when p+r = 0. The non-degenerate f1 is evaluated as
// 2tp/(2tp+fp+fn) so equal ratios from different counts compare equal.
inline MetricsReport make_report(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
    MetricsReport r;
    r.true_pos = tp;
    r.false_pos = fp;
    r.false_neg = fn;
    r.true_neg = tn;
    r.labelled_total = tp + fp + fn + tn;
    bool no_accepted = tp + fp == 0;
    bool no_positives = tp + fn == 0;
    r.precision = no_accepted ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    r.recall = no_positives ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (!no_accepted && !no_positives) {
        r.f1 = tp == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
    } else {
        double s = r.precision + r.recall;
        r.f1 = s == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / s;
    }
    r.degenerate = no_accepted || no_positives;
    return r;
}

inline nlohmann::json to_json(const MetricsReport& r) {
    return {{"true_pos", r.true_pos},   {"false_pos", r.false_pos},   {"false_neg", r.false_neg},
            {"true_neg", r.true_neg},   {"labelled_total", r.labelled_total},
            {"precision", r.precision}, {"recall", r.recall},         {"f1", r.f1},
            {"degenerate", r.degenerate}};
}

inline MetricsReport metrics_from_json(const nlohmann::json& j) {
    return make_report(j.at("true_pos").get<std::size_t>(), j.at("false_pos").get<std::size_t>(),
                       j.at("false_neg").get<std::size_t>(), j.at("true_neg").get<std::size_t>());
}

inline std::map<PairKey, bool> accepted_by_pair(const std::vector<ScoredPair>& results) {
    std::map<PairKey, bool> out;
    for (const auto& p : results) out[normalized(p.source_id, p.target_id)] = p.accepted;
    return out;
}

// Only labelled pairs count. A labelled duplicate that never became a
// candidate is a false negative.
inline MetricsReport analyze(const std::vector<ScoredPair>& results, const LabelSet& labels) {
    auto accepted = accepted_by_pair(results);
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (const auto& [key, rec] : labels) {
        auto it = accepted.find(key);
        bool acc = it != accepted.end() && it->second;
        if (rec.is_duplicate) {
            acc ? ++tp : ++fn;
        } else {
            acc ? ++fp : ++tn;
        }
    }
    return make_report(tp, fp, fn, tn);
}

// Closed-world evaluation: every accepted pair outside `positives` is a false
// positive. True negatives are not enumerated.
inline MetricsReport analyze_against_truth(const std::vector<ScoredPair>& results, const std::set<PairKey>& positives) {
    std::size_t tp = 0, fp = 0;
    std::set<PairKey> found;
    for (const auto& p : results) {
        if (!p.accepted) continue;
        auto key = normalized(p.source_id, p.target_id);
        if (positives.count(key)) {
            if (found.insert(key).second) ++tp;
        } else {
            ++fp;
        }
    }
    return make_report(tp, fp, positives.size() - found.size(), 0);
}

enum class Metric { Recall, Precision, F1 };

inline std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::Recall: return "recall";
        case Metric::Precision: return "precision";
        case Metric::F1: return "f1";
    }
    return "f1";
}

inline Metric metric_from_string(std::string_view s) {
    if (s == "recall") return Metric::Recall;
    if (s == "precision") return Metric::Precision;
    if (s == "f1") return Metric::F1;
    throw ConfigError("unknown metric: " + std::string(s));
}

struct MetricPrefs {
    Metric primary = Metric::F1;
    Metric secondary = Metric::Precision;
};

inline MetricPrefs prefs_from_json(const nlohmann::json& j) {
    MetricPrefs p;
    if (j.is_null()) return p;
    if (!j.is_object()) throw ConfigError("prefs must be an object");
    if (j.contains("primary")) p.primary = metric_from_string(j["primary"].get<std::string>());
    if (j.contains("secondary")) p.secondary = metric_from_string(j["secondary"].get<std::string>());
    if (p.primary == p.secondary) throw ConfigError("primary and secondary metric must differ");
    return p;
}

inline nlohmann::json to_json(const MetricPrefs& p) {
    return {{"primary", std::string(to_string(p.primary))}, {"secondary", std::string(to_string(p.secondary))}};
}

inline double metric_value(const MetricsReport& r, Metric m) {
    switch (m) {
        case Metric::Recall: return r.recall;
        case Metric::Precision: return r.precision;
        case Metric::F1: return r.f1;
    }
    return r.f1;
}

// Lexicographic on (primary, secondary); equal reports are not better.
inline bool better_than(const MetricsReport& a, const MetricsReport& b, const MetricPrefs& prefs) {
    double pa = metric_value(a, prefs.primary);
    double pb = metric_value(b, prefs.primary);
    if (pa != pb) return pa > pb;
    return metric_value(a, prefs.secondary) > metric_value(b, prefs.secondary);
}

// Unlabelled pairs, most uncertain (closest to the threshold) first.
inline std::vector<ScoredPair> next_to_label(const std::vector<ScoredPair>& results, const LabelSet& labels,
                                             std::size_t n, Hundredths threshold) {
    std::vector<ScoredPair> pending;
    for (const auto& p : results) {
        if (!labels.count(normalized(p.source_id, p.target_id))) pending.push_back(p);
    }
    double t = threshold.as_double();
    std::stable_sort(pending.begin(), pending.end(), [t](const ScoredPair& a, const ScoredPair& b) {
        double da = std::fabs(a.similarity - t);
        double db = std::fabs(b.similarity - t);
        if (da != db) return da < db;
        return ranks_before(a, b);
    });
    if (pending.size() > n) pending.resize(n);
    return pending;
}

// ---------------------------------------------------------------------------
// Default configuration

inline const std::vector<std::string>& default_ignore_list() {
    static const std::vector<std::string> kIgnore{"compliesWith"};
    return kIgnore;
}

inline bool ignored(const std::string& key, const std::vector<std::string>& ignore) {
    for (const auto& i : ignore) {
        if (key == i || key.rfind(i + ".", 0) == 0) return true;
    }
    return false;
}

inline Comparator default_comparator(const PropertySpec& p) {
    if (p.is_nested_instance) return Comparator::levenshtein();
    switch (p.category) {
        case DatatypeCategory::DdString: return Comparator::levenshtein();
        case DatatypeCategory::DdNumber: return Comparator::number_ratio();
        case DatatypeCategory::DdBoolean: return Comparator::boolean_eq();
    }
    return Comparator::levenshtein();
}

inline constexpr int kDefaultThreshold = 75;
inline constexpr int kBootstrapThreshold = 30;
inline constexpr int kDefaultPreFilterPct = 40;

struct DefaultConfigOptions {
    std::vector<std::string> ignore = default_ignore_list();
    bool bootstrap = false;  // empty label store: start with a very low threshold
    std::size_t candidate_limit = 50;
};

// Every non-ignored path is pre-filtered on and standardized by category.
// Top-level paths are compared with weight 1.00; nested sub-paths get weight 0
// and only supply comparators to the structured comparison of their parent.
inline DDConfig default_config(const MinimalDomainSpec& source, const MinimalDomainSpec& target,
                               const DefaultConfigOptions& opts = {}) {
    auto relevant = [&](const MinimalDomainSpec& s) {
        std::set<std::string> keys;
        for (const auto& p : s.properties) {
            if (!ignored(p.key, opts.ignore)) keys.insert(p.key);
        }
        return keys;
    };
    auto keys = relevant(source);
    if (keys != relevant(target)) throw SpecError("source and target specs do not share the same paths");
    if (keys.empty()) throw SpecError("spec has no comparable paths");

    DDConfig cfg;
    cfg.pre_filter.properties.assign(keys.begin(), keys.end());
    cfg.pre_filter.threshold_pct = kDefaultPreFilterPct;
    cfg.pre_filter.limit = opts.candidate_limit;
    for (const auto& p : source.properties) {
        if (!keys.count(p.key)) continue;
        auto seq = default_standardizers(p);
        if (!seq.empty()) cfg.plan[p.key] = std::move(seq);
        PathComparisonConfig pc;
        pc.comparator = default_comparator(p);
        pc.aggregation = Aggregation::Max;
        pc.weight = Hundredths{p.path.size() == 1 ? 100 : 0};
        cfg.comparison[p.key] = pc;
    }
    bool any_weight = std::any_of(cfg.comparison.begin(), cfg.comparison.end(),
                                  [](const auto& kv) { return kv.second.weight.value > 0; });
    if (!any_weight) throw SpecError("spec has no top-level comparable path");
    cfg.decision.threshold = Hundredths{opts.bootstrap ? kBootstrapThreshold : kDefaultThreshold};
    return cfg;
}

// ---------------------------------------------------------------------------
// Evaluation

// Runs the duplicate-detection phase with memoized candidates and per-path
// similarities. evaluate() only scores labelled candidate pairs, which is all
// the report depends on; run() reproduces run_duplicate_detection exactly.
class Evaluator {
public:
    Evaluator(const TypeIndex& source, const TypeIndex& target) : source_(source), target_(target) {}

    const TypeIndex& source() const noexcept { return source_; }
    const TypeIndex& target() const noexcept { return target_; }
    bool self_join() const noexcept { return &source_ == &target_; }

    std::vector<ScoredPair> run(const DDConfig& cfg) {
        validate(cfg, source_.spec(), target_.spec());
        const auto& cands = candidates(cfg.pre_filter);
        std::vector<ScoredPair> out;
        out.reserve(cands.list.size());
        for (const auto& key : cands.list) out.push_back(score(cfg, key));
        std::sort(out.begin(), out.end(), ranks_before);
        return out;
    }

    MetricsReport evaluate(const DDConfig& cfg, const LabelSet& labels) {
        validate(cfg, source_.spec(), target_.spec());
        const auto& cands = candidates(cfg.pre_filter);
        std::vector<ScoredPair> scored;
        for (const auto& [key, rec] : labels) {
            auto oriented = cands.find(key, self_join());
            if (!oriented) continue;
            scored.push_back(score(cfg, *oriented));
        }
        return analyze(scored, labels);
    }

private:
    struct CandidateSet {
        std::vector<PairKey> list;
        std::set<PairKey> members;

        std::optional<PairKey> find(const PairKey& unordered, bool self_join) const {
            if (members.count(unordered)) return unordered;
            if (!self_join) {
                PairKey flipped{unordered.second, unordered.first};
                if (members.count(flipped)) return flipped;
            }
            return std::nullopt;
        }
    };

    const CandidateSet& candidates(const PreFilterConfig& pf) {
        std::string key = nlohmann::json{pf.properties, pf.threshold_pct, pf.limit}.dump();
        auto it = candidate_cache_.find(key);
        if (it != candidate_cache_.end()) return it->second;
        CandidateSet set;
        set.list = candidate_pairs(source_, target_, pf);
        set.members.insert(set.list.begin(), set.list.end());
        return candidate_cache_.emplace(key, std::move(set)).first->second;
    }

    // Everything compare_path reads for `path`: its own and its sub-paths'
    // comparison entries and standardizers.
    static std::string path_fingerprint(const DDConfig& cfg, const std::string& path) {
        std::string prefix = path + ".";
        nlohmann::json j = nlohmann::json::array();
        j.push_back(path);
        for (auto it = cfg.comparison.lower_bound(path); it != cfg.comparison.end(); ++it) {
            if (it->first != path && it->first.compare(0, prefix.size(), prefix) != 0) break;
            j.push_back({it->first, to_json(it->second.comparator), to_string(it->second.aggregation)});
        }
        for (auto it = cfg.plan.lower_bound(path); it != cfg.plan.end(); ++it) {
            if (it->first != path && it->first.compare(0, prefix.size(), prefix) != 0) break;
            nlohmann::json seq = nlohmann::json::array();
            for (const auto& s : it->second) seq.push_back(to_json(s));
            j.push_back({it->first, seq});
        }
        return j.dump();
    }

    static FlatDocument project(const FlatDocument& doc, const std::string& path, const StandardizationPlan& plan) {
        FlatDocument out;
        out.id = doc.id;
        std::string prefix = path + ".";
        for (auto it = doc.fields.lower_bound(path); it != doc.fields.end(); ++it) {
            if (it->first != path && it->first.compare(0, prefix.size(), prefix) != 0) {
                if (it->first > prefix) break;
                continue;
            }
            out.fields.insert(*it);
        }
        return apply_plan(out, plan);
    }

    ScoredPair score(const DDConfig& cfg, const PairKey& key) {
        const FlatDocument& a = *source_.find(key.first);
        const FlatDocument& b = *target_.find(key.second);
        ScoredPair pair;
        pair.source_id = key.first;
        pair.target_id = key.second;
        for (const auto& [path, pc] : cfg.comparison) {
            if (pc.weight.value <= 0) continue;
            auto& cache = path_cache_[path_fingerprint(cfg, path)];
            auto it = cache.find(key);
            if (it == cache.end()) {
                auto r = compare_path(project(a, path, cfg.plan), project(b, path, cfg.plan), path, cfg.comparison);
                it = cache.emplace(key, r).first;
            }
            pair.per_path[path] = it->second.similarity;
            pair.modes[path] = it->second.mode;
        }
        pair.similarity = weighted_similarity(pair.per_path, cfg.comparison);
        pair.accepted = decide(pair, cfg.decision);
        return pair;
    }

    const TypeIndex& source_;
    const TypeIndex& target_;
    std::map<std::string, CandidateSet> candidate_cache_;
    std::map<std::string, std::map<PairKey, PathComparison>> path_cache_;
};

struct AuditEntry {
    std::string config_hash;
    DDConfig config;
    MetricsReport report;
    std::string timestamp;
};

inline nlohmann::json to_json(const AuditEntry& e) {
    return {{"config_hash", e.config_hash},
            {"config", to_json(e.config)},
            {"report", to_json(e.report)},
            {"timestamp", e.timestamp}};
}

inline AuditEntry audit_entry_from_json(const nlohmann::json& j) {
    return {j.at("config_hash").get<std::string>(), dd_config_from_json(j.at("config")),
            metrics_from_json(j.at("report")), j.at("timestamp").get<std::string>()};
}

// Append-only record of every configuration evaluated during a search.
class AuditLog {
public:
    AuditLog() = default;
    explicit AuditLog(std::filesystem::path file) : file_(std::move(file)) {}

    void append(AuditEntry e) {
        if (file_) {
            std::ofstream out(*file_, std::ios::app);
            out << to_json(e).dump() << '\n';
            if (!out) throw StoreError("cannot append to " + file_->string());
        }
        entries_.push_back(std::move(e));
    }

    const std::vector<AuditEntry>& entries() const noexcept { return entries_; }

    std::string to_jsonl() const {
        std::string out;
        for (const auto& e : entries_) {
            out += to_json(e).dump();
            out += '\n';
        }
        return out;
    }

private:
    std::optional<std::filesystem::path> file_;
    std::vector<AuditEntry> entries_;
};

// Everything a heuristic needs to score a configuration.
class SearchContext {
public:
    SearchContext(Evaluator& evaluator, LabelSet labels, MetricPrefs prefs, AuditLog* audit = nullptr)
        : evaluator_(evaluator), labels_(std::move(labels)), prefs_(prefs), audit_(audit) {}

    const MetricPrefs& prefs() const noexcept { return prefs_; }
    const LabelSet& labels() const noexcept { return labels_; }
    const MinimalDomainSpec& spec() const noexcept { return evaluator_.source().spec(); }
    std::size_t evaluations() const noexcept { return evaluations_; }

    MetricsReport evaluate(const DDConfig& cfg) {
        ++evaluations_;
        std::string key = to_json(cfg).dump();
        auto it = memo_.find(key);
        MetricsReport report = it != memo_.end() ? it->second : evaluator_.evaluate(cfg, labels_);
        memo_.emplace(key, report);
        if (audit_) audit_->append({config_hash(cfg), cfg, report, utc_timestamp()});
        return report;
    }

    bool better(const MetricsReport& a, const MetricsReport& b) const { return better_than(a, b, prefs_); }

private:
    Evaluator& evaluator_;
    LabelSet labels_;
    MetricPrefs prefs_;
    AuditLog* audit_;
    std::map<std::string, MetricsReport> memo_;
    std::size_t evaluations_ = 0;
};

struct SearchResult {
    DDConfig config;
    MetricsReport report;
};

// ---------------------------------------------------------------------------
// Heuristics

enum class SelectionTarget { Weights, PreFilterProperties };

// Paths a selection heuristic chooses from: top-level compared paths for
// weights, every compared path for the pre-filter.
inline std::vector<std::string> selection_universe(const DDConfig& cfg, SelectionTarget target) {
    std::vector<std::string> out;
    for (const auto& [key, pc] : cfg.comparison) {
        if (target == SelectionTarget::PreFilterProperties || key.find('.') == std::string::npos) out.push_back(key);
    }
    return out;
}

inline DDConfig apply_selection(DDConfig cfg, SelectionTarget target, const std::vector<std::string>& universe,
                                const std::vector<std::string>& selected) {
    std::set<std::string> chosen(selected.begin(), selected.end());
    if (target == SelectionTarget::Weights) {
        for (const auto& key : universe) {
            auto& w = cfg.comparison.at(key).weight;
            if (!chosen.count(key)) {
                w.value = 0;
            } else if (w.value == 0) {
                w.value = 100;
            }
        }
    } else {
        cfg.pre_filter.properties.clear();
        for (const auto& key : universe) {
            if (chosen.count(key)) cfg.pre_filter.properties.push_back(key);
        }
    }
    return cfg;
}

namespace detail {

inline void keep_better(SearchContext& ctx, SearchResult& best, const DDConfig& cfg, const MetricsReport& r) {
    if (ctx.better(r, best.report)) best = {cfg, r};
}

inline std::vector<std::string> check_paths(const DDConfig& cfg, SelectionTarget target,
                                            std::vector<std::string> paths) {
    if (paths.empty()) paths = selection_universe(cfg, target);
    for (const auto& p : paths) {
        if (!cfg.comparison.count(p)) throw StrategyError("unknown path for selection: " + p);
    }
    return paths;
}

}  // namespace detail

// Scores each path alone, then adds paths best-first while the report
// strictly improves.
inline SearchResult forward_selection(SearchContext& ctx, const DDConfig& start, SelectionTarget target,
                                      std::vector<std::string> paths = {}) {
    paths = detail::check_paths(start, target, std::move(paths));
    if (paths.empty()) throw StrategyError("forward selection needs at least one path");
    SearchResult best{start, ctx.evaluate(start)};

    std::vector<std::pair<std::string, MetricsReport>> isolated;
    for (const auto& p : paths) {
        auto cfg = apply_selection(start, target, paths, {p});
        isolated.emplace_back(p, ctx.evaluate(cfg));
    }
    std::stable_sort(isolated.begin(), isolated.end(),
                     [&](const auto& a, const auto& b) { return ctx.better(a.second, b.second); });

    std::vector<std::string> selected{isolated.front().first};
    SearchResult current{apply_selection(start, target, paths, selected), isolated.front().second};
    detail::keep_better(ctx, best, current.config, current.report);
    for (std::size_t i = 1; i < isolated.size(); ++i) {
        auto trial = selected;
        trial.push_back(isolated[i].first);
        auto cfg = apply_selection(start, target, paths, trial);
        auto r = ctx.evaluate(cfg);
        if (!ctx.better(r, current.report)) break;
        selected = std::move(trial);
        current = {cfg, r};
        detail::keep_better(ctx, best, cfg, r);
    }
    return best;
}

// Starts from every path selected and drops the worst isolated paths while
// the report does not get worse. The last path is never dropped.
inline SearchResult backward_elimination(SearchContext& ctx, const DDConfig& start, SelectionTarget target,
                                         std::vector<std::string> paths = {}) {
    paths = detail::check_paths(start, target, std::move(paths));
    if (paths.size() < 2) throw StrategyError("backward elimination needs at least two paths");
    SearchResult best{start, ctx.evaluate(start)};

    std::vector<std::pair<std::string, MetricsReport>> isolated;
    for (const auto& p : paths) {
        auto cfg = apply_selection(start, target, paths, {p});
        isolated.emplace_back(p, ctx.evaluate(cfg));
    }
    std::stable_sort(isolated.begin(), isolated.end(),
                     [&](const auto& a, const auto& b) { return ctx.better(b.second, a.second); });

    std::vector<std::string> remaining = paths;
    auto all_cfg = apply_selection(start, target, paths, remaining);
    SearchResult current{all_cfg, ctx.evaluate(all_cfg)};
    detail::keep_better(ctx, best, current.config, current.report);
    for (const auto& [worst, report] : isolated) {
        if (remaining.size() <= 1) break;
        std::vector<std::string> trial;
        for (const auto& p : remaining) {
            if (p != worst) trial.push_back(p);
        }
        auto cfg = apply_selection(start, target, paths, trial);
        auto r = ctx.evaluate(cfg);
        if (ctx.better(current.report, r)) break;
        remaining = std::move(trial);
        current = {cfg, r};
        if (!ctx.better(best.report, r)) best = current;
    }
    return best;
}

// A numeric configuration value on an integer grid in [0,100]: percent for
// the pre-filter, hundredths for weights and the decision threshold.
struct NumericParam {
    enum class Kind { PreFilterPct, DecisionThreshold, Weight };
    Kind kind = Kind::DecisionThreshold;
    std::string path;  // Weight only

    int get(const DDConfig& cfg) const {
        switch (kind) {
            case Kind::PreFilterPct: return cfg.pre_filter.threshold_pct;
            case Kind::DecisionThreshold: return cfg.decision.threshold.value;
            case Kind::Weight: return cfg.comparison.at(path).weight.value;
        }
        return 0;
    }

    DDConfig set(DDConfig cfg, int v) const {
        switch (kind) {
            case Kind::PreFilterPct: cfg.pre_filter.threshold_pct = v; break;
            case Kind::DecisionThreshold: cfg.decision.threshold.value = v; break;
            case Kind::Weight: cfg.comparison.at(path).weight.value = v; break;
        }
        return cfg;
    }

    // Converts a step in the parameter's natural unit (percent, or a [0,1]
    // fraction) to grid units.
    int units(double step) const {
        return kind == Kind::PreFilterPct ? static_cast<int>(std::lround(step))
                                          : static_cast<int>(std::lround(step * 100.0));
    }
};

struct HillClimbOptions {
    double step = 0.05;  // natural unit; 5 is the usual choice for the pre-filter percentage
    int max_iters = 40;
};

namespace detail {

inline std::optional<MetricsReport> try_evaluate(SearchContext& ctx, const DDConfig& cfg) {
    try {
        return ctx.evaluate(cfg);
    } catch (const ConfigError&) {
        return std::nullopt;  // e.g. every weight zeroed
    }
}

}  // namespace detail

// Moves to the strictly better of value +/- step (clamped to [0,100]) until
// neither neighbour improves. Ties between neighbours go to the lower value.
inline SearchResult hill_climb(SearchContext& ctx, const DDConfig& start, const NumericParam& param,
                               const HillClimbOptions& opts = {}) {
    if (param.kind == NumericParam::Kind::Weight && !start.comparison.count(param.path)) {
        throw StrategyError("hill climbing on unknown weight path: " + param.path);
    }
    int step = param.units(opts.step);
    if (step <= 0) throw StrategyError("hill climbing step must be > 0");
    SearchResult current{start, ctx.evaluate(start)};
    int value = param.get(start);
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        std::optional<std::pair<int, SearchResult>> move;
        for (int candidate : {std::max(0, value - step), std::min(100, value + step)}) {
            if (candidate == value) continue;
            auto cfg = param.set(current.config, candidate);
            auto r = detail::try_evaluate(ctx, cfg);
            if (!r || !ctx.better(*r, current.report)) continue;
            if (!move || ctx.better(*r, move->second.report)) move.emplace(candidate, SearchResult{cfg, *r});
        }
        if (!move) break;
        value = move->first;
        current = std::move(move->second);
    }
    return current;
}

struct BruteForceParam {
    enum class Kind { Numeric, Subset };
    Kind kind = Kind::Numeric;
    NumericParam numeric;
    SelectionTarget selection = SelectionTarget::Weights;
    std::vector<std::string> paths;  // Subset; empty = selection universe
};

inline constexpr std::size_t kMaxBruteForceSpace = 10000;

// Evaluates every value (ascending) or every non-empty subset (lexicographic)
// and keeps the first best.
inline SearchResult brute_force(SearchContext& ctx, const DDConfig& start, const BruteForceParam& param) {
    std::optional<SearchResult> best;
    auto consider = [&](const DDConfig& cfg) {
        auto r = detail::try_evaluate(ctx, cfg);
        if (r && (!best || ctx.better(*r, best->report))) best = SearchResult{cfg, *r};
    };

    if (param.kind == BruteForceParam::Kind::Numeric) {
        if (param.numeric.kind == NumericParam::Kind::Weight && !start.comparison.count(param.numeric.path)) {
            throw StrategyError("brute force on unknown weight path: " + param.numeric.path);
        }
        for (int v = 0; v <= 100; ++v) consider(param.numeric.set(start, v));
    } else {
        auto paths = detail::check_paths(start, param.selection, param.paths);
        if (paths.size() >= 63 || (std::uint64_t{1} << paths.size()) > kMaxBruteForceSpace) {
            throw SpaceTooLarge("2^" + std::to_string(paths.size()) + " subsets exceed the brute-force limit");
        }
        std::vector<std::string> current;
        auto dfs = [&](auto&& self, std::size_t from) -> void {
            for (std::size_t i = from; i < paths.size(); ++i) {
                current.push_back(paths[i]);
                consider(apply_selection(start, param.selection, paths, current));
                self(self, i + 1);
                current.pop_back();
            }
        };
        dfs(dfs, 0);
    }

    SearchResult initial{start, ctx.evaluate(start)};
    if (!best || ctx.better(initial.report, best->report)) return initial;
    return *best;
}

enum class GeneticTarget { Comparators, Standardizers };

struct GeneticOptions {
    std::size_t population = 8;
    std::size_t generations = 10;
    double mutation_prob = 0.2;
    std::uint64_t seed = 7;
};

namespace detail {

struct Gene {
    PathComparisonConfig comparison;
    std::vector<Standardizer> standardizers;

    friend bool operator==(const Gene&, const Gene&) = default;
};

inline std::vector<Comparator> comparator_catalog(const PropertySpec& p) {
    if (p.is_nested_instance) {
        return {Comparator::levenshtein(), Comparator::jaccard_tokens(), Comparator::exact(), Comparator::uri_eq()};
    }
    switch (p.category) {
        case DatatypeCategory::DdString:
            return {Comparator::levenshtein(), Comparator::jaccard_tokens(), Comparator::exact()};
        case DatatypeCategory::DdNumber:
            return {Comparator::number_ratio(), Comparator::number_abs(0.5), Comparator::number_abs(5.0),
                    Comparator::levenshtein(), Comparator::exact()};
        case DatatypeCategory::DdBoolean:
            return {Comparator::boolean_eq(), Comparator::exact()};
    }
    return {Comparator::levenshtein()};
}

inline std::vector<Standardizer> element_catalog(const PropertySpec& p) {
    std::vector<Standardizer> out;
    bool string_like = p.category == DatatypeCategory::DdString || p.is_nested_instance;
    if (string_like) {
        for (auto name : {"lowercase", "trim", "collapse_whitespace", "strip_punctuation", "strip_diacritics"}) {
            out.push_back({name, {}});
        }
    }
    if (p.category == DatatypeCategory::DdNumber) {
        for (int d = 0; d <= 2; ++d) out.push_back({"round", {{"decimals", d}}});
    }
    out.push_back({"identity", {}});
    return out;
}

inline Gene random_gene(std::mt19937_64& rng, const PropertySpec& p, const Gene& current, GeneticTarget target) {
    Gene g = current;
    if (target == GeneticTarget::Comparators) {
        auto comps = comparator_catalog(p);
        std::vector<Aggregation> aggs = p.multi_valued
                                            ? std::vector<Aggregation>{Aggregation::Max, Aggregation::Avg,
                                                                       Aggregation::Min}
                                            : std::vector<Aggregation>{current.comparison.aggregation};
        std::size_t pick = uniform_index(rng, comps.size() * aggs.size());
        g.comparison.comparator = comps[pick / aggs.size()];
        g.comparison.aggregation = aggs[pick % aggs.size()];
    } else {
        auto catalog = element_catalog(p);
        std::size_t len = uniform_index(rng, 4);
        g.standardizers.clear();
        for (std::size_t i = 0; i < len; ++i) g.standardizers.push_back(catalog[uniform_index(rng, catalog.size())]);
        if (p.multi_valued && uniform_index(rng, 2) == 1) g.standardizers.push_back({"setify", {}});
    }
    return g;
}

}  // namespace detail

// Genome: one gene per mutable path (comparator + aggregation, or a
// standardizer sequence). Tournament selection of size 2, single-point
// crossover, per-gene mutation, elitism of one. Deterministic for a seed.
inline SearchResult genetic_search(SearchContext& ctx, const DDConfig& start, GeneticTarget target,
                                   const GeneticOptions& opts = {}) {
    using detail::Gene;
    if (opts.population < 2) throw StrategyError("genetic search needs a population of at least 2");
    if (opts.mutation_prob < 0.0 || opts.mutation_prob > 1.0) throw StrategyError("mutation_prob must be in [0,1]");

    std::vector<const PropertySpec*> paths;
    for (const auto& [key, pc] : start.comparison) {
        if (const auto* p = ctx.spec().find(key)) paths.push_back(p);
    }
    if (paths.empty()) throw ConfigError("genetic search has no mutable paths");

    using Genome = std::vector<Gene>;
    Genome base;
    for (const auto* p : paths) {
        auto it = start.plan.find(p->key);
        base.push_back({start.comparison.at(p->key), it == start.plan.end() ? std::vector<Standardizer>{} : it->second});
    }
    auto to_config = [&](const Genome& g) {
        DDConfig cfg = start;
        for (std::size_t i = 0; i < paths.size(); ++i) {
            const auto& key = paths[i]->key;
            if (target == GeneticTarget::Comparators) {
                cfg.comparison[key] = g[i].comparison;
            } else if (g[i].standardizers.empty()) {
                cfg.plan.erase(key);
            } else {
                cfg.plan[key] = g[i].standardizers;
            }
        }
        return cfg;
    };

    std::mt19937_64 rng(opts.seed);
    auto mutate = [&](Genome g) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (uniform01(rng) < opts.mutation_prob) g[i] = detail::random_gene(rng, *paths[i], g[i], target);
        }
        return g;
    };

    struct Scored {
        Genome genome;
        MetricsReport report;
    };
    auto score = [&](Genome g) { return Scored{g, ctx.evaluate(to_config(g))}; };

    std::vector<Scored> population;
    population.push_back(score(base));
    while (population.size() < opts.population) population.push_back(score(mutate(base)));

    Scored best = population.front();
    auto track = [&] {
        for (const auto& s : population) {
            if (ctx.better(s.report, best.report)) best = s;
        }
    };
    track();

    auto tournament = [&]() -> const Scored& {
        const auto& a = population[uniform_index(rng, population.size())];
        const auto& b = population[uniform_index(rng, population.size())];
        return ctx.better(b.report, a.report) ? b : a;
    };

    for (std::size_t gen = 0; gen < opts.generations; ++gen) {
        std::vector<Scored> next;
        next.push_back(best);
        while (next.size() < opts.population) {
            Genome child = tournament().genome;
            const Genome& other = tournament().genome;
            if (child.size() >= 2) {
                std::size_t cut = 1 + uniform_index(rng, child.size() - 1);
                std::copy(other.begin() + static_cast<std::ptrdiff_t>(cut), other.end(),
                          child.begin() + static_cast<std::ptrdiff_t>(cut));
            }
            next.push_back(score(mutate(std::move(child))));
        }
        population = std::move(next);
        track();
    }
    return {to_config(best.genome), best.report};
}

// ---------------------------------------------------------------------------
// Strategies

enum class Heuristic { BruteForce, ForwardSelection, BackwardElimination, HillClimb, Genetic };

enum class StrategyTarget {
    PreFilterProperties,
    PreFilterThreshold,
    Standardizers,
    Comparators,
    Weights,
    Weight,
    DecisionThreshold
};

struct StrategyStep {
    Heuristic heuristic = Heuristic::HillClimb;
    StrategyTarget target = StrategyTarget::DecisionThreshold;
    std::string path;                 // target Weight
    std::vector<std::string> paths;   // selection targets; empty = all
    std::optional<double> step;       // hill climbing
    int max_iters = 40;
    GeneticOptions genetic;
};

using Strategy = std::vector<StrategyStep>;

inline std::string_view to_string(Heuristic h) {
    switch (h) {
        case Heuristic::BruteForce: return "brute_force";
        case Heuristic::ForwardSelection: return "forward_selection";
        case Heuristic::BackwardElimination: return "backward_elimination";
        case Heuristic::HillClimb: return "hill_climb";
        case Heuristic::Genetic: return "genetic";
    }
    return "hill_climb";
}

inline std::string_view to_string(StrategyTarget t) {
    switch (t) {
        case StrategyTarget::PreFilterProperties: return "prefilter_properties";
        case StrategyTarget::PreFilterThreshold: return "prefilter_threshold";
        case StrategyTarget::Standardizers: return "standardizers";
        case StrategyTarget::Comparators: return "comparators";
        case StrategyTarget::Weights: return "weights";
        case StrategyTarget::Weight: return "weight";
        case StrategyTarget::DecisionThreshold: return "decision_threshold";
    }
    return "decision_threshold";
}

inline bool compatible(Heuristic h, StrategyTarget t) {
    using T = StrategyTarget;
    bool numeric = t == T::PreFilterThreshold || t == T::DecisionThreshold || t == T::Weight;
    bool selection = t == T::PreFilterProperties || t == T::Weights;
    switch (h) {
        case Heuristic::HillClimb: return numeric;
        case Heuristic::ForwardSelection:
        case Heuristic::BackwardElimination: return selection;
        case Heuristic::Genetic: return t == T::Comparators || t == T::Standardizers;
        case Heuristic::BruteForce: return numeric || selection;
    }
    return false;
}

inline StrategyStep step_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw StrategyError("strategy step must be an object");
    auto str = [&](const char* key) -> std::string {
        if (!j.contains(key) || !j[key].is_string()) throw StrategyError(std::string("strategy step needs ") + key);
        return j[key].get<std::string>();
    };
    StrategyStep s;
    std::string h = str("heuristic");
    if (h == "brute_force") {
        s.heuristic = Heuristic::BruteForce;
    } else if (h == "forward_selection") {
        s.heuristic = Heuristic::ForwardSelection;
    } else if (h == "backward_elimination") {
        s.heuristic = Heuristic::BackwardElimination;
    } else if (h == "hill_climb") {
        s.heuristic = Heuristic::HillClimb;
    } else if (h == "genetic") {
        s.heuristic = Heuristic::Genetic;
    } else {
        throw StrategyError("unknown heuristic: " + h);
    }
    std::string t = str("target");
    static const std::map<std::string, StrategyTarget> kTargets = {
        {"prefilter_properties", StrategyTarget::PreFilterProperties},
        {"prefilter_threshold", StrategyTarget::PreFilterThreshold},
        {"standardizers", StrategyTarget::Standardizers},
        {"comparators", StrategyTarget::Comparators},
        {"weights", StrategyTarget::Weights},
        {"weight", StrategyTarget::Weight},
        {"decision_threshold", StrategyTarget::DecisionThreshold},
    };
    auto it = kTargets.find(t);
    if (it == kTargets.end()) throw StrategyError("unknown strategy target: " + t);
    s.target = it->second;
    if (!compatible(s.heuristic, s.target)) throw StrategyError(h + " cannot target " + t);
    if (s.target == StrategyTarget::Weight) s.path = str("path");
    try {
        if (j.contains("paths")) s.paths = j["paths"].get<std::vector<std::string>>();
        if (j.contains("step")) s.step = j["step"].get<double>();
        if (j.contains("max_iters")) s.max_iters = j["max_iters"].get<int>();
        if (j.contains("population")) s.genetic.population = j["population"].get<std::size_t>();
        if (j.contains("generations")) s.genetic.generations = j["generations"].get<std::size_t>();
        if (j.contains("mutation_prob")) s.genetic.mutation_prob = j["mutation_prob"].get<double>();
        if (j.contains("seed")) s.genetic.seed = j["seed"].get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw StrategyError(std::string("invalid strategy step option: ") + e.what());
    }
    return s;
}

inline nlohmann::json to_json(const StrategyStep& s) {
    nlohmann::json j = {{"heuristic", std::string(to_string(s.heuristic))},
                        {"target", std::string(to_string(s.target))}};
    if (s.target == StrategyTarget::Weight) j["path"] = s.path;
    if (!s.paths.empty()) j["paths"] = s.paths;
    if (s.heuristic == Heuristic::HillClimb) {
        if (s.step) j["step"] = *s.step;
        j["max_iters"] = s.max_iters;
    }
    if (s.heuristic == Heuristic::Genetic) {
        j["population"] = s.genetic.population;
        j["generations"] = s.genetic.generations;
        j["mutation_prob"] = s.genetic.mutation_prob;
        j["seed"] = s.genetic.seed;
    }
    return j;
}

inline Strategy strategy_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw StrategyError("strategy must be a JSON array of steps");
    Strategy s;
    for (const auto& step : j) s.push_back(step_from_json(step));
    return s;
}

inline NumericParam numeric_param(const StrategyStep& s) {
    switch (s.target) {
        case StrategyTarget::PreFilterThreshold: return {NumericParam::Kind::PreFilterPct, {}};
        case StrategyTarget::Weight: return {NumericParam::Kind::Weight, s.path};
        default: return {NumericParam::Kind::DecisionThreshold, {}};
    }
}

inline SelectionTarget selection_target(const StrategyStep& s) {
    return s.target == StrategyTarget::PreFilterProperties ? SelectionTarget::PreFilterProperties
                                                           : SelectionTarget::Weights;
}

inline SearchResult run_step(SearchContext& ctx, const DDConfig& start, const StrategyStep& s) {
    switch (s.heuristic) {
        case Heuristic::ForwardSelection: return forward_selection(ctx, start, selection_target(s), s.paths);
        case Heuristic::BackwardElimination: return backward_elimination(ctx, start, selection_target(s), s.paths);
        case Heuristic::HillClimb: {
            auto param = numeric_param(s);
            double step = s.step.value_or(param.kind == NumericParam::Kind::PreFilterPct ? 5.0 : 0.05);
            return hill_climb(ctx, start, param, {step, s.max_iters});
        }
        case Heuristic::Genetic:
            return genetic_search(ctx, start,
                                  s.target == StrategyTarget::Comparators ? GeneticTarget::Comparators
                                                                          : GeneticTarget::Standardizers,
                                  s.genetic);
        case Heuristic::BruteForce: {
            BruteForceParam p;
            if (s.target == StrategyTarget::Weights || s.target == StrategyTarget::PreFilterProperties) {
                p.kind = BruteForceParam::Kind::Subset;
                p.selection = selection_target(s);
                p.paths = s.paths;
            } else {
                p.numeric = numeric_param(s);
            }
            return brute_force(ctx, start, p);
        }
    }
    throw StrategyError("unknown heuristic");
}

struct StrategyResult {
    DDConfig config;
    MetricsReport report;
    std::size_t steps_completed = 0;
    std::optional<std::string> error;  // set when a step aborted the strategy
};

// Applies the steps in order, each from the best configuration so far. A
// failing step stops the strategy and keeps the best-so-far configuration.
inline StrategyResult execute_strategy(SearchContext& ctx, const DDConfig& start, const Strategy& strategy,
                                       const std::function<void(std::size_t, std::size_t)>& on_step = {}) {
    if (ctx.labels().empty()) throw StrategyError("no training labels to optimize against");
    StrategyResult result{start, ctx.evaluate(start), 0, std::nullopt};
    for (std::size_t i = 0; i < strategy.size(); ++i) {
        if (on_step) on_step(i + 1, strategy.size());
        try {
            auto r = run_step(ctx, result.config, strategy[i]);
            if (!ctx.better(result.report, r.report)) {
                result.config = std::move(r.config);
                result.report = r.report;
            }
            ++result.steps_completed;
        } catch (const Error& e) {
            result.error = "step " + std::to_string(i + 1) + " (" + std::string(to_string(strategy[i].heuristic)) +
                           "): " + e.what();
            break;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Simulated labelling loop

struct LearningRound {
    std::size_t round = 0;
    std::size_t labelled = 0;
    DDConfig config;
    MetricsReport training;
    std::optional<MetricsReport> truth;
    std::optional<std::string> error;
};

struct SimulationOptions {
    std::size_t rounds = 5;
    std::size_t per_round = 20;
    Strategy strategy;
    MetricPrefs prefs;
    DefaultConfigOptions defaults{default_ignore_list(), true, 50};
};

// Bootstraps from the default configuration, then alternates: label the most
// uncertain pairs with the oracle, run the strategy, re-run detection.
inline std::vector<LearningRound> simulate_active_learning(
    const TypeIndex& source, const TypeIndex& target, const std::function<bool(const PairKey&)>& oracle,
    const SimulationOptions& opts, const std::set<PairKey>* truth = nullptr, LabelStore* store = nullptr,
    AuditLog* audit = nullptr) {
    LabelStore local;
    LabelStore& labels = store ? *store : local;
    Evaluator evaluator(source, target);
    DDConfig cfg = default_config(source.spec(), target.spec(), opts.defaults);
    std::vector<LearningRound> rounds;
    for (std::size_t r = 1; r <= opts.rounds; ++r) {
        auto results = evaluator.run(cfg);
        for (const auto& p : next_to_label(results, labels.snapshot(), opts.per_round, cfg.decision.threshold)) {
            labels.record(p.source_id, p.target_id, oracle(normalized(p.source_id, p.target_id)));
        }
        LearningRound round;
        round.round = r;
        round.labelled = labels.size();
        if (labels.size() > 0) {
            SearchContext ctx(evaluator, labels.snapshot(), opts.prefs, audit);
            auto sr = execute_strategy(ctx, cfg, opts.strategy);
            cfg = sr.config;
            round.training = sr.report;
            round.error = sr.error;
        }
        round.config = cfg;
        if (truth) round.truth = analyze_against_truth(evaluator.run(cfg), *truth);
        rounds.push_back(std::move(round));
    }
    return rounds;
}

}  // namespace kgdedup
