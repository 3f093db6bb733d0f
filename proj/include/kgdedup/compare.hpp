#pragma once
// Property-value comparison, weighted instance similarity, the decision
// threshold and the duplicate-detection run that ties the phases together.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kgdedup/error.hpp"
#include "kgdedup/index.hpp"
#include "kgdedup/schema.hpp"
#include "kgdedup/standardize.hpp"
#include "kgdedup/text.hpp"

namespace kgdedup {

// A value in [0,1] with two decimals, stored as an integer count of
// hundredths so that search steps and equality are exact.
struct Hundredths {
    int value = 0;

    static std::optional<Hundredths> from_double(double x) {
        if (!std::isfinite(x) || x < 0.0 || x > 1.0) return std::nullopt;
        double scaled = x * 100.0;
        double r = std::round(scaled);
        if (std::fabs(scaled - r) > 1e-9) return std::nullopt;
        return Hundredths{static_cast<int>(r)};
    }

    double as_double() const noexcept { return value / 100.0; }

    friend auto operator<=>(const Hundredths&, const Hundredths&) = default;
};

struct Comparator {
    enum class Kind { Levenshtein, Exact, JaccardTokens, NumberRatio, NumberAbs, BooleanEq, UriEq };

    Kind kind = Kind::Levenshtein;
    double tolerance = 0.0;  // number_abs only

    static Comparator levenshtein() { return {Kind::Levenshtein, 0.0}; }
    static Comparator exact() { return {Kind::Exact, 0.0}; }
    static Comparator jaccard_tokens() { return {Kind::JaccardTokens, 0.0}; }
    static Comparator number_ratio() { return {Kind::NumberRatio, 0.0}; }
    static Comparator number_abs(double tol) { return {Kind::NumberAbs, tol}; }
    static Comparator boolean_eq() { return {Kind::BooleanEq, 0.0}; }
    static Comparator uri_eq() { return {Kind::UriEq, 0.0}; }

    bool string_typed() const noexcept {
        return kind == Kind::Levenshtein || kind == Kind::Exact || kind == Kind::JaccardTokens;
    }

    std::string_view name() const noexcept {
        switch (kind) {
            case Kind::Levenshtein: return "levenshtein";
            case Kind::Exact: return "exact";
            case Kind::JaccardTokens: return "jaccard_tokens";
            case Kind::NumberRatio: return "number_ratio";
            case Kind::NumberAbs: return "number_abs";
            case Kind::BooleanEq: return "boolean_eq";
            case Kind::UriEq: return "uri_eq";
        }
        return "levenshtein";
    }

    friend auto operator<=>(const Comparator&, const Comparator&) = default;
    friend bool operator==(const Comparator&, const Comparator&) = default;
};

// Every comparator is symmetric and maps into [0,1]. String-typed comparators
// work on canonical strings so mixed categories still compare; the others
// return 0 on a category mismatch.
inline double compare_literal(const FlatValue& a, const FlatValue& b, const Comparator& c) {
    using K = Comparator::Kind;
    switch (c.kind) {
        case K::Levenshtein: return text::levenshtein_similarity(a.canonical(), b.canonical());
        case K::Exact: return a.canonical() == b.canonical() ? 1.0 : 0.0;
        case K::JaccardTokens: return text::jaccard_tokens(a.canonical(), b.canonical());
        case K::NumberRatio: {
            if (!a.is_number() || !b.is_number()) return 0.0;
            double x = a.as_number();
            double y = b.as_number();
            if (x == y) return 1.0;
            if (x == 0.0 || y == 0.0 || (x < 0) != (y < 0)) return 0.0;
            return std::min(std::fabs(x), std::fabs(y)) / std::max(std::fabs(x), std::fabs(y));
        }
        case K::NumberAbs:
            if (!a.is_number() || !b.is_number()) return 0.0;
            return std::fabs(a.as_number() - b.as_number()) <= c.tolerance ? 1.0 : 0.0;
        case K::BooleanEq:
            if (!a.is_bool() || !b.is_bool()) return 0.0;
            return a.as_bool() == b.as_bool() ? 1.0 : 0.0;
        case K::UriEq:
            if (!a.is_ref() || !b.is_ref()) return 0.0;
            return a.as_ref() == b.as_ref() ? 1.0 : 0.0;
    }
    return 0.0;
}

enum class Aggregation { Max, Avg, Min };

inline std::string_view to_string(Aggregation a) {
    switch (a) {
        case Aggregation::Max: return "max";
        case Aggregation::Avg: return "avg";
        case Aggregation::Min: return "min";
    }
    return "max";
}

inline constexpr std::size_t kMaxCrossProductSide = 64;

// Cross-product similarity of two value lists, aggregated. Lists longer than
// 64 elements are truncated. Returns nullopt when either list is empty.
inline std::optional<double> compare_lists(const std::vector<FlatValue>& a, const std::vector<FlatValue>& b,
                                           const Comparator& c, Aggregation agg) {
    if (a.empty() || b.empty()) return std::nullopt;
    std::size_t na = std::min(a.size(), kMaxCrossProductSide);
    std::size_t nb = std::min(b.size(), kMaxCrossProductSide);
    double best = 0.0;
    double worst = 1.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            double s = compare_literal(a[i], b[j], c);
            best = std::max(best, s);
            worst = std::min(worst, s);
            sum += s;
        }
    }
    switch (agg) {
        case Aggregation::Max: return best;
        case Aggregation::Min: return worst;
        case Aggregation::Avg: return std::clamp(sum / static_cast<double>(na * nb), worst, best);
    }
    return best;
}

struct PathComparisonConfig {
    Comparator comparator;
    Aggregation aggregation = Aggregation::Max;
    Hundredths weight{100};

    friend bool operator==(const PathComparisonConfig&, const PathComparisonConfig&) = default;
};

using ComparisonConfig = std::map<std::string, PathComparisonConfig>;

struct DecisionConfig {
    Hundredths threshold{75};

    friend bool operator==(const DecisionConfig&, const DecisionConfig&) = default;
};

struct DDConfig {
    PreFilterConfig pre_filter;
    StandardizationPlan plan;
    ComparisonConfig comparison;
    DecisionConfig decision;

    friend bool operator==(const DDConfig&, const DDConfig&) = default;
};

enum class ComparisonMode { Absent, Literal, Serialized, Structured };

inline std::string_view to_string(ComparisonMode m) {
    switch (m) {
        case ComparisonMode::Absent: return "absent";
        case ComparisonMode::Literal: return "literal";
        case ComparisonMode::Serialized: return "serialized";
        case ComparisonMode::Structured: return "structured";
    }
    return "absent";
}

struct PathComparison {
    std::optional<double> similarity;
    ComparisonMode mode = ComparisonMode::Absent;
};

struct ScoredPair {
    std::string source_id;
    std::string target_id;
    double similarity = 0.0;
    std::map<std::string, std::optional<double>> per_path;
    std::map<std::string, ComparisonMode> modes;
    bool accepted = false;
};

inline bool has_sub_fields(const FlatDocument& doc, std::string_view prefix) {
    std::string p = std::string(prefix) + ".";
    auto it = doc.fields.lower_bound(p);
    return it != doc.fields.end() && it->first.compare(0, p.size(), p) == 0;
}

// Canonical strings of every field strictly below prefix, keys sorted, joined
// by single spaces.
inline std::string serialize_fields(const FlatDocument& doc, std::string_view prefix) {
    std::string p = std::string(prefix) + ".";
    std::string out;
    for (auto it = doc.fields.lower_bound(p); it != doc.fields.end() && it->first.compare(0, p.size(), p) == 0;
         ++it) {
        for (const auto& v : it->second) {
            if (!out.empty()) out += ' ';
            out += v.canonical();
        }
    }
    return out;
}

namespace detail {

// Direct children ("prefix.x") that hold a value or sub-fields.
inline std::set<std::string> direct_children(const FlatDocument& doc, const std::string& prefix) {
    std::set<std::string> out;
    std::string p = prefix + ".";
    for (auto it = doc.fields.lower_bound(p); it != doc.fields.end() && it->first.compare(0, p.size(), p) == 0;
         ++it) {
        auto dot = it->first.find('.', p.size());
        out.insert(dot == std::string::npos ? it->first : it->first.substr(0, dot));
    }
    return out;
}

inline std::vector<FlatValue> literal_side(const FlatDocument& doc, const std::string& key) {
    if (has_sub_fields(doc, key)) return {FlatValue::text(serialize_fields(doc, key))};
    const auto* values = doc.get(key);
    return values ? *values : std::vector<FlatValue>{};
}

inline const PathComparisonConfig& sub_config(const ComparisonConfig& cfg, const std::string& key) {
    static const PathComparisonConfig kFallback{};
    auto it = cfg.find(key);
    return it == cfg.end() ? kFallback : it->second;
}

}  // namespace detail

// Range-aware comparison of one path:
//   both literal       -> element cross product, aggregated
//   one side nested    -> its sub-fields serialized, then compared as a literal
//   both nested        -> children compared individually, equal-weight mean
//   missing on a side  -> absent
inline PathComparison compare_path(const FlatDocument& a, const FlatDocument& b, const std::string& path,
                                   const ComparisonConfig& cfg) {
    const auto& pc = detail::sub_config(cfg, path);
    bool a_struct = has_sub_fields(a, path);
    bool b_struct = has_sub_fields(b, path);
    const auto* av = a.get(path);
    const auto* bv = b.get(path);
    bool a_present = a_struct || (av && !av->empty());
    bool b_present = b_struct || (bv && !bv->empty());
    if (!a_present || !b_present) return {};

    if (a_struct && b_struct) {
        auto ca = detail::direct_children(a, path);
        auto cb = detail::direct_children(b, path);
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& child : ca) {
            if (!cb.count(child)) continue;
            const auto& sub = detail::sub_config(cfg, child);
            auto s = compare_lists(detail::literal_side(a, child), detail::literal_side(b, child), sub.comparator,
                                   sub.aggregation);
            if (!s) continue;
            sum += *s;
            ++n;
        }
        if (n == 0) return {};
        return {std::clamp(sum / static_cast<double>(n), 0.0, 1.0), ComparisonMode::Structured};
    }
    if (a_struct || b_struct) {
        auto s = compare_lists(detail::literal_side(a, path), detail::literal_side(b, path), pc.comparator,
                               pc.aggregation);
        return {s, s ? ComparisonMode::Serialized : ComparisonMode::Absent};
    }
    auto s = compare_lists(*av, *bv, pc.comparator, pc.aggregation);
    return {s, s ? ComparisonMode::Literal : ComparisonMode::Absent};
}

// Weighted mean over the paths present on both sides; absent paths drop out
// of numerator and denominator alike.
inline double weighted_similarity(const std::map<std::string, std::optional<double>>& per_path,
                                  const ComparisonConfig& cfg) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& [key, pc] : cfg) {
        if (pc.weight.value <= 0) continue;
        auto it = per_path.find(key);
        if (it == per_path.end() || !it->second) continue;
        num += pc.weight.value * *it->second;
        den += pc.weight.value;
    }
    return den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
}

inline ScoredPair compare_instances(const FlatDocument& a, const FlatDocument& b, const ComparisonConfig& cfg) {
    ScoredPair pair;
    pair.source_id = a.id;
    pair.target_id = b.id;
    for (const auto& [key, pc] : cfg) {
        if (pc.weight.value <= 0) continue;
        auto r = compare_path(a, b, key, cfg);
        pair.per_path[key] = r.similarity;
        pair.modes[key] = r.mode;
    }
    pair.similarity = weighted_similarity(pair.per_path, cfg);
    return pair;
}

// Strictly above the threshold.
inline bool decide(const ScoredPair& pair, const DecisionConfig& d) { return pair.similarity > d.threshold.as_double(); }

inline void validate(const ComparisonConfig& cfg, const MinimalDomainSpec& spec) {
    bool any_weight = false;
    for (const auto& [key, pc] : cfg) {
        if (!spec.find(key)) throw ConfigError("comparison references unknown path: " + key);
        if (pc.weight.value < 0 || pc.weight.value > 100) throw ConfigError("weight out of range for " + key);
        if (pc.comparator.kind == Comparator::Kind::NumberAbs &&
            (!std::isfinite(pc.comparator.tolerance) || pc.comparator.tolerance < 0)) {
            throw ConfigError("number_abs tolerance must be >= 0 for " + key);
        }
        any_weight = any_weight || pc.weight.value > 0;
    }
    if (!any_weight) throw ConfigError("at least one comparison weight must be > 0");
}

inline void validate(const DDConfig& cfg, const MinimalDomainSpec& source, const MinimalDomainSpec& target) {
    validate(cfg.pre_filter, source);
    validate(cfg.pre_filter, target);
    validate(cfg.plan, source);
    validate(cfg.plan, target);
    validate(cfg.comparison, source);
    validate(cfg.comparison, target);
    if (cfg.decision.threshold.value < 0 || cfg.decision.threshold.value > 100) {
        throw ConfigError("decision threshold out of range");
    }
}

inline bool ranks_before(const ScoredPair& a, const ScoredPair& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.source_id != b.source_id) return a.source_id < b.source_id;
    return a.target_id < b.target_id;
}

using PairKey = std::pair<std::string, std::string>;

// Candidate (source, target) pairs from the pre-filter. A self-join reports
// each unordered pair once as (smaller id, larger id).
inline std::vector<PairKey> candidate_pairs(const TypeIndex& source, const TypeIndex& target,
                                            const PreFilterConfig& pf) {
    bool self_join = &source == &target;
    std::size_t limit = pf.limit == 0 ? std::numeric_limits<std::size_t>::max() : pf.limit;
    std::set<PairKey> seen;
    std::vector<PairKey> out;
    for (const auto& doc : source.documents()) {
        auto exclude = self_join ? std::optional<std::string_view>(doc.id) : std::nullopt;
        for (const auto& c : more_like_this(target, doc, pf, limit, exclude)) {
            PairKey key = self_join && c.id < doc.id ? PairKey{c.id, doc.id} : PairKey{doc.id, c.id};
            if (seen.insert(key).second) out.push_back(std::move(key));
        }
    }
    return out;
}

inline std::vector<ScoredPair> run_duplicate_detection(const TypeIndex& source, const TypeIndex& target,
                                                       const DDConfig& cfg, Diagnostics* diag = nullptr) {
    validate(cfg, source.spec(), target.spec());
    std::map<std::string, FlatDocument> std_source;
    std::map<std::string, FlatDocument> std_target_own;
    auto& std_target = &source == &target ? std_source : std_target_own;
    auto standardized = [&](std::map<std::string, FlatDocument>& cache, const TypeIndex& index,
                            const std::string& id) -> const FlatDocument& {
        auto it = cache.find(id);
        if (it != cache.end()) return it->second;
        return cache.emplace(id, apply_plan(*index.find(id), cfg.plan, diag)).first->second;
    };

    std::vector<ScoredPair> results;
    for (const auto& [sid, tid] : candidate_pairs(source, target, cfg.pre_filter)) {
        const auto& a = standardized(std_source, source, sid);
        const auto& b = standardized(std_target, target, tid);
        auto pair = compare_instances(a, b, cfg.comparison);
        pair.accepted = decide(pair, cfg.decision);
        results.push_back(std::move(pair));
    }
    std::sort(results.begin(), results.end(), ranks_before);
    return results;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const Comparator& c) {
    nlohmann::json j = {{"fn", std::string(c.name())}};
    if (c.kind == Comparator::Kind::NumberAbs) j["params"] = {{"tolerance", c.tolerance}};
    return j;
}

inline Comparator comparator_from_json(const nlohmann::json& j) {
    std::string fn;
    nlohmann::json params = nlohmann::json::object();
    if (j.is_string()) {
        fn = j.get<std::string>();
    } else if (j.is_object() && j.contains("fn") && j["fn"].is_string()) {
        fn = j["fn"].get<std::string>();
        if (j.contains("params")) params = j["params"];
    } else {
        throw ConfigError("comparator must be a name or {\"fn\": ...}");
    }
    if (fn == "levenshtein") return Comparator::levenshtein();
    if (fn == "exact") return Comparator::exact();
    if (fn == "jaccard_tokens") return Comparator::jaccard_tokens();
    if (fn == "number_ratio") return Comparator::number_ratio();
    if (fn == "boolean_eq") return Comparator::boolean_eq();
    if (fn == "uri_eq") return Comparator::uri_eq();
    if (fn == "number_abs") {
        if (!params.is_object() || !params.contains("tolerance") || !params["tolerance"].is_number()) {
            throw ConfigError("number_abs requires a numeric tolerance");
        }
        double tol = params["tolerance"].get<double>();
        if (!std::isfinite(tol) || tol < 0) throw ConfigError("number_abs tolerance must be >= 0");
        return Comparator::number_abs(tol);
    }
    throw ConfigError("unknown comparator: " + fn);
}

inline Aggregation aggregation_from_string(std::string_view s) {
    if (s == "max") return Aggregation::Max;
    if (s == "avg") return Aggregation::Avg;
    if (s == "min") return Aggregation::Min;
    throw ConfigError("unknown aggregation: " + std::string(s));
}

inline Hundredths hundredths_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_number()) throw ConfigError(what + " must be a number");
    auto h = Hundredths::from_double(j.get<double>());
    if (!h) throw ConfigError(what + " must be in [0,1] with at most two decimals");
    return *h;
}

inline nlohmann::json to_json(const DDConfig& cfg) {
    nlohmann::json comparison = nlohmann::json::object();
    for (const auto& [key, pc] : cfg.comparison) {
        comparison[key] = {{"comparator", to_json(pc.comparator)},
                           {"aggregation", std::string(to_string(pc.aggregation))},
                           {"weight", pc.weight.as_double()}};
    }
    return {{"pre_filter",
             {{"properties", cfg.pre_filter.properties},
              {"threshold_pct", cfg.pre_filter.threshold_pct},
              {"limit", cfg.pre_filter.limit}}},
            {"plan", to_json(cfg.plan)},
            {"comparison", comparison},
            {"decision", {{"threshold", cfg.decision.threshold.as_double()}}}};
}

inline DDConfig dd_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (auto section : {"pre_filter", "plan", "comparison", "decision"}) {
        if (!j.contains(section)) throw ConfigError(std::string("config is missing section ") + section);
    }
    DDConfig cfg;
    const auto& pf = j["pre_filter"];
    if (!pf.is_object() || !pf.contains("properties") || !pf["properties"].is_array()) {
        throw ConfigError("pre_filter.properties must be an array");
    }
    for (const auto& p : pf["properties"]) {
        if (!p.is_string()) throw ConfigError("pre_filter.properties must hold strings");
        cfg.pre_filter.properties.push_back(p.get<std::string>());
    }
    if (!pf.contains("threshold_pct") || !pf["threshold_pct"].is_number_integer()) {
        throw ConfigError("pre_filter.threshold_pct must be an integer");
    }
    cfg.pre_filter.threshold_pct = pf["threshold_pct"].get<int>();
    if (cfg.pre_filter.threshold_pct < 0 || cfg.pre_filter.threshold_pct > 100) {
        throw ConfigError("pre_filter.threshold_pct must be in [0,100]");
    }
    if (pf.contains("limit")) {
        if (!pf["limit"].is_number_unsigned()) throw ConfigError("pre_filter.limit must be a non-negative integer");
        cfg.pre_filter.limit = pf["limit"].get<std::size_t>();
    }
    cfg.plan = plan_from_json(j["plan"]);

    if (!j["comparison"].is_object()) throw ConfigError("comparison must be an object");
    for (const auto& [key, entry] : j["comparison"].items()) {
        if (!entry.is_object()) throw ConfigError("comparison entry for " + key + " must be an object");
        PathComparisonConfig pc;
        if (entry.contains("comparator")) pc.comparator = comparator_from_json(entry["comparator"]);
        if (entry.contains("aggregation")) {
            if (!entry["aggregation"].is_string()) throw ConfigError("aggregation must be a string");
            pc.aggregation = aggregation_from_string(entry["aggregation"].get<std::string>());
        }
        if (entry.contains("weight")) pc.weight = hundredths_from_json(entry["weight"], "weight of " + key);
        cfg.comparison[key] = pc;
    }
    const auto& dec = j["decision"];
    if (!dec.is_object() || !dec.contains("threshold")) throw ConfigError("decision.threshold is required");
    cfg.decision.threshold = hundredths_from_json(dec["threshold"], "decision threshold");
    return cfg;
}

inline nlohmann::json to_json(const ScoredPair& p) {
    nlohmann::json per_path = nlohmann::json::object();
    for (const auto& [key, s] : p.per_path) per_path[key] = s ? nlohmann::json(*s) : nlohmann::json(nullptr);
    nlohmann::json modes = nlohmann::json::object();
    for (const auto& [key, m] : p.modes) modes[key] = std::string(to_string(m));
    return {{"source_id", p.source_id}, {"target_id", p.target_id}, {"similarity", p.similarity},
            {"per_path", per_path},     {"modes", modes},           {"accepted", p.accepted}};
}

inline ComparisonMode mode_from_string(std::string_view s) {
    if (s == "literal") return ComparisonMode::Literal;
    if (s == "serialized") return ComparisonMode::Serialized;
    if (s == "structured") return ComparisonMode::Structured;
    return ComparisonMode::Absent;
}

inline ScoredPair scored_pair_from_json(const nlohmann::json& j) {
    ScoredPair p;
    p.source_id = j.at("source_id").get<std::string>();
    p.target_id = j.at("target_id").get<std::string>();
    p.similarity = j.at("similarity").get<double>();
    p.accepted = j.at("accepted").get<bool>();
    for (const auto& [key, v] : j.at("per_path").items()) {
        p.per_path[key] = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
    }
    if (j.contains("modes")) {
        for (const auto& [key, v] : j["modes"].items()) p.modes[key] = mode_from_string(v.get<std::string>());
    }
    return p;
}

inline std::string results_to_jsonl(const std::vector<ScoredPair>& results) {
    std::string out;
    for (const auto& p : results) {
        out += to_json(p).dump();
        out += '\n';
    }
    return out;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string config_hash(const DDConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(cfg).dump())));
    return buf;
}

}  // namespace kgdedup
