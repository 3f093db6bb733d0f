#pragma once
// Flat path-keyed documents, the per-type index and more-like-this candidate
// retrieval.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "kgdedup/error.hpp"
#include "kgdedup/kg.hpp"
#include "kgdedup/schema.hpp"
#include "kgdedup/text.hpp"

namespace kgdedup {

inline std::string format_number(double v) {
    if (v == 0.0) v = 0.0;  // no "-0"
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_number(std::string_view s) {
    std::string t = text::trim(s);
    std::string_view v = t;
    if (!v.empty() && v.front() == '+') v.remove_prefix(1);
    if (v.empty()) return std::nullopt;
    for (char c : v) {
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == 'e' || c == 'E' ||
              c == '+')) {
            return std::nullopt;
        }
    }
    double out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out)) return std::nullopt;
    return out;
}

class FlatValue {
public:
    enum class Kind { Text, Number, Bool, Ref };

    static FlatValue text(std::string s) { return FlatValue(TextV{std::move(s)}); }
    static FlatValue number(double d) {
        if (!std::isfinite(d)) throw Error("number values must be finite");
        return FlatValue(d == 0.0 ? 0.0 : d);
    }
    static FlatValue boolean(bool b) { return FlatValue(b); }
    static FlatValue ref(std::string iri) { return FlatValue(RefV{std::move(iri)}); }

    Kind kind() const noexcept { return static_cast<Kind>(v_.index()); }
    bool is_text() const noexcept { return kind() == Kind::Text; }
    bool is_number() const noexcept { return kind() == Kind::Number; }
    bool is_bool() const noexcept { return kind() == Kind::Bool; }
    bool is_ref() const noexcept { return kind() == Kind::Ref; }

    const std::string& as_text() const { return std::get<TextV>(v_).s; }
    double as_number() const { return std::get<double>(v_); }
    bool as_bool() const { return std::get<bool>(v_); }
    const std::string& as_ref() const { return std::get<RefV>(v_).iri; }

    // String form used for tokenizing, serialization and string comparators.
    std::string canonical() const {
        switch (kind()) {
            case Kind::Text: return as_text();
            case Kind::Number: return format_number(as_number());
            case Kind::Bool: return as_bool() ? "true" : "false";
            case Kind::Ref: return as_ref();
        }
        return {};
    }

    friend bool operator==(const FlatValue&, const FlatValue&) = default;
    friend auto operator<=>(const FlatValue& a, const FlatValue& b) { return a.v_ <=> b.v_; }

private:
    struct TextV {
        std::string s;
        friend auto operator<=>(const TextV&, const TextV&) = default;
    };
    struct RefV {
        std::string iri;
        friend auto operator<=>(const RefV&, const RefV&) = default;
    };
    using Storage = std::variant<TextV, double, bool, RefV>;

    explicit FlatValue(Storage v) : v_(std::move(v)) {}

    Storage v_;
};

inline nlohmann::json to_json(const FlatValue& v) {
    switch (v.kind()) {
        case FlatValue::Kind::Text: return v.as_text();
        case FlatValue::Kind::Number: return v.as_number();
        case FlatValue::Kind::Bool: return v.as_bool();
        case FlatValue::Kind::Ref: return {{"@id", v.as_ref()}};
    }
    return nullptr;
}

inline FlatValue flat_value_from_json(const nlohmann::json& j) {
    if (j.is_string()) return FlatValue::text(j.get<std::string>());
    if (j.is_boolean()) return FlatValue::boolean(j.get<bool>());
    if (j.is_number()) return FlatValue::number(j.get<double>());
    if (j.is_object() && j.contains("@id") && j["@id"].is_string()) return FlatValue::ref(j["@id"].get<std::string>());
    throw Error("invalid flat value: " + j.dump());
}

// Terms a value contributes to the inverted index and to more-like-this
// samples. Numbers contribute their canonical string as a single term.
inline std::vector<std::string> value_terms(const FlatValue& v) {
    if (v.is_text()) return text::tokenize(v.as_text());
    if (v.is_number()) return {v.canonical()};
    return {};
}

struct FlatDocument {
    std::string id;
    std::map<std::string, std::vector<FlatValue>> fields;

    const std::vector<FlatValue>* get(std::string_view key) const {
        auto it = fields.find(std::string(key));
        return it == fields.end() ? nullptr : &it->second;
    }

    friend bool operator==(const FlatDocument&, const FlatDocument&) = default;
};

inline nlohmann::json to_json(const FlatDocument& doc) {
    nlohmann::json fields = nlohmann::json::object();
    for (const auto& [key, values] : doc.fields) {
        auto& arr = fields[key] = nlohmann::json::array();
        for (const auto& v : values) arr.push_back(to_json(v));
    }
    return {{"id", doc.id}, {"fields", fields}};
}

inline FlatDocument flat_document_from_json(const nlohmann::json& j) {
    FlatDocument doc;
    doc.id = j.at("id").get<std::string>();
    for (const auto& [key, values] : j.at("fields").items()) {
        auto& out = doc.fields[key];
        for (const auto& v : values) out.push_back(flat_value_from_json(v));
    }
    return doc;
}

inline FlatValue literal_to_value(const Term& t, DatatypeCategory category) {
    switch (category) {
        case DatatypeCategory::DdNumber:
            if (auto d = parse_number(t.value)) return FlatValue::number(*d);
            break;
        case DatatypeCategory::DdBoolean:
            if (t.value == "true" || t.value == "1") return FlatValue::boolean(true);
            if (t.value == "false" || t.value == "0") return FlatValue::boolean(false);
            break;
        case DatatypeCategory::DdString:
            break;
    }
    return FlatValue::text(t.value);
}

// Missing values become absent keys; single-valued properties keep the first
// stored value.
inline FlatDocument flatten(const Graph& g, const std::string& instance, const MinimalDomainSpec& spec) {
    FlatDocument doc;
    doc.id = instance;
    Term root = Term::iri(instance);
    for (const auto& p : spec.properties) {
        auto terms = resolve_path(g, root, p.path);
        if (terms.empty()) continue;
        if (!p.multi_valued) terms.resize(1);
        auto& values = doc.fields[p.key];
        values.reserve(terms.size());
        for (const auto& t : terms) {
            values.push_back(t.is_literal() ? literal_to_value(t, p.category) : FlatValue::ref(t.key()));
        }
    }
    return doc;
}

struct PreFilterConfig {
    std::vector<std::string> properties;
    int threshold_pct = 40;
    std::size_t limit = 50;  // 0 = unlimited

    friend bool operator==(const PreFilterConfig&, const PreFilterConfig&) = default;
};

struct Candidate {
    std::string id;
    std::size_t match_count = 0;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

class TypeIndex {
public:
    TypeIndex() = default;

    TypeIndex(MinimalDomainSpec spec, std::vector<FlatDocument> docs) : spec_(std::move(spec)) {
        std::sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        docs_ = std::move(docs);
        for (std::size_t i = 0; i < docs_.size(); ++i) {
            if (!ordinal_.emplace(docs_[i].id, i).second) throw Error("duplicate document id " + docs_[i].id);
        }
        for (std::size_t i = 0; i < docs_.size(); ++i) {
            for (const auto& [key, values] : docs_[i].fields) {
                auto& terms = inverted_[key];
                for (const auto& v : values) {
                    for (auto& term : value_terms(v)) {
                        auto& postings = terms[term];
                        if (postings.empty() || postings.back() != i) postings.push_back(i);
                    }
                    if (v.is_number()) numeric_[key].emplace(v.as_number(), i);
                }
            }
        }
    }

    const MinimalDomainSpec& spec() const noexcept { return spec_; }
    std::size_t size() const noexcept { return docs_.size(); }
    const std::vector<FlatDocument>& documents() const noexcept { return docs_; }

    const FlatDocument* find(std::string_view id) const {
        auto it = ordinal_.find(std::string(id));
        return it == ordinal_.end() ? nullptr : &docs_[it->second];
    }

    // Document ordinals (ascending id order) whose `key` field contains term.
    const std::vector<std::size_t>& postings(const std::string& key, const std::string& term) const {
        static const std::vector<std::size_t> kEmpty;
        auto it = inverted_.find(key);
        if (it == inverted_.end()) return kEmpty;
        auto jt = it->second.find(term);
        return jt == it->second.end() ? kEmpty : jt->second;
    }

    const std::map<std::string, std::unordered_map<std::string, std::vector<std::size_t>>>& inverted() const {
        return inverted_;
    }

    // Ids whose numeric `key` values fall in [lo, hi], ascending id order.
    std::vector<std::string> numeric_range(const std::string& key, double lo, double hi) const {
        std::vector<std::size_t> hits;
        auto it = numeric_.find(key);
        if (it != numeric_.end()) {
            for (auto jt = it->second.lower_bound(lo); jt != it->second.end() && jt->first <= hi; ++jt) {
                hits.push_back(jt->second);
            }
        }
        std::sort(hits.begin(), hits.end());
        hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
        std::vector<std::string> out;
        for (auto h : hits) out.push_back(docs_[h].id);
        return out;
    }

private:
    MinimalDomainSpec spec_;
    std::vector<FlatDocument> docs_;
    std::unordered_map<std::string, std::size_t> ordinal_;
    std::map<std::string, std::unordered_map<std::string, std::vector<std::size_t>>> inverted_;
    std::map<std::string, std::multimap<double, std::size_t>> numeric_;
};

inline TypeIndex build_index(const Graph& g, const MinimalDomainSpec& spec) {
    std::vector<FlatDocument> docs;
    for (const auto& id : instances_of_type(g, spec.type_iri)) docs.push_back(flatten(g, id, spec));
    return TypeIndex(spec, std::move(docs));
}

inline void validate(const PreFilterConfig& cfg, const MinimalDomainSpec& spec) {
    if (cfg.properties.empty()) throw ConfigError("pre-filter property selection is empty");
    if (cfg.threshold_pct < 0 || cfg.threshold_pct > 100) throw ConfigError("pre-filter threshold must be in [0,100]");
    for (const auto& p : cfg.properties) {
        if (!spec.find(p)) throw ConfigError("pre-filter property not in index: " + p);
    }
}

inline std::vector<std::string> sample_terms(const FlatDocument& sample, const std::vector<std::string>& properties) {
    std::vector<std::string> terms;
    std::unordered_map<std::string, bool> seen;
    for (const auto& key : properties) {
        const auto* values = sample.get(key);
        if (!values) continue;
        for (const auto& v : *values) {
            for (auto& t : value_terms(v)) {
                if (seen.emplace(t, true).second) terms.push_back(std::move(t));
            }
        }
    }
    return terms;
}

// Number of sample terms a candidate must share: ceil(pct/100 * n).
inline std::size_t required_matches(int threshold_pct, std::size_t n_terms) {
    return (static_cast<std::size_t>(threshold_pct) * n_terms + 99) / 100;
}

// Documents sharing at least ceil(pct% of the sample's unique terms) on the
// selected properties, by match count desc then id asc. exclude_id drops the
// sample itself when querying its own index.
inline std::vector<Candidate> more_like_this(const TypeIndex& target, const FlatDocument& sample,
                                             const PreFilterConfig& cfg, std::size_t limit,
                                             std::optional<std::string_view> exclude_id = std::nullopt) {
    validate(cfg, target.spec());
    if (limit == 0) throw ConfigError("more_like_this limit must be >= 1");

    auto terms = sample_terms(sample, cfg.properties);
    if (terms.empty()) return {};
    std::size_t required = required_matches(cfg.threshold_pct, terms.size());

    std::vector<std::size_t> counts(target.size(), 0);
    std::vector<std::size_t> stamp(target.size(), std::numeric_limits<std::size_t>::max());
    for (std::size_t t = 0; t < terms.size(); ++t) {
        for (const auto& key : cfg.properties) {
            for (auto ord : target.postings(key, terms[t])) {
                if (stamp[ord] == t) continue;
                stamp[ord] = t;
                ++counts[ord];
            }
        }
    }

    std::vector<Candidate> out;
    const auto& docs = target.documents();
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (counts[i] < required) continue;
        if (exclude_id && docs[i].id == *exclude_id) continue;
        out.push_back({docs[i].id, counts[i]});
    }
    std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
        return a.match_count > b.match_count;
    });
    if (out.size() > limit) out.resize(limit);
    return out;
}

}  // namespace kgdedup
