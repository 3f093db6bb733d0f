#pragma once
// Per-property standardization: element-level functions on each value, then
// list-level functions on the value list.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgdedup/error.hpp"
#include "kgdedup/index.hpp"
#include "kgdedup/schema.hpp"
#include "kgdedup/text.hpp"

namespace kgdedup {

enum class StandardizerLevel { Element, List };

struct Standardizer {
    std::string name;
    std::map<std::string, double> params;

    friend auto operator<=>(const Standardizer&, const Standardizer&) = default;
    friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

using StandardizationPlan = std::map<std::string, std::vector<Standardizer>>;

inline constexpr std::size_t kMaxStandardizerSequence = 8;

struct StandardizerInfo {
    StandardizerLevel level;
    std::set<DatatypeCategory> applicable;  // empty = every category
    // Integer parameter names with their inclusive bounds.
    std::map<std::string, std::pair<int, int>> int_params;
};

inline const std::map<std::string, StandardizerInfo>& standardizer_catalog() {
    using C = DatatypeCategory;
    using L = StandardizerLevel;
    static const std::map<std::string, StandardizerInfo> kCatalog = {
        {"lowercase", {L::Element, {C::DdString}, {}}},
        {"trim", {L::Element, {C::DdString}, {}}},
        {"collapse_whitespace", {L::Element, {C::DdString}, {}}},
        {"strip_punctuation", {L::Element, {C::DdString}, {}}},
        {"strip_diacritics", {L::Element, {C::DdString}, {}}},
        {"round", {L::Element, {C::DdNumber}, {{"decimals", {0, 12}}}}},
        {"identity", {L::Element, {}, {}}},
        {"setify", {L::List, {}, {}}},
        {"sort", {L::List, {}, {}}},
        {"take_first", {L::List, {}, {{"k", {0, 1000000}}}}},
    };
    return kCatalog;
}

inline const StandardizerInfo& standardizer_info(const Standardizer& s) {
    const auto& cat = standardizer_catalog();
    auto it = cat.find(s.name);
    if (it == cat.end()) throw PlanError("unknown standardizer: " + s.name);
    return it->second;
}

inline void validate(const Standardizer& s) {
    const auto& info = standardizer_info(s);
    for (const auto& [name, value] : s.params) {
        auto it = info.int_params.find(name);
        if (it == info.int_params.end()) throw PlanError("standardizer " + s.name + " has no parameter " + name);
        if (value != std::floor(value) || value < it->second.first || value > it->second.second) {
            throw PlanError("standardizer " + s.name + " parameter " + name + " out of range");
        }
    }
    for (const auto& [name, bounds] : info.int_params) {
        if (!s.params.count(name)) throw PlanError("standardizer " + s.name + " requires parameter " + name);
    }
}

inline std::optional<DatatypeCategory> value_category(const FlatValue& v) {
    switch (v.kind()) {
        case FlatValue::Kind::Text: return DatatypeCategory::DdString;
        case FlatValue::Kind::Number: return DatatypeCategory::DdNumber;
        case FlatValue::Kind::Bool: return DatatypeCategory::DdBoolean;
        case FlatValue::Kind::Ref: return std::nullopt;
    }
    return std::nullopt;
}

inline double round_to(double x, int decimals) {
    double scale = std::pow(10.0, decimals);
    double r = std::round(x * scale) / scale;
    return std::isfinite(r) ? r : x;
}

// Left-to-right composition. Inapplicable functions are skipped with a
// warning; references to nested instances are left untouched.
inline FlatValue standardize_value(FlatValue v, const std::vector<Standardizer>& seq, Diagnostics* diag = nullptr) {
    for (const auto& s : seq) {
        const auto& info = standardizer_info(s);
        if (info.level != StandardizerLevel::Element) continue;
        if (v.is_ref()) continue;
        auto cat = value_category(v);
        if (!info.applicable.empty() && !info.applicable.count(*cat)) {
            warn(diag, s.name + " is not applicable to " + std::string(to_string(*cat)) + " values");
            continue;
        }
        if (s.name == "lowercase") {
            v = FlatValue::text(text::lowercase(v.as_text()));
        } else if (s.name == "trim") {
            v = FlatValue::text(text::trim(v.as_text()));
        } else if (s.name == "collapse_whitespace") {
            v = FlatValue::text(text::collapse_whitespace(v.as_text()));
        } else if (s.name == "strip_punctuation") {
            v = FlatValue::text(text::strip_punctuation(v.as_text()));
        } else if (s.name == "strip_diacritics") {
            v = FlatValue::text(text::strip_diacritics(v.as_text()));
        } else if (s.name == "round") {
            v = FlatValue::number(round_to(v.as_number(), static_cast<int>(s.params.at("decimals"))));
        }
    }
    return v;
}

inline std::vector<FlatValue> standardize_list(std::vector<FlatValue> vs, const std::vector<Standardizer>& seq) {
    for (const auto& s : seq) {
        const auto& info = standardizer_info(s);
        if (info.level != StandardizerLevel::List) continue;
        if (s.name == "setify") {
            std::vector<FlatValue> out;
            for (auto& v : vs) {
                if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(std::move(v));
            }
            vs = std::move(out);
        } else if (s.name == "sort") {
            std::stable_sort(vs.begin(), vs.end());
        } else if (s.name == "take_first") {
            auto k = static_cast<std::size_t>(s.params.at("k"));
            if (vs.size() > k) vs.erase(vs.begin() + static_cast<std::ptrdiff_t>(k), vs.end());
        }
    }
    return vs;
}

inline void validate_sequence(const std::string& path, const std::vector<Standardizer>& seq) {
    if (seq.size() > kMaxStandardizerSequence) throw PlanError("too many standardizers for " + path);
    bool in_list_part = false;
    for (const auto& s : seq) {
        validate(s);
        bool is_list = standardizer_info(s).level == StandardizerLevel::List;
        if (!is_list && in_list_part) {
            throw PlanError("element-level standardizer " + s.name + " after list-level ones on " + path);
        }
        in_list_part = in_list_part || is_list;
    }
}

inline void validate(const StandardizationPlan& plan, const MinimalDomainSpec& spec) {
    for (const auto& [path, seq] : plan) {
        if (!spec.find(path)) throw PlanError("plan references unknown path: " + path);
        validate_sequence(path, seq);
    }
}

// Pure: returns a standardized copy, never changes the key set.
inline FlatDocument apply_plan(const FlatDocument& doc, const StandardizationPlan& plan, Diagnostics* diag = nullptr) {
    FlatDocument out = doc;
    for (auto& [key, values] : out.fields) {
        auto it = plan.find(key);
        if (it == plan.end()) continue;
        for (auto& v : values) v = standardize_value(std::move(v), it->second, diag);
        values = standardize_list(std::move(values), it->second);
    }
    return out;
}

inline std::vector<Standardizer> default_standardizers(const PropertySpec& p) {
    std::vector<Standardizer> seq;
    switch (p.category) {
        case DatatypeCategory::DdString:
            seq = {{"lowercase", {}}, {"trim", {}}, {"collapse_whitespace", {}}};
            break;
        case DatatypeCategory::DdNumber:
            seq = {{"round", {{"decimals", 2}}}};
            break;
        case DatatypeCategory::DdBoolean:
            break;
    }
    if (p.multi_valued) seq.push_back({"setify", {}});
    return seq;
}

inline StandardizationPlan default_plan(const MinimalDomainSpec& spec) {
    StandardizationPlan plan;
    for (const auto& p : spec.properties) {
        auto seq = default_standardizers(p);
        if (!seq.empty()) plan[p.key] = std::move(seq);
    }
    return plan;
}

inline nlohmann::json to_json(const Standardizer& s) {
    nlohmann::json j = {{"fn", s.name}};
    if (!s.params.empty()) {
        nlohmann::json params = nlohmann::json::object();
        for (const auto& [k, v] : s.params) params[k] = static_cast<long long>(v);
        j["params"] = params;
    }
    return j;
}

inline Standardizer standardizer_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("fn") || !j["fn"].is_string()) throw PlanError("standardizer needs \"fn\"");
    Standardizer s{j["fn"].get<std::string>(), {}};
    if (j.contains("params")) {
        if (!j["params"].is_object()) throw PlanError("standardizer params must be an object");
        for (const auto& [k, v] : j["params"].items()) {
            if (!v.is_number()) throw PlanError("standardizer parameter " + k + " must be a number");
            s.params[k] = v.get<double>();
        }
    }
    validate(s);
    return s;
}

inline nlohmann::json to_json(const StandardizationPlan& plan) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [path, seq] : plan) {
        auto& arr = j[path] = nlohmann::json::array();
        for (const auto& s : seq) arr.push_back(to_json(s));
    }
    return j;
}

inline StandardizationPlan plan_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw PlanError("plan must be a JSON object");
    StandardizationPlan plan;
    for (const auto& [path, arr] : j.items()) {
        if (!arr.is_array()) throw PlanError("plan entry for " + path + " must be an array");
        auto& seq = plan[path];
        for (const auto& s : arr) seq.push_back(standardizer_from_json(s));
        validate_sequence(path, seq);
    }
    return plan;
}

}  // namespace kgdedup
