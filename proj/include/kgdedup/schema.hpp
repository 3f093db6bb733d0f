#pragma once
// Builds the minimal property list for one type, either from a
// SHACL-style shape or by inferring it from the instance data.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kgdedup/error.hpp"
#include "kgdedup/kg.hpp"

namespace kgdedup {

enum class DatatypeCategory { DdString, DdNumber, DdBoolean };

inline std::string_view to_string(DatatypeCategory c) {
    switch (c) {
        case DatatypeCategory::DdString: return "DdString";
        case DatatypeCategory::DdNumber: return "DdNumber";
        case DatatypeCategory::DdBoolean: return "DdBoolean";
    }
    return "DdString";
}

inline std::optional<DatatypeCategory> category_from_string(std::string_view s) {
    if (s == "DdString" || s == "dd:String" || s == "string") return DatatypeCategory::DdString;
    if (s == "DdNumber" || s == "dd:Number" || s == "number") return DatatypeCategory::DdNumber;
    if (s == "DdBoolean" || s == "dd:Boolean" || s == "boolean") return DatatypeCategory::DdBoolean;
    return std::nullopt;
}

// XSD datatype -> category. Time-related types deliberately land in DdString.
class DatatypeTable {
public:
    DatatypeTable() {
        using C = DatatypeCategory;
        for (auto local : {"string", "anyURI", "date", "dateTime", "time", "duration"}) {
            table_[vocab::xsd(local)] = C::DdString;
        }
        table_[vocab::kRdfLangString] = C::DdString;
        for (auto local : {"integer", "int", "long", "short", "decimal", "float", "double", "nonNegativeInteger"}) {
            table_[vocab::xsd(local)] = C::DdNumber;
        }
        table_[vocab::xsd("boolean")] = C::DdBoolean;
    }

    void extend(std::string iri, DatatypeCategory c) { table_[std::move(iri)] = c; }

    // {"<datatype IRI>": "DdString" | "DdNumber" | "DdBoolean", ...}
    void extend_from_json(const nlohmann::json& j) {
        if (!j.is_object()) throw ConfigError("datatype table must be a JSON object");
        for (const auto& [iri, name] : j.items()) {
            auto c = name.is_string() ? category_from_string(name.get<std::string>()) : std::nullopt;
            if (!c) throw ConfigError("unknown datatype category for " + iri);
            extend(iri, *c);
        }
    }

    bool known(const std::string& iri) const { return table_.count(iri) != 0; }

    DatatypeCategory categorize(const std::string& iri, Diagnostics* diag = nullptr) const {
        auto it = table_.find(iri);
        if (it != table_.end()) return it->second;
        warn(diag, "unknown datatype <" + iri + ">, treated as DdString");
        return DatatypeCategory::DdString;
    }

private:
    std::map<std::string, DatatypeCategory> table_;
};

inline DatatypeCategory categorize_datatype(const std::string& iri, Diagnostics* diag = nullptr) {
    static const DatatypeTable kDefault;
    return kDefault.categorize(iri, diag);
}

struct PropertySpec {
    PropertyPath path;
    std::string key;  // canonical dotted field name
    bool multi_valued = false;
    DatatypeCategory category = DatatypeCategory::DdString;
    bool is_nested_instance = false;

    friend bool operator==(const PropertySpec&, const PropertySpec&) = default;
};

struct MinimalDomainSpec {
    std::string type_iri;
    std::vector<PropertySpec> properties;  // sorted by key
    int depth = 1;
    FieldNamer namer;

    const PropertySpec* find(std::string_view key) const {
        for (const auto& p : properties) {
            if (p.key == key) return &p;
        }
        return nullptr;
    }

    std::vector<std::string> keys() const {
        std::vector<std::string> out;
        out.reserve(properties.size());
        for (const auto& p : properties) out.push_back(p.key);
        return out;
    }

    bool has_sub_paths(std::string_view key) const {
        std::string prefix = std::string(key) + ".";
        return std::any_of(properties.begin(), properties.end(),
                           [&](const PropertySpec& p) { return p.key.rfind(prefix, 0) == 0; });
    }
};

inline nlohmann::json to_json(const MinimalDomainSpec& spec) {
    nlohmann::json props = nlohmann::json::array();
    for (const auto& p : spec.properties) {
        props.push_back({{"key", p.key},
                         {"path", p.path.segments},
                         {"multi_valued", p.multi_valued},
                         {"category", std::string(to_string(p.category))},
                         {"nested", p.is_nested_instance}});
    }
    return {{"type", spec.type_iri}, {"depth", spec.depth}, {"properties", props}};
}

namespace detail {

inline void finalize(MinimalDomainSpec& spec) {
    std::set<std::string> predicates;
    for (const auto& p : spec.properties) predicates.insert(p.path.segments.begin(), p.path.segments.end());
    spec.namer = FieldNamer(predicates);
    for (auto& p : spec.properties) p.key = spec.namer.canonical(p.path);
    std::sort(spec.properties.begin(), spec.properties.end(),
              [](const PropertySpec& a, const PropertySpec& b) { return a.key < b.key; });
}

inline std::optional<long long> parse_count(const Term& t) {
    if (!t.is_literal()) return std::nullopt;
    try {
        std::size_t used = 0;
        long long v = std::stoll(t.value, &used);
        if (used != t.value.size()) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

}  // namespace detail

inline MinimalDomainSpec extract_domain_spec(const Graph& spec_graph, const std::string& shape_iri, int depth,
                                             const DatatypeTable& table = {}, Diagnostics* diag = nullptr) {
    if (depth < 1) throw SpecError("depth must be >= 1");
    const auto& targets = spec_graph.objects(shape_iri, vocab::sh("targetClass"));
    if (targets.empty() || !targets.front().is_iri()) {
        throw SpecError("shape <" + shape_iri + "> has no sh:targetClass");
    }

    MinimalDomainSpec spec;
    spec.type_iri = targets.front().value;
    spec.depth = depth;
    std::set<PropertyPath> seen;

    auto shape_for_class = [&](const std::string& cls) -> std::optional<std::string> {
        for (const auto& t : spec_graph.triples()) {
            if (t.predicate == vocab::sh("targetClass") && t.object.is_iri() && t.object.value == cls) {
                return t.subject.key();
            }
        }
        return std::nullopt;
    };

    auto expand = [&](auto&& self, const std::string& shape_key, const PropertyPath& prefix, bool parent_multi,
                      std::set<std::string> visiting) -> void {
        if (!visiting.insert(shape_key).second) return;
        for (const auto& prop_node : spec_graph.objects(shape_key, vocab::sh("property"))) {
            if (prop_node.is_literal()) continue;
            std::string node_key = prop_node.key();
            const auto& paths = spec_graph.objects(node_key, vocab::sh("path"));
            if (paths.empty() || !paths.front().is_iri()) {
                warn(diag, "sh:property without an IRI sh:path ignored");
                continue;
            }
            PropertyPath path = prefix.child(paths.front().value);
            if (!seen.insert(path).second) continue;

            PropertySpec ps;
            ps.path = path;
            const auto& max_counts = spec_graph.objects(node_key, vocab::sh("maxCount"));
            auto max_count = max_counts.empty() ? std::nullopt : detail::parse_count(max_counts.front());
            ps.multi_valued = parent_multi || !max_count || *max_count > 1;

            const auto& nodes = spec_graph.objects(node_key, vocab::sh("node"));
            const auto& classes = spec_graph.objects(node_key, vocab::sh("class"));
            ps.is_nested_instance = !nodes.empty() || !classes.empty();
            if (ps.is_nested_instance) {
                ps.category = DatatypeCategory::DdString;
            } else {
                const auto& dts = spec_graph.objects(node_key, vocab::sh("datatype"));
                ps.category = dts.empty() ? DatatypeCategory::DdString : table.categorize(dts.front().value, diag);
            }
            spec.properties.push_back(ps);

            if (ps.is_nested_instance && static_cast<int>(path.size()) <= depth) {
                std::optional<std::string> nested;
                if (!nodes.empty() && !nodes.front().is_literal()) {
                    nested = nodes.front().key();
                } else if (!classes.empty() && classes.front().is_iri()) {
                    nested = shape_for_class(classes.front().value);
                }
                if (nested) self(self, *nested, path, ps.multi_valued, visiting);
            }
        }
    };
    expand(expand, shape_iri, PropertyPath{}, false, {});
    detail::finalize(spec);
    return spec;
}

// Emergent schema: every predicate used by some instance becomes a property.
// A predicate is nested when at least half of its observed objects are
// resources; its sub-properties are scanned on those resources up to depth.
inline MinimalDomainSpec infer_emergent_schema(const Graph& g, const std::string& type_iri, int depth,
                                               const DatatypeTable& table = {}, Diagnostics* diag = nullptr) {
    if (depth < 1) throw SpecError("depth must be >= 1");
    auto instances = instances_of_type(g, type_iri);
    if (instances.empty()) throw SpecError("no instances of <" + type_iri + ">");

    MinimalDomainSpec spec;
    spec.type_iri = type_iri;
    spec.depth = depth;

    using Frontier = std::vector<std::vector<Term>>;  // per instance

    auto scan = [&](auto&& self, const PropertyPath& prefix, const Frontier& frontier) -> void {
        struct Stats {
            std::size_t max_per_instance = 0;
            std::size_t literals = 0;
            std::size_t resources = 0;
            std::map<std::string, std::size_t> datatypes;
            Frontier next;
        };
        std::map<std::string, Stats> stats;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            std::map<std::string, std::size_t> per_instance;
            for (const auto& node : frontier[i]) {
                if (node.is_literal()) continue;
                std::string key = node.key();
                for (const auto& pred : g.predicates(key)) {
                    if (pred == vocab::kRdfType) continue;
                    auto& st = stats[pred];
                    if (st.next.empty()) st.next.resize(frontier.size());
                    for (const auto& obj : g.objects(key, pred)) {
                        ++per_instance[pred];
                        if (obj.is_literal()) {
                            ++st.literals;
                            ++st.datatypes[obj.lang.empty() ? obj.datatype : vocab::kRdfLangString];
                        } else {
                            ++st.resources;
                            st.next[i].push_back(obj);
                        }
                    }
                }
            }
            for (const auto& [pred, n] : per_instance) {
                auto& st = stats[pred];
                st.max_per_instance = std::max(st.max_per_instance, n);
            }
        }

        for (auto& [pred, st] : stats) {
            PropertySpec ps;
            ps.path = prefix.child(pred);
            ps.multi_valued = st.max_per_instance >= 2;
            ps.is_nested_instance = 2 * st.resources >= st.literals + st.resources;

            ps.category = DatatypeCategory::DdString;
            if (st.literals > 0) {
                std::size_t best = 0;
                std::set<DatatypeCategory> tied;
                for (const auto& [dt, n] : st.datatypes) {
                    if (n > best) {
                        best = n;
                        tied.clear();
                    }
                    if (n == best) tied.insert(table.categorize(dt, diag));
                }
                ps.category = tied.size() == 1 ? *tied.begin() : DatatypeCategory::DdString;
            }
            spec.properties.push_back(ps);

            if (ps.is_nested_instance && static_cast<int>(ps.path.size()) <= depth) {
                bool any_outgoing = false;
                for (const auto& nodes : st.next) {
                    for (const auto& n : nodes) any_outgoing = any_outgoing || g.has_subject(n.key());
                }
                if (any_outgoing) self(self, ps.path, st.next);
            }
        }
    };

    Frontier roots;
    roots.reserve(instances.size());
    for (const auto& iri : instances) roots.push_back({Term::iri(iri)});
    scan(scan, PropertyPath{}, roots);
    detail::finalize(spec);
    return spec;
}

}  // namespace kgdedup
