#pragma once
// Minimal RDF model: terms, triples, an in-memory graph with subject and
// (subject, predicate) indexes, and an N-Triples reader/writer.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "kgdedup/error.hpp"
#include "kgdedup/text.hpp"

namespace kgdedup {

namespace vocab {
inline constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view kRdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kSh = "http://www.w3.org/ns/shacl#";
inline const std::string kXsdString = std::string(kXsd) + "string";
inline const std::string kRdfType = std::string(kRdf) + "type";
inline const std::string kRdfLangString = std::string(kRdf) + "langString";

inline std::string xsd(std::string_view local) { return std::string(kXsd) + std::string(local); }
inline std::string sh(std::string_view local) { return std::string(kSh) + std::string(local); }
}  // namespace vocab

struct Term {
    enum class Kind : std::uint8_t { Iri, Literal, Blank };

    Kind kind = Kind::Iri;
    std::string value;     // IRI, lexical form or blank-node label
    std::string datatype;  // literals only
    std::string lang;      // literals only; kept but ignored by similarity

    static Term iri(std::string v) { return Term{Kind::Iri, std::move(v), {}, {}}; }
    static Term blank(std::string id) { return Term{Kind::Blank, std::move(id), {}, {}}; }
    static Term literal(std::string lexical, std::string dt = vocab::kXsdString, std::string lang = {}) {
        if (dt.empty()) dt = vocab::kXsdString;
        return Term{Kind::Literal, std::move(lexical), std::move(dt), std::move(lang)};
    }

    bool is_iri() const noexcept { return kind == Kind::Iri; }
    bool is_blank() const noexcept { return kind == Kind::Blank; }
    bool is_literal() const noexcept { return kind == Kind::Literal; }
    bool is_resource() const noexcept { return kind != Kind::Literal; }

    // Stable identifier for resources: the IRI, or "_:label" for blank nodes.
    std::string key() const { return is_blank() ? "_:" + value : value; }

    friend auto operator<=>(const Term&, const Term&) = default;
    friend bool operator==(const Term&, const Term&) = default;
};

struct Triple {
    Term subject;
    std::string predicate;
    Term object;

    friend auto operator<=>(const Triple&, const Triple&) = default;
    friend bool operator==(const Triple&, const Triple&) = default;
};

inline bool is_absolute_iri(std::string_view iri) {
    if (iri.empty()) return false;
    auto colon = iri.find(':');
    if (colon == std::string_view::npos || colon == 0) return false;
    if (!std::isalpha(static_cast<unsigned char>(iri[0]))) return false;
    for (std::size_t i = 1; i < colon; ++i) {
        char c = iri[i];
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.') return false;
    }
    for (char c : iri) {
        if (std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

// Set-semantics triple store. Lookups by (subject, predicate) return objects
// in insertion order.
class Graph {
public:
    // Returns false when the triple was already present.
    bool add(Triple t) {
        if (t.subject.is_literal()) throw Error("triple subject must be an IRI or blank node");
        if (!is_absolute_iri(t.predicate)) throw Error("predicate must be an absolute IRI: " + t.predicate);
        if (!members_.insert(t).second) return false;
        std::string s = t.subject.key();
        auto& preds = by_subject_[s];
        auto& objs = preds[t.predicate];
        if (objs.empty()) predicate_order_[s].push_back(t.predicate);
        objs.push_back(t.object);
        triples_.push_back(std::move(t));
        return true;
    }

    bool add(const Term& s, std::string_view p, const Term& o) { return add(Triple{s, std::string(p), o}); }

    std::size_t size() const noexcept { return triples_.size(); }
    bool empty() const noexcept { return triples_.empty(); }
    const std::vector<Triple>& triples() const noexcept { return triples_; }

    bool has_subject(std::string_view subject_key) const {
        return by_subject_.find(std::string(subject_key)) != by_subject_.end();
    }

    const std::vector<Term>& objects(std::string_view subject_key, std::string_view predicate) const {
        static const std::vector<Term> kEmpty;
        auto it = by_subject_.find(std::string(subject_key));
        if (it == by_subject_.end()) return kEmpty;
        auto jt = it->second.find(std::string(predicate));
        return jt == it->second.end() ? kEmpty : jt->second;
    }

    // Predicates used by a subject, in first-use order.
    const std::vector<std::string>& predicates(std::string_view subject_key) const {
        static const std::vector<std::string> kEmpty;
        auto it = predicate_order_.find(std::string(subject_key));
        return it == predicate_order_.end() ? kEmpty : it->second;
    }

    friend bool operator==(const Graph& a, const Graph& b) { return a.members_ == b.members_; }

private:
    std::vector<Triple> triples_;
    std::set<Triple> members_;
    std::unordered_map<std::string, std::unordered_map<std::string, std::vector<Term>>> by_subject_;
    std::unordered_map<std::string, std::vector<std::string>> predicate_order_;
};

// Sorted, duplicate-free subjects typed with type_iri. Blank nodes are skipped:
// they cannot be reported as duplicates.
inline std::vector<std::string> instances_of_type(const Graph& g, std::string_view type_iri) {
    std::set<std::string> out;
    for (const auto& t : g.triples()) {
        if (t.predicate == vocab::kRdfType && t.object.is_iri() && t.object.value == type_iri && t.subject.is_iri()) {
            out.insert(t.subject.value);
        }
    }
    return {out.begin(), out.end()};
}

// A non-empty sequence of predicate IRIs.
struct PropertyPath {
    std::vector<std::string> segments;

    std::size_t size() const noexcept { return segments.size(); }
    PropertyPath child(std::string predicate) const {
        PropertyPath p = *this;
        p.segments.push_back(std::move(predicate));
        return p;
    }

    friend auto operator<=>(const PropertyPath&, const PropertyPath&) = default;
    friend bool operator==(const PropertyPath&, const PropertyPath&) = default;
};

// Follows each segment from the start node; multi-valued hops fan out.
inline std::vector<Term> resolve_path(const Graph& g, const Term& start, const PropertyPath& path) {
    std::vector<Term> frontier{start};
    for (const auto& segment : path.segments) {
        std::vector<Term> next;
        for (const auto& node : frontier) {
            if (node.is_literal()) continue;
            const auto& objs = g.objects(node.key(), segment);
            next.insert(next.end(), objs.begin(), objs.end());
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    return frontier;
}

inline std::vector<Term> resolve_path(const Graph& g, std::string_view subject_iri, const PropertyPath& path) {
    return resolve_path(g, Term::iri(std::string(subject_iri)), path);
}

// Fragment or last path segment of an IRI.
inline std::string local_name(std::string_view iri) {
    std::string_view s = iri;
    while (!s.empty() && (s.back() == '/' || s.back() == '#')) s.remove_suffix(1);
    auto pos = s.find_last_of("#/");
    if (pos == std::string_view::npos) pos = s.find_last_of(':');
    std::string_view local = pos == std::string_view::npos ? s : s.substr(pos + 1);
    return local.empty() ? std::string(iri) : std::string(local);
}

// Maps predicate IRIs to field names. Distinct IRIs sharing a local name get
// numeric suffixes in sorted-IRI order, so names do not depend on input order.
class FieldNamer {
public:
    FieldNamer() = default;

    explicit FieldNamer(const std::set<std::string>& predicates) {
        std::map<std::string, int> used;
        for (const auto& iri : predicates) {
            std::string base = local_name(iri);
            int n = ++used[base];
            names_[iri] = n == 1 ? base : base + "_" + std::to_string(n);
        }
    }

    std::string name(const std::string& iri) const {
        auto it = names_.find(iri);
        return it == names_.end() ? local_name(iri) : it->second;
    }

    std::string canonical(const PropertyPath& path) const {
        std::string out;
        for (const auto& seg : path.segments) {
            if (!out.empty()) out += '.';
            out += name(seg);
        }
        return out;
    }

private:
    std::map<std::string, std::string> names_;
};

// ---------------------------------------------------------------------------
// N-Triples

namespace detail {

class LineParser {
public:
    LineParser(std::string_view line, std::size_t line_no) : s_(line), line_(line_no) {}

    [[noreturn]] void fail(const std::string& reason) const { throw ParseError(line_, reason); }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
    }

    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return at_end() ? '\0' : s_[pos_]; }

    Triple statement() {
        skip_ws();
        Term subject = subject_term();
        skip_ws();
        if (peek() != '<') fail("expected predicate IRI");
        std::string predicate = iri();
        skip_ws();
        Term object = object_term();
        skip_ws();
        if (peek() != '.') fail("expected '.' at end of statement");
        ++pos_;
        skip_ws();
        if (!at_end() && peek() != '#') fail("unexpected content after '.'");
        return Triple{std::move(subject), std::move(predicate), std::move(object)};
    }

private:
    Term subject_term() {
        if (peek() == '<') return Term::iri(iri());
        if (peek() == '_') return blank();
        fail("expected subject IRI or blank node");
    }

    Term object_term() {
        char c = peek();
        if (c == '<') return Term::iri(iri());
        if (c == '_') return blank();
        if (c == '"') return literal();
        fail("expected object IRI, blank node or literal");
    }

    std::uint32_t hex(std::size_t digits) {
        if (pos_ + digits > s_.size()) fail("truncated \\u escape");
        std::uint32_t v = 0;
        for (std::size_t i = 0; i < digits; ++i) {
            char h = s_[pos_++];
            v <<= 4;
            if (h >= '0' && h <= '9') {
                v |= static_cast<std::uint32_t>(h - '0');
            } else if (h >= 'a' && h <= 'f') {
                v |= static_cast<std::uint32_t>(h - 'a' + 10);
            } else if (h >= 'A' && h <= 'F') {
                v |= static_cast<std::uint32_t>(h - 'A' + 10);
            } else {
                fail("invalid hex digit in escape");
            }
        }
        if (v > 0x10FFFF || (v >= 0xD800 && v <= 0xDFFF)) fail("escape is not a valid code point");
        return v;
    }

    std::string iri() {
        ++pos_;  // '<'
        std::string out;
        while (true) {
            if (at_end()) fail("unterminated IRI");
            char c = s_[pos_++];
            if (c == '>') break;
            if (c == '\\') {
                char e = at_end() ? '\0' : s_[pos_++];
                if (e == 'u') {
                    text::append_utf8(out, hex(4));
                } else if (e == 'U') {
                    text::append_utf8(out, hex(8));
                } else {
                    fail("invalid escape in IRI");
                }
                continue;
            }
            if (static_cast<unsigned char>(c) <= 0x20 || c == '<' || c == '"' || c == '{' || c == '}' ||
                c == '|' || c == '^' || c == '`') {
                fail("invalid character in IRI");
            }
            out.push_back(c);
        }
        if (!is_absolute_iri(out)) fail("IRI is not absolute: <" + out + ">");
        return out;
    }

    Term blank() {
        if (s_.substr(pos_, 2) != "_:") fail("malformed blank node");
        pos_ += 2;
        std::size_t start = pos_;
        auto ok = [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
                   static_cast<unsigned char>(c) >= 0x80;
        };
        while (pos_ < s_.size() && ok(s_[pos_])) ++pos_;
        while (pos_ > start && s_[pos_ - 1] == '.') --pos_;
        if (pos_ == start) fail("empty blank node label");
        char first = s_[start];
        if (first == '-') fail("blank node label cannot start with '-'");
        return Term::blank(std::string(s_.substr(start, pos_ - start)));
    }

    Term literal() {
        ++pos_;  // opening quote
        std::string lexical;
        while (true) {
            if (at_end()) fail("unterminated literal");
            char c = s_[pos_++];
            if (c == '"') break;
            if (c != '\\') {
                lexical.push_back(c);
                continue;
            }
            if (at_end()) fail("dangling escape");
            char e = s_[pos_++];
            switch (e) {
                case 't': lexical.push_back('\t'); break;
                case 'b': lexical.push_back('\b'); break;
                case 'n': lexical.push_back('\n'); break;
                case 'r': lexical.push_back('\r'); break;
                case 'f': lexical.push_back('\f'); break;
                case '"': lexical.push_back('"'); break;
                case '\'': lexical.push_back('\''); break;
                case '\\': lexical.push_back('\\'); break;
                case 'u': text::append_utf8(lexical, hex(4)); break;
                case 'U': text::append_utf8(lexical, hex(8)); break;
                default: fail(std::string("invalid escape \\") + e);
            }
        }
        if (peek() == '@') {
            ++pos_;
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (pos_ == start) fail("empty language tag");
            while (pos_ < s_.size() && s_[pos_] == '-') {
                ++pos_;
                std::size_t sub = pos_;
                while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
                if (pos_ == sub) fail("empty language subtag");
            }
            return Term::literal(std::move(lexical), vocab::kXsdString, std::string(s_.substr(start, pos_ - start)));
        }
        if (s_.substr(pos_, 2) == "^^") {
            pos_ += 2;
            if (peek() != '<') fail("expected datatype IRI after ^^");
            return Term::literal(std::move(lexical), iri());
        }
        return Term::literal(std::move(lexical));
    }

    std::string_view s_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

}  // namespace detail

// All-or-nothing: throws ParseError with the 1-based line of the first
// malformed statement.
inline Graph parse_ntriples(std::string_view input) {
    Graph g;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= input.size()) {
        auto end = input.find('\n', start);
        if (end == std::string_view::npos) end = input.size();
        ++line_no;
        std::string_view line = input.substr(start, end - start);
        start = end + 1;

        std::size_t first = line.find_first_not_of(" \t\r");
        if (first != std::string_view::npos && line[first] != '#') {
            detail::LineParser p(line, line_no);
            g.add(p.statement());
        }
        if (end == input.size()) break;
    }
    return g;
}

inline std::string escape_literal(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

inline std::string to_ntriples(const Term& t) {
    switch (t.kind) {
        case Term::Kind::Iri: return "<" + t.value + ">";
        case Term::Kind::Blank: return "_:" + t.value;
        case Term::Kind::Literal: {
            std::string out = "\"" + escape_literal(t.value) + "\"";
            if (!t.lang.empty()) return out + "@" + t.lang;
            if (t.datatype != vocab::kXsdString) out += "^^<" + t.datatype + ">";
            return out;
        }
    }
    return {};
}

inline std::string to_ntriples(const Triple& t) {
    return to_ntriples(t.subject) + " <" + t.predicate + "> " + to_ntriples(t.object) + " .";
}

// Canonical serialization: one statement per line, in insertion order.
inline std::string to_ntriples(const Graph& g) {
    std::string out;
    for (const auto& t : g.triples()) {
        out += to_ntriples(t);
        out += '\n';
    }
    return out;
}

}  // namespace kgdedup
