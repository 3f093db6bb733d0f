#pragma once
// Synthetic event knowledge graphs with planted duplicates, and the
// ground-truth CSV format used to evaluate against them.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgdedup/error.hpp"
#include "kgdedup/kg.hpp"
#include "kgdedup/labels.hpp"
#include "kgdedup/random.hpp"
#include "kgdedup/text.hpp"

namespace kgdedup {

namespace synth_vocab {
inline const std::string kSchema = "https://schema.org/";
inline const std::string kBase = "https://example.org/synth/";
inline const std::string kEventType = kSchema + "Event";
inline const std::string kAddressType = kSchema + "PostalAddress";
}  // namespace synth_vocab

struct SynthOptions {
    std::size_t instances = 100;
    double dup_rate = 0.1;
    std::uint64_t seed = 7;
    double typo_prob = 0.15;   // per string value: chance of each successive character edit
    double case_flip = 0.3;    // per string value
    double field_drop = 0.2;   // per address sub-field
    double sibling_rate = 0.1; // originals sharing name and venue with another original
};

struct SynthResult {
    Graph graph;
    std::string type_iri = synth_vocab::kEventType;
    std::vector<PairKey> duplicates;  // normalized, sorted
};

namespace detail {

struct SynthEvent {
    std::string name;
    std::string description;
    std::string street;
    std::string postal_code;
    std::string city;
    std::vector<std::string> keywords;
    double price = 0.0;
    bool free = false;
    std::set<std::string> dropped;  // address sub-fields left out
};

inline const std::vector<std::string>& synth_kinds() {
    static const std::vector<std::string> k{"Festival", "Concert", "Fair", "Exhibition",
                                            "Parade",   "Market",  "Gala", "Marathon"};
    return k;
}

inline const std::vector<std::string>& synth_keywords() {
    static const std::vector<std::string> k{"music", "family", "outdoor", "food",   "art",     "sports",
                                            "kids",  "night",  "culture", "dance",  "theatre", "wine",
                                            "craft", "local",  "charity"};
    return k;
}

template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
    return v[uniform_index(rng, v.size())];
}

// Pronounceable pseudo-word of 2-3 syllables.
inline std::string pseudo_word(std::mt19937_64& rng) {
    static constexpr std::string_view kOnset = "bdfghklmnprstvz";
    static constexpr std::string_view kVowel = "aeiou";
    std::string w;
    std::size_t syllables = 2 + uniform_index(rng, 2);
    for (std::size_t i = 0; i < syllables; ++i) {
        w += kOnset[uniform_index(rng, kOnset.size())];
        w += kVowel[uniform_index(rng, kVowel.size())];
    }
    if (uniform_index(rng, 2) == 0) w += kOnset[uniform_index(rng, kOnset.size())];
    return w;
}

inline std::string capitalized(std::string w) {
    if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    return w;
}

struct SynthLexicon {
    std::vector<std::string> words;
    std::vector<std::string> cities;
    std::vector<std::string> streets;

    explicit SynthLexicon(std::mt19937_64& rng) {
        for (int i = 0; i < 400; ++i) words.push_back(pseudo_word(rng));
        for (int i = 0; i < 40; ++i) cities.push_back(capitalized(pseudo_word(rng)));
        for (int i = 0; i < 60; ++i) {
            static const std::vector<std::string> kSuffix{"strasse", "weg", "gasse", "platz"};
            streets.push_back(capitalized(pseudo_word(rng)) + pick(rng, kSuffix));
        }
    }
};

inline SynthEvent random_event(std::mt19937_64& rng, const SynthLexicon& lex) {
    SynthEvent e;
    e.name = capitalized(pseudo_word(rng)) + " " + capitalized(pick(rng, lex.words)) + " " + pick(rng, synth_kinds());
    e.city = pick(rng, lex.cities);
    e.street = pick(rng, lex.streets) + " " + std::to_string(1 + uniform_index(rng, 120));
    e.postal_code = std::to_string(1000 + uniform_index(rng, 9000));
    std::size_t n_words = 6 + uniform_index(rng, 6);
    for (std::size_t i = 0; i < n_words; ++i) {
        if (i > 0) e.description += ' ';
        e.description += i == 0 ? capitalized(pick(rng, lex.words)) : pick(rng, lex.words);
    }
    std::size_t n_kw = 1 + uniform_index(rng, 3);
    while (e.keywords.size() < n_kw) {
        const auto& k = pick(rng, synth_keywords());
        if (std::find(e.keywords.begin(), e.keywords.end(), k) == e.keywords.end()) e.keywords.push_back(k);
    }
    e.free = uniform_index(rng, 4) == 0;
    e.price = e.free ? 0.0 : static_cast<double>(5 + uniform_index(rng, 200)) / 2.0;
    return e;
}

// Another edition of the same event: same name and venue, new description,
// keywords and price. Not a duplicate.
inline SynthEvent sibling_of(std::mt19937_64& rng, const SynthEvent& e, const SynthLexicon& lex) {
    SynthEvent s = random_event(rng, lex);
    s.name = e.name;
    s.city = e.city;
    s.street = e.street;
    s.postal_code = e.postal_code;
    return s;
}

inline std::string typo(std::mt19937_64& rng, std::string s) {
    auto cps = text::decode_utf8(s);
    if (cps.empty()) return s;
    std::size_t i = uniform_index(rng, cps.size());
    char32_t letter = U'a' + static_cast<char32_t>(uniform_index(rng, 26));
    switch (uniform_index(rng, 4)) {
        case 0: cps.insert(cps.begin() + static_cast<std::ptrdiff_t>(i), letter); break;
        case 1:
            if (cps.size() > 1) cps.erase(cps.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        case 2: cps[i] = letter; break;
        default:
            if (i + 1 < cps.size()) std::swap(cps[i], cps[i + 1]);
            break;
    }
    return text::encode_utf8(cps);
}

inline std::string flip_case(std::mt19937_64& rng, std::string s) {
    bool upper = uniform_index(rng, 2) == 0;
    for (auto& c : s) {
        auto u = static_cast<unsigned char>(c);
        if (u < 0x80) c = static_cast<char>(upper ? std::toupper(u) : std::tolower(u));
    }
    return s;
}

inline std::string perturb(std::mt19937_64& rng, std::string s, const SynthOptions& opts) {
    while (bernoulli(rng, opts.typo_prob)) s = typo(rng, std::move(s));
    if (bernoulli(rng, opts.case_flip)) s = flip_case(rng, std::move(s));
    return s;
}

inline SynthEvent perturbed_copy(std::mt19937_64& rng, const SynthEvent& e, const SynthOptions& opts) {
    SynthEvent d = e;
    d.name = perturb(rng, d.name, opts);
    d.description = perturb(rng, d.description, opts);
    d.street = perturb(rng, d.street, opts);
    d.city = perturb(rng, d.city, opts);
    for (auto& k : d.keywords) k = perturb(rng, k, opts);
    std::vector<std::string> fields{"streetAddress", "postalCode", "addressLocality"};
    for (const auto& f : fields) {
        if (bernoulli(rng, opts.field_drop)) d.dropped.insert(f);
    }
    if (d.dropped.size() == fields.size()) d.dropped.erase(fields[uniform_index(rng, fields.size())]);
    return d;
}

inline std::string format_price(double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", p);
    return buf;
}

inline void emit_event(Graph& g, const std::string& iri, const std::string& address_iri, const SynthEvent& e) {
    using namespace synth_vocab;
    Term s = Term::iri(iri);
    g.add(s, vocab::kRdfType, Term::iri(kEventType));
    g.add(s, kSchema + "name", Term::literal(e.name));
    g.add(s, kSchema + "description", Term::literal(e.description));
    for (const auto& k : e.keywords) g.add(s, kSchema + "keywords", Term::literal(k));
    g.add(s, kSchema + "price", Term::literal(format_price(e.price), vocab::xsd("decimal")));
    g.add(s, kSchema + "isAccessibleForFree", Term::literal(e.free ? "true" : "false", vocab::xsd("boolean")));
    Term a = Term::iri(address_iri);
    g.add(s, kSchema + "address", a);
    g.add(a, vocab::kRdfType, Term::iri(kAddressType));
    if (!e.dropped.count("streetAddress")) g.add(a, kSchema + "streetAddress", Term::literal(e.street));
    if (!e.dropped.count("postalCode")) g.add(a, kSchema + "postalCode", Term::literal(e.postal_code));
    if (!e.dropped.count("addressLocality")) g.add(a, kSchema + "addressLocality", Term::literal(e.city));
}

}  // namespace detail

inline constexpr std::size_t kMaxSynthInstances = 100000;

// round(instances * dup_rate) records, at most half, are perturbed copies of distinct
// originals; the rest are independently drawn originals. Instance numbers are
// shuffled so duplicates are not adjacent. Deterministic for a seed.
inline SynthResult generate_synthetic(const SynthOptions& opts) {
    if (opts.instances == 0 || opts.instances > kMaxSynthInstances) throw ConfigError("instances out of range");
    for (double p : {opts.dup_rate, opts.typo_prob, opts.case_flip, opts.field_drop, opts.sibling_rate}) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("rates must be in [0,1]");
    }
    if (opts.typo_prob >= 1.0) throw ConfigError("typo probability must be < 1");
    std::size_t dups = static_cast<std::size_t>(std::llround(static_cast<double>(opts.instances) * opts.dup_rate));
    dups = std::min(dups, opts.instances / 2);
    std::size_t originals = opts.instances - dups;

    std::mt19937_64 rng(opts.seed);
    detail::SynthLexicon lexicon(rng);
    std::vector<detail::SynthEvent> events;
    for (std::size_t i = 0; i < originals; ++i) {
        if (i > 0 && bernoulli(rng, opts.sibling_rate)) {
            events.push_back(detail::sibling_of(rng, events[uniform_index(rng, i)], lexicon));
        } else {
            events.push_back(detail::random_event(rng, lexicon));
        }
    }

    std::vector<std::size_t> sources(originals);
    for (std::size_t i = 0; i < originals; ++i) sources[i] = i;
    for (std::size_t i = originals; i-- > 1;) std::swap(sources[i], sources[uniform_index(rng, i + 1)]);
    std::vector<std::pair<std::size_t, std::size_t>> links;  // (duplicate record, original record)
    for (std::size_t d = 0; d < dups; ++d) {
        events.push_back(detail::perturbed_copy(rng, events[sources[d]], opts));
        links.emplace_back(originals + d, sources[d]);
    }

    std::vector<std::size_t> number(events.size());
    for (std::size_t i = 0; i < number.size(); ++i) number[i] = i + 1;
    for (std::size_t i = number.size(); i-- > 1;) std::swap(number[i], number[uniform_index(rng, i + 1)]);

    std::size_t width = std::to_string(events.size()).size();
    auto padded = [&](std::size_t n) {
        std::string s = std::to_string(n);
        return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
    };
    auto event_iri = [&](std::size_t record) { return synth_vocab::kBase + "event/" + padded(number[record]); };

    SynthResult out;
    for (std::size_t r = 0; r < events.size(); ++r) {
        detail::emit_event(out.graph, event_iri(r), synth_vocab::kBase + "address/" + padded(number[r]), events[r]);
    }
    for (const auto& [d, o] : links) out.duplicates.push_back(normalized(event_iri(d), event_iri(o)));
    std::sort(out.duplicates.begin(), out.duplicates.end());
    return out;
}

// ---------------------------------------------------------------------------
// Ground truth CSV: header `source_id,target_id,is_duplicate`.

struct GroundTruth {
    LabelSet rows;

    std::set<PairKey> positives() const {
        std::set<PairKey> out;
        for (const auto& [key, r] : rows) {
            if (r.is_duplicate) out.insert(key);
        }
        return out;
    }
};

inline GroundTruth parse_ground_truth(std::string_view csv) {
    GroundTruth truth;
    std::istringstream in{std::string(csv)};
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(text::trim(cell));
        if (!line.empty() && line.back() == ',') cells.push_back("");
        if (!header_seen) {
            header_seen = true;
            if (cells != std::vector<std::string>{"source_id", "target_id", "is_duplicate"}) {
                throw ParseError(line_no, "expected header source_id,target_id,is_duplicate");
            }
            continue;
        }
        if (cells.size() != 3) throw ParseError(line_no, "expected 3 columns");
        if (cells[0].empty() || cells[1].empty()) throw ParseError(line_no, "empty instance id");
        bool dup;
        if (cells[2] == "true" || cells[2] == "1") {
            dup = true;
        } else if (cells[2] == "false" || cells[2] == "0") {
            dup = false;
        } else {
            throw ParseError(line_no, "is_duplicate must be true or false");
        }
        auto key = normalized(cells[0], cells[1]);
        auto it = truth.rows.find(key);
        if (it != truth.rows.end()) {
            if (it->second.is_duplicate != dup) throw ParseError(line_no, "conflicting label for an earlier pair");
            continue;
        }
        truth.rows[key] = LabelRecord{cells[0], cells[1], dup, ""};
    }
    if (!header_seen) throw ParseError(1, "missing header");
    return truth;
}

inline std::string ground_truth_csv(const std::vector<PairKey>& duplicates) {
    std::string out = "source_id,target_id,is_duplicate\n";
    for (const auto& [a, b] : duplicates) out += a + "," + b + ",true\n";
    return out;
}

inline std::string ground_truth_csv(const GroundTruth& truth) {
    std::string out = "source_id,target_id,is_duplicate\n";
    for (const auto& [key, r] : truth.rows) {
        out += key.first + "," + key.second + "," + (r.is_duplicate ? "true" : "false") + "\n";
    }
    return out;
}

}  // namespace kgdedup
