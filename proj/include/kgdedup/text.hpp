#pragma once
// UTF-8 text helpers shared by the indexer, the standardizers and the
// comparators. Case folding and character classes cover Latin, Greek and
// Cyrillic; other scripts pass through unchanged and count as word characters.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace kgdedup::text {

using Codepoints = std::vector<char32_t>;

inline constexpr char32_t kReplacement = 0xFFFD;

inline Codepoints decode_utf8(std::string_view s) {
    Codepoints out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        char32_t cp;
        std::size_t len;
        if (c < 0x80) {
            cp = c;
            len = 1;
        } else if ((c >> 5) == 0x6) {
            cp = c & 0x1F;
            len = 2;
        } else if ((c >> 4) == 0xE) {
            cp = c & 0x0F;
            len = 3;
        } else if ((c >> 3) == 0x1E) {
            cp = c & 0x07;
            len = 4;
        } else {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        if (i + len > s.size()) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        bool ok = true;
        for (std::size_t k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc >> 6) != 0x2) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (!ok) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode_utf8(const Codepoints& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) append_utf8(out, cp);
    return out;
}

inline char32_t to_lower(char32_t cp) {
    if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 0x20 : cp;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    if (cp == 0x130) return U'i';
    if (cp >= 0x100 && cp <= 0x137) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x14A && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp == 0x178) return 0xFF;
    if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
    return cp;
}

inline bool is_space(char32_t cp) {
    return cp == ' ' || (cp >= 0x09 && cp <= 0x0D) || cp == 0xA0 || cp == 0x1680 ||
           (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F ||
           cp == 0x205F || cp == 0x3000;
}

inline bool is_punct(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) || (cp >= 0x5B && cp <= 0x60) ||
               (cp >= 0x7B && cp <= 0x7E);
    }
    switch (cp) {
        case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
            return true;
        default:
            break;
    }
    return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) || (cp >= 0x3001 && cp <= 0x3003) ||
           (cp >= 0x3008 && cp <= 0x3011);
}

// Letters, digits and combining marks. Symbols, punctuation and whitespace are
// separators.
inline bool is_word_char(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    if (cp <= 0xBF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
    if (cp == 0xD7 || cp == 0xF7) return false;
    if (cp >= 0x2000 && cp <= 0x2BFF) return false;
    if (cp >= 0x3000 && cp <= 0x303F) return false;
    if (cp >= 0xFE10 && cp <= 0xFE6F) return false;
    if ((cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
        (cp >= 0xFF5B && cp <= 0xFF65)) {
        return false;
    }
    if (cp == kReplacement) return false;
    if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;
    return true;
}

namespace detail {

// Base letters for U+00C0..U+00FF and U+0100..U+017F; '\0' keeps the input.
inline constexpr char kLatin1Base[] =
    "AAAAAA\0CEEEEIIIIDNOOOOO\0OUUUUY\0\0aaaaaa\0ceeeeiiiidnooooo\0ouuuuy\0y";
inline constexpr char kLatinExtABase[] =
    "AaAaAaCcCcCcCcDd"
    "DdEeEeEeEeEeGgGg"
    "GgGgHhHhIiIiIiIi"
    "Ii\0\0JjKk\0LlLlLlL"
    "lLlNnNnNnn\0\0OoOo"
    "Oo\0\0RrRrRrSsSsSs"
    "SsTtTtTtUuUuUuUu"
    "UuUuWwYyYZzZzZzs";

}  // namespace detail

inline bool is_combining_mark(char32_t cp) { return cp >= 0x300 && cp <= 0x36F; }

inline char32_t strip_diacritic(char32_t cp) {
    char base = 0;
    if (cp >= 0xC0 && cp <= 0xFF) {
        base = detail::kLatin1Base[cp - 0xC0];
    } else if (cp >= 0x100 && cp <= 0x17F) {
        base = detail::kLatinExtABase[cp - 0x100];
    }
    return base ? static_cast<char32_t>(base) : cp;
}

inline std::string lowercase(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : decode_utf8(s)) append_utf8(out, to_lower(cp));
    return out;
}

inline std::string strip_diacritics(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : decode_utf8(s)) {
        if (is_combining_mark(cp)) continue;
        append_utf8(out, strip_diacritic(cp));
    }
    return out;
}

inline std::string strip_punctuation(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : decode_utf8(s)) {
        if (!is_punct(cp)) append_utf8(out, cp);
    }
    return out;
}

inline std::string trim(std::string_view s) {
    auto cps = decode_utf8(s);
    std::size_t b = 0;
    std::size_t e = cps.size();
    while (b < e && is_space(cps[b])) ++b;
    while (e > b && is_space(cps[e - 1])) --e;
    return encode_utf8(Codepoints(cps.begin() + static_cast<std::ptrdiff_t>(b),
                                  cps.begin() + static_cast<std::ptrdiff_t>(e)));
}

// Replaces every whitespace run with a single ASCII space.
inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (char32_t cp : decode_utf8(s)) {
        if (is_space(cp)) {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            append_utf8(out, cp);
            in_space = false;
        }
    }
    return out;
}

// Lowercase, split on non-word runs, drop empties, keep first occurrence.
inline std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::unordered_set<std::string> seen;
    std::string current;
    auto flush = [&] {
        if (!current.empty() && seen.insert(current).second) tokens.push_back(current);
        current.clear();
    };
    for (char32_t cp : decode_utf8(s)) {
        if (is_word_char(cp)) {
            append_utf8(current, to_lower(cp));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

inline std::size_t levenshtein_distance(const Codepoints& a, const Codepoints& b) {
    const Codepoints& longer = a.size() >= b.size() ? a : b;
    const Codepoints& shorter = a.size() >= b.size() ? b : a;
    if (shorter.empty()) return longer.size();

    std::vector<std::size_t> row(shorter.size() + 1);
    for (std::size_t j = 0; j <= shorter.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= longer.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= shorter.size(); ++j) {
            std::size_t up = row[j];
            std::size_t cost = longer[i - 1] == shorter[j - 1] ? 0 : 1;
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
            diag = up;
        }
    }
    return row[shorter.size()];
}

inline std::size_t levenshtein_distance(std::string_view a, std::string_view b) {
    return levenshtein_distance(decode_utf8(a), decode_utf8(b));
}

// 1 - dist / max(|a|, |b|) over codepoints; 1 when both are empty.
inline double levenshtein_similarity(std::string_view a, std::string_view b) {
    auto ca = decode_utf8(a);
    auto cb = decode_utf8(b);
    std::size_t longest = std::max(ca.size(), cb.size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein_distance(ca, cb)) / static_cast<double>(longest);
}

inline double jaccard_tokens(std::string_view a, std::string_view b) {
    auto ta = tokenize(a);
    auto tb = tokenize(b);
    if (ta.empty() && tb.empty()) return 1.0;
    std::unordered_set<std::string> sa(ta.begin(), ta.end());
    std::size_t common = 0;
    for (const auto& t : tb) common += sa.count(t);
    std::size_t uni = ta.size() + tb.size() - common;
    return static_cast<double>(common) / static_cast<double>(uni);
}

}  // namespace kgdedup::text
