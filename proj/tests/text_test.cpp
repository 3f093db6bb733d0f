#include <gtest/gtest.h>

#include <random>

#include "kgdedup/random.hpp"
#include "kgdedup/text.hpp"
#include "test_support.hpp"

using namespace kgdedup;
namespace ts = testing_support;

TEST(Utf8, DecodeEncodeRoundTrip) {
    std::string s = "M\xC3\xBCnchen \xE2\x80\x94 \xF0\x9F\x98\x80";
    EXPECT_EQ(text::encode_utf8(text::decode_utf8(s)), s);
    EXPECT_EQ(text::decode_utf8(s).size(), 11u);
}

TEST(Utf8, MalformedBytesBecomeReplacement) {
    auto cps = text::decode_utf8("a\xFF" "b");
    ASSERT_EQ(cps.size(), 3u);
    EXPECT_EQ(cps[1], text::kReplacement);
}

TEST(Text, Lowercase) {
    EXPECT_EQ(text::lowercase("Summer MUSIC"), "summer music");
    EXPECT_EQ(text::lowercase("\xC3\x9C" "BER"), "\xC3\xBC" "ber");
    EXPECT_EQ(text::lowercase("\xCE\xA3"), "\xCF\x83");
}

TEST(Text, TrimAndCollapse) {
    EXPECT_EQ(text::trim("  \t a  b \n"), "a  b");
    EXPECT_EQ(text::collapse_whitespace("a \t\n b"), "a b");
    EXPECT_EQ(text::trim(""), "");
}

TEST(Text, StripPunctuationAndDiacritics) {
    EXPECT_EQ(text::strip_punctuation("Open-air, (Berlin)!"), "Openair Berlin");
    EXPECT_EQ(text::strip_punctuation("a \xE2\x80\x94 b"), "a  b");
    EXPECT_EQ(text::strip_diacritics("Caf\xC3\xA9 \xC5\x81\xC3\xB3" "d\xC5\xBA"), "Cafe Lodz");
    EXPECT_EQ(text::strip_diacritics("e\xCC\x81"), "e");
}

TEST(Text, TokenizeDeduplicatesInFirstOccurrenceOrder) {
    EXPECT_EQ(text::tokenize("Open-air music, MUSIC festival 2024."),
              (std::vector<std::string>{"open", "air", "music", "festival", "2024"}));
    EXPECT_TRUE(text::tokenize(" ,.- ").empty());
}

TEST(Text, TokenizeMatchesAsciiOracle) {
    std::mt19937_64 rng(5);
    const std::string alphabet = "abcXYZ019 .,-_!?\t";
    for (int i = 0; i < 300; ++i) {
        std::string s;
        std::size_t n = uniform_index(rng, 30);
        for (std::size_t k = 0; k < n; ++k) s += alphabet[uniform_index(rng, alphabet.size())];
        auto tokens = text::tokenize(s);
        std::set<std::string> got(tokens.begin(), tokens.end());
        // '_' is a separator for both.
        EXPECT_EQ(got, ts::ascii_terms(s)) << s;
        EXPECT_EQ(got.size(), tokens.size()) << s;
    }
}

TEST(Text, LevenshteinMatchesOracle) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 300; ++i) {
        std::string a, b;
        for (std::size_t k = uniform_index(rng, 15); k > 0; --k) a += static_cast<char>('a' + uniform_index(rng, 4));
        for (std::size_t k = uniform_index(rng, 15); k > 0; --k) b += static_cast<char>('a' + uniform_index(rng, 4));
        EXPECT_EQ(text::levenshtein_distance(a, b), ts::edit_distance(a, b)) << a << " / " << b;
        EXPECT_DOUBLE_EQ(text::levenshtein_similarity(a, b), ts::edit_similarity(a, b));
    }
}

TEST(Text, LevenshteinCountsCodepoints) {
    EXPECT_EQ(text::levenshtein_distance("caf\xC3\xA9", "cafe"), 1u);
    EXPECT_DOUBLE_EQ(text::levenshtein_similarity("", ""), 1.0);
    EXPECT_DOUBLE_EQ(text::levenshtein_similarity("abc", ""), 0.0);
}

TEST(Text, JaccardTokens) {
    EXPECT_DOUBLE_EQ(text::jaccard_tokens("a b c", "b c d"), 2.0 / 4.0);
    EXPECT_DOUBLE_EQ(text::jaccard_tokens("", ""), 1.0);
    EXPECT_DOUBLE_EQ(text::jaccard_tokens("a", ""), 0.0);
    EXPECT_DOUBLE_EQ(text::jaccard_tokens("A a", "a"), 1.0);
}

TEST(Random, UniformIndexIsPortable) {
    // Fixed outputs pin the sampling scheme across standard libraries.
    std::mt19937_64 rng(42);
    std::mt19937_64 raw(42);
    std::uint64_t first = raw();
    EXPECT_EQ(uniform_index(rng, std::uint64_t{1} << 32), first % (std::uint64_t{1} << 32));
    std::mt19937_64 r2(42);
    double u = uniform01(r2);
    EXPECT_EQ(u, static_cast<double>(first >> 11) * 0x1.0p-53);
}

TEST(Random, UniformIndexStaysInRange) {
    std::mt19937_64 rng(1);
    std::vector<int> hist(7, 0);
    for (int i = 0; i < 7000; ++i) ++hist[uniform_index(rng, 7)];
    for (int h : hist) EXPECT_GT(h, 800);
}
