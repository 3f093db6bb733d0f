#pragma once
// Parser corpus shared by the unit tests and the acceptance runner.

#include <cstddef>
#include <string>
#include <vector>

namespace corpus {

struct Accepted {
    std::string name;
    std::string input;
    std::size_t triples;
    // Re-serialized object of the last statement; empty = not checked.
    std::string last_object;
};

struct Rejected {
    std::string name;
    std::string input;
    std::size_t line;
};

inline const std::string kS = "<http://example.org/s>";
inline const std::string kP = "<http://example.org/p>";

inline std::string st(const std::string& object) { return kS + " " + kP + " " + object + " ."; }

inline const std::vector<Accepted>& accepted() {
    static const std::vector<Accepted> cases = {
        {"empty_document", "", 0, ""},
        {"only_newlines", "\n\n\n", 0, ""},
        {"only_comment", "# nothing here\n", 0, ""},
        {"iri_object", st("<http://example.org/o>"), 1, "<http://example.org/o>"},
        {"plain_literal", st("\"hello\""), 1, "\"hello\""},
        {"empty_literal", st("\"\""), 1, "\"\""},
        {"typed_integer", st("\"42\"^^<http://www.w3.org/2001/XMLSchema#integer>"), 1,
         "\"42\"^^<http://www.w3.org/2001/XMLSchema#integer>"},
        {"explicit_xsd_string_is_plain", st("\"x\"^^<http://www.w3.org/2001/XMLSchema#string>"), 1, "\"x\""},
        {"language_tag", st("\"Hallo\"@de"), 1, "\"Hallo\"@de"},
        {"language_subtag", st("\"colour\"@en-GB"), 1, "\"colour\"@en-GB"},
        {"blank_subject", "_:b1 " + kP + " \"v\" .", 1, "\"v\""},
        {"blank_object", st("_:node"), 1, "_:node"},
        {"blank_label_with_dash_and_dot", st("_:a-b.c"), 1, "_:a-b.c"},
        {"escape_quote", st("\"say \\\"hi\\\"\""), 1, "\"say \\\"hi\\\"\""},
        {"escape_newline_tab", st("\"a\\nb\\tc\""), 1, "\"a\\nb\\tc\""},
        {"escape_backslash", st("\"a\\\\b\""), 1, "\"a\\\\b\""},
        {"escape_u4", st("\"caf\\u00E9\""), 1, "\"caf\xC3\xA9\""},
        {"escape_u8", st("\"\\U0001F600\""), 1, "\"\xF0\x9F\x98\x80\""},
        {"raw_utf8", st("\"M\xC3\xBCnchen\""), 1, "\"M\xC3\xBCnchen\""},
        {"iri_escape", st("<http://example.org/\\u00E9>"), 1, "<http://example.org/\xC3\xA9>"},
        {"trailing_comment", st("\"v\"") + " # note", 1, "\"v\""},
        {"no_space_before_dot", kS + " " + kP + " \"v\".", 1, "\"v\""},
        {"tabs_between_terms", kS + "\t" + kP + "\t\"v\"\t.", 1, "\"v\""},
        {"leading_whitespace", "   " + st("\"v\""), 1, "\"v\""},
        {"crlf_line_endings", st("\"a\"") + "\r\n" + st("\"b\"") + "\r\n", 2, "\"b\""},
        {"no_final_newline", st("\"a\"") + "\n" + st("\"b\""), 2, "\"b\""},
        {"duplicate_statement_collapses", st("\"a\"") + "\n" + st("\"a\""), 1, "\"a\""},
        {"blank_lines_between", st("\"a\"") + "\n\n   \n" + st("\"b\""), 2, "\"b\""},
        {"comment_between", st("\"a\"") + "\n# middle\n" + st("\"b\""), 2, "\"b\""},
        {"urn_iri", "<urn:isbn:0451450523> " + kP + " <urn:x-local:1> .", 1, "<urn:x-local:1>"},
        {"hash_in_literal", st("\"#not a comment\""), 1, "\"#not a comment\""},
        {"dot_in_literal", st("\"a . b\""), 1, "\"a . b\""},
        {"decimal_literal", st("\"3.50\"^^<http://www.w3.org/2001/XMLSchema#decimal>"), 1,
         "\"3.50\"^^<http://www.w3.org/2001/XMLSchema#decimal>"},
        {"same_literal_different_lang", st("\"chat\"@fr") + "\n" + st("\"chat\"@en"), 2, "\"chat\"@en"},
    };
    return cases;
}

inline const std::vector<Rejected>& rejected() {
    static const std::vector<Rejected> cases = {
        {"missing_dot", kS + " " + kP + " \"v\"", 1},
        {"missing_object", kS + " " + kP + " .", 1},
        {"literal_subject", "\"s\" " + kP + " \"v\" .", 1},
        {"blank_predicate", kS + " _:p \"v\" .", 1},
        {"relative_iri", "<s> " + kP + " \"v\" .", 1},
        {"unterminated_iri", "<http://example.org/s " + kP + " \"v\" .", 1},
        {"unterminated_literal", kS + " " + kP + " \"v .", 1},
        {"space_in_iri", "<http://example.org/a b> " + kP + " \"v\" .", 1},
        {"bad_escape", st("\"a\\qb\""), 1},
        {"bad_hex_escape", st("\"\\u00G1\""), 1},
        {"surrogate_escape", st("\"\\uD800\""), 1},
        {"empty_language_tag", st("\"v\"@"), 1},
        {"datatype_not_iri", st("\"v\"^^xsd:string"), 1},
        {"trailing_garbage", st("\"v\"") + " extra", 1},
        {"error_on_third_line", st("\"a\"") + "\n" + st("\"b\"") + "\n" + kS + " " + kP, 3},
        {"error_after_blank_lines", "\n\n" + st("\"a\"") + "\n\n<bad> " + kP + " \"v\" .", 5},
        {"error_after_comment", "# header\n" + st("\"a\"") + "\n" + st("\"b\" \"c\""), 3},
        {"empty_blank_label", st("_:"), 1},
        {"crlf_error_line", st("\"a\"") + "\r\n" + st("\"b\"") + "\r\n" + st("<x>") + "\r\n", 3},
    };
    return cases;
}

}  // namespace corpus
