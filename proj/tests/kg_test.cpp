#include <gtest/gtest.h>

#include "kgdedup/kg.hpp"
#include "ntriples_corpus.hpp"

using namespace kgdedup;

class AcceptedNTriples : public ::testing::TestWithParam<corpus::Accepted> {};

TEST_P(AcceptedNTriples, Parses) {
    const auto& c = GetParam();
    Graph g;
    ASSERT_NO_THROW(g = parse_ntriples(c.input)) << c.input;
    EXPECT_EQ(g.size(), c.triples);
    if (!c.last_object.empty()) EXPECT_EQ(to_ntriples(g.triples().back().object), c.last_object);
}

INSTANTIATE_TEST_SUITE_P(Corpus, AcceptedNTriples, ::testing::ValuesIn(corpus::accepted()),
                         [](const auto& info) { return info.param.name; });

class RejectedNTriples : public ::testing::TestWithParam<corpus::Rejected> {};

TEST_P(RejectedNTriples, ReportsLine) {
    const auto& c = GetParam();
    try {
        parse_ntriples(c.input);
        FAIL() << "accepted: " << c.input;
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), c.line) << e.what();
        EXPECT_FALSE(e.reason().empty());
    }
}

INSTANTIATE_TEST_SUITE_P(Corpus, RejectedNTriples, ::testing::ValuesIn(corpus::rejected()),
                         [](const auto& info) { return info.param.name; });

TEST(NTriplesCorpus, MeetsMinimumSize) {
    EXPECT_GE(corpus::accepted().size(), 30u);
    EXPECT_GE(corpus::rejected().size(), 15u);
}

TEST(NTriples, SerializationRoundTrips) {
    for (const auto& c : corpus::accepted()) {
        auto g = parse_ntriples(c.input);
        auto text = to_ntriples(g);
        auto again = parse_ntriples(text);
        EXPECT_EQ(again.triples(), g.triples()) << c.name;
        EXPECT_EQ(to_ntriples(again), text) << c.name;
    }
}

TEST(NTriples, ErrorLeavesNoPartialGraph) {
    // All-or-nothing: the valid first line is not observable after a failure.
    EXPECT_THROW(parse_ntriples(corpus::st("\"ok\"") + "\nbroken"), ParseError);
}

TEST(Graph, SetSemanticsAndInsertionOrder) {
    Graph g;
    Term s = Term::iri("http://e.org/s");
    EXPECT_TRUE(g.add({s, "http://e.org/p", Term::literal("b")}));
    EXPECT_TRUE(g.add({s, "http://e.org/p", Term::literal("a")}));
    EXPECT_FALSE(g.add({s, "http://e.org/p", Term::literal("b")}));
    ASSERT_EQ(g.size(), 2u);
    const auto& objs = g.objects("http://e.org/s", "http://e.org/p");
    ASSERT_EQ(objs.size(), 2u);
    EXPECT_EQ(objs[0].value, "b");
    EXPECT_EQ(objs[1].value, "a");
}

TEST(Graph, LiteralsWithDifferentDatatypeAreDistinct) {
    Graph g;
    Term s = Term::iri("http://e.org/s");
    g.add({s, "http://e.org/p", Term::literal("1")});
    g.add({s, "http://e.org/p", Term::literal("1", vocab::xsd("integer"))});
    g.add({s, "http://e.org/p", Term::literal("1", vocab::kXsdString, "en")});
    EXPECT_EQ(g.size(), 3u);
}

TEST(Graph, RejectsLiteralSubjectAndRelativePredicate) {
    Graph g;
    EXPECT_THROW(g.add({Term::literal("x"), "http://e.org/p", Term::literal("y")}), Error);
    EXPECT_THROW(g.add({Term::iri("http://e.org/s"), "p", Term::literal("y")}), Error);
}

TEST(Graph, InstancesOfTypeAreSortedAndUnique) {
    auto g = parse_ntriples(
        "<http://e.org/b> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://e.org/T> .\n"
        "<http://e.org/a> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://e.org/T> .\n"
        "<http://e.org/c> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://e.org/U> .\n"
        "_:x <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://e.org/T> .\n");
    EXPECT_EQ(instances_of_type(g, "http://e.org/T"), (std::vector<std::string>{"http://e.org/a", "http://e.org/b"}));
}

TEST(PropertyPath, ResolvesThroughNestedResources) {
    auto g = parse_ntriples(
        "<http://e.org/e> <http://e.org/address> _:a .\n"
        "<http://e.org/e> <http://e.org/address> <http://e.org/addr2> .\n"
        "_:a <http://e.org/city> \"Berlin\" .\n"
        "<http://e.org/addr2> <http://e.org/city> \"Wien\" .\n"
        "<http://e.org/e> <http://e.org/name> \"n\" .\n");
    PropertyPath city{{"http://e.org/address", "http://e.org/city"}};
    auto vals = resolve_path(g, "http://e.org/e", city);
    ASSERT_EQ(vals.size(), 2u);
    EXPECT_EQ(vals[0].value, "Berlin");
    EXPECT_EQ(vals[1].value, "Wien");
    // Literals do not have outgoing edges.
    EXPECT_TRUE(resolve_path(g, "http://e.org/e", PropertyPath{{"http://e.org/name", "http://e.org/city"}}).empty());
}

TEST(FieldNamer, LocalNamesAndCollisions) {
    EXPECT_EQ(local_name("https://schema.org/name"), "name");
    EXPECT_EQ(local_name("http://www.w3.org/2001/XMLSchema#string"), "string");
    EXPECT_EQ(local_name("urn:isbn:123"), "123");
    EXPECT_EQ(local_name("http://e.org/path/"), "path");

    FieldNamer namer({"http://a.org/name", "http://b.org/name", "http://a.org/city"});
    EXPECT_EQ(namer.name("http://a.org/name"), "name");
    EXPECT_EQ(namer.name("http://b.org/name"), "name_2");
    EXPECT_EQ(namer.canonical(PropertyPath{{"http://a.org/city", "http://b.org/name"}}), "city.name_2");
}
