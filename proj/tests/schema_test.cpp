#include <gtest/gtest.h>

#include "kgdedup/schema.hpp"
#include "test_support.hpp"

using namespace kgdedup;
namespace ts = testing_support;

namespace {

Graph shapes() { return parse_ntriples(ts::slurp(ts::data_dir() + "/running_example_shapes.nt")); }
Graph example() { return parse_ntriples(ts::slurp(ts::data_dir() + "/running_example.nt")); }

const std::string kShape = "https://example.org/ds/EventShape";

}  // namespace

TEST(DatatypeTable, DefaultCategories) {
    DatatypeTable t;
    EXPECT_EQ(t.categorize(vocab::xsd("string")), DatatypeCategory::DdString);
    EXPECT_EQ(t.categorize(vocab::xsd("dateTime")), DatatypeCategory::DdString);
    EXPECT_EQ(t.categorize(vocab::kRdfLangString), DatatypeCategory::DdString);
    EXPECT_EQ(t.categorize(vocab::xsd("decimal")), DatatypeCategory::DdNumber);
    EXPECT_EQ(t.categorize(vocab::xsd("integer")), DatatypeCategory::DdNumber);
    EXPECT_EQ(t.categorize(vocab::xsd("boolean")), DatatypeCategory::DdBoolean);
}

TEST(DatatypeTable, UnknownTypeWarnsAndFallsBackToString) {
    Diagnostics d;
    EXPECT_EQ(categorize_datatype("http://e.org/custom", &d), DatatypeCategory::DdString);
    ASSERT_EQ(d.warnings.size(), 1u);
    EXPECT_NE(d.warnings[0].find("custom"), std::string::npos);
}

TEST(DatatypeTable, ExtendFromJson) {
    DatatypeTable t;
    t.extend_from_json({{"http://e.org/money", "DdNumber"}});
    EXPECT_EQ(t.categorize("http://e.org/money"), DatatypeCategory::DdNumber);
    EXPECT_THROW(t.extend_from_json({{"http://e.org/x", "Decimal"}}), ConfigError);
    EXPECT_THROW(t.extend_from_json(nlohmann::json::array()), ConfigError);
}

TEST(ShapeExtraction, RunningExampleShape) {
    auto spec = extract_domain_spec(shapes(), kShape, 1);
    EXPECT_EQ(spec.type_iri, "https://schema.org/Event");
    EXPECT_EQ(spec.keys(), (std::vector<std::string>{"address", "address.addressLocality", "address.postalCode",
                                                     "address.streetAddress", "compliesWith", "description", "name"}));
    const auto* name = spec.find("name");
    ASSERT_TRUE(name);
    EXPECT_TRUE(name->multi_valued);  // no sh:maxCount
    EXPECT_FALSE(spec.find("description")->multi_valued);
    EXPECT_TRUE(spec.find("address")->is_nested_instance);
    EXPECT_TRUE(spec.has_sub_paths("address"));
    EXPECT_FALSE(spec.has_sub_paths("name"));
    EXPECT_EQ(spec.find("address.postalCode")->path.segments,
              (std::vector<std::string>{"https://schema.org/address", "https://schema.org/postalCode"}));
}

TEST(ShapeExtraction, DepthLimitsNesting) {
    auto g = shapes();
    // Make the address shape point back to the event shape to exercise cycle handling.
    g.add({Term::iri("https://example.org/ds/PostalAddressShape"), vocab::sh("property"), Term::blank("back")});
    g.add({Term::blank("back"), vocab::sh("path"), Term::iri("https://schema.org/about")});
    g.add({Term::blank("back"), vocab::sh("node"), Term::iri(kShape)});
    auto d1 = extract_domain_spec(g, kShape, 1);
    EXPECT_TRUE(d1.find("address.about"));
    EXPECT_FALSE(d1.find("address.about.name"));
    auto d2 = extract_domain_spec(g, kShape, 2);
    EXPECT_FALSE(d2.find("address.about.name"));  // the event shape is already being expanded
}

TEST(ShapeExtraction, ClassReferenceFindsTargetShape) {
    auto g = parse_ntriples(
        "<http://e.org/S> <http://www.w3.org/ns/shacl#targetClass> <http://e.org/T> .\n"
        "<http://e.org/S> <http://www.w3.org/ns/shacl#property> _:p .\n"
        "_:p <http://www.w3.org/ns/shacl#path> <http://e.org/place> .\n"
        "_:p <http://www.w3.org/ns/shacl#class> <http://e.org/Place> .\n"
        "_:p <http://www.w3.org/ns/shacl#maxCount> \"1\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n"
        "<http://e.org/PS> <http://www.w3.org/ns/shacl#targetClass> <http://e.org/Place> .\n"
        "<http://e.org/PS> <http://www.w3.org/ns/shacl#property> _:q .\n"
        "_:q <http://www.w3.org/ns/shacl#path> <http://e.org/lat> .\n"
        "_:q <http://www.w3.org/ns/shacl#datatype> <http://www.w3.org/2001/XMLSchema#double> .\n");
    auto spec = extract_domain_spec(g, "http://e.org/S", 1);
    ASSERT_TRUE(spec.find("place.lat"));
    EXPECT_EQ(spec.find("place.lat")->category, DatatypeCategory::DdNumber);
    EXPECT_TRUE(spec.find("place.lat")->multi_valued);  // no maxCount on the leaf
}

TEST(ShapeExtraction, Errors) {
    EXPECT_THROW(extract_domain_spec(shapes(), "https://example.org/ds/Missing", 1), SpecError);
    EXPECT_THROW(extract_domain_spec(shapes(), kShape, 0), SpecError);
}

TEST(EmergentSchema, RunningExampleData) {
    auto spec = infer_emergent_schema(example(), "https://schema.org/Event", 1);
    EXPECT_EQ(spec.keys(), (std::vector<std::string>{"address", "compliesWith", "description", "name"}));
    EXPECT_TRUE(spec.find("name")->multi_valued);
    EXPECT_FALSE(spec.find("description")->multi_valued);
    // One resource against two literals: not nested, so no sub-properties.
    EXPECT_FALSE(spec.find("address")->is_nested_instance);
    EXPECT_TRUE(spec.find("compliesWith")->is_nested_instance);
}

TEST(EmergentSchema, MajorityDatatypeWins) {
    Graph g;
    for (int i = 0; i < 3; ++i) {
        std::string s = "i" + std::to_string(i);
        ts::add_thing(g, s);
        g.add({Term::iri(ts::ex(s)), ts::ex("n"), Term::literal(std::to_string(i), vocab::xsd("integer"))});
    }
    g.add({Term::iri(ts::ex("i0")), ts::ex("flag"), Term::literal("true", vocab::xsd("boolean"))});
    g.add({Term::iri(ts::ex("i1")), ts::ex("flag"), Term::literal("x")});
    auto spec = infer_emergent_schema(g, ts::kThing, 1);
    EXPECT_EQ(spec.find("n")->category, DatatypeCategory::DdNumber);
    EXPECT_EQ(spec.find("flag")->category, DatatypeCategory::DdString);  // tie
}

TEST(EmergentSchema, NoInstancesIsAnError) {
    EXPECT_THROW(infer_emergent_schema(example(), "https://schema.org/Nothing", 1), SpecError);
}

TEST(DomainSpec, JsonShape) {
    auto j = to_json(extract_domain_spec(shapes(), kShape, 1));
    EXPECT_EQ(j["type"], "https://schema.org/Event");
    EXPECT_EQ(j["properties"].size(), 7u);
    EXPECT_EQ(j["properties"][0]["key"], "address");
    EXPECT_EQ(j["properties"][0]["nested"], true);
}
