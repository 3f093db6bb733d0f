#include <gtest/gtest.h>

#include "properties.hpp"

namespace {

void check(const props::Outcome& o) {
    EXPECT_GE(o.cases, 200u) << o.name;
    EXPECT_TRUE(o.ok()) << o.name << ": " << o.failure.value_or("");
}

}  // namespace

TEST(Properties, ComparatorSymmetryIdentityRange) { check(props::comparator_laws()); }
TEST(Properties, StandardizerIdempotence) { check(props::standardizer_idempotence()); }
TEST(Properties, MinAvgMaxOrder) { check(props::aggregation_order()); }
TEST(Properties, PreFilterMonotonicity) { check(props::prefilter_monotonicity()); }
TEST(Properties, DecisionAntitonicity) { check(props::decision_antitonicity()); }
TEST(Properties, WeightScaleInvariance) { check(props::weight_scale_invariance()); }
TEST(Properties, MetricIdentities) { check(props::metric_identities()); }
