// tests/stats_test.cc

// Copyright 2026  The corpusforge Authors

// See the LICENSE file at the top of the source tree.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "corpusforge/stats.h"

#include <gtest/gtest.h>

#include <numeric>

#include "corpusforge/error.h"
#include "json.hpp"
#include "test_util.h"

namespace corpusforge {
namespace {

using testing::Rng;

SystemScores scores(std::string label, std::vector<std::pair<std::uint64_t, std::uint64_t>> rows) {
  SystemScores s;
  s.label = std::move(label);
  for (auto [errors, words] : rows) s.per_utterance.push_back({errors, words});
  return s;
}

SystemScores random_system(Rng& rng, std::size_t n, std::uint64_t max_errors) {
  SystemScores s;
  for (std::size_t i = 0; i < n; ++i) s.per_utterance.push_back({rng.below(max_errors + 1), 1 + rng.below(12)});
  return s;
}

// Same reference word counts as `base`, fresh error counts.
SystemScores paired(Rng& rng, const SystemScores& base, std::uint64_t max_errors) {
  SystemScores s = base;
  for (auto& u : s.per_utterance) u.errors = rng.below(max_errors + 1);
  return s;
}

TEST(Bootstrap, HandComputedTwoUtterances) {
  const auto a = scores("a", {{1, 1}, {0, 1}});
  const auto b = scores("b", {{0, 1}, {0, 1}});
  // Ordered draws (0,0) (0,1) (1,0) favour b; (1,1) is a tie: (3 + 0.5) / 4.
  const auto exact = exhaustive_poi(a, b);
  EXPECT_EQ(exact.poi, 0.875);
  EXPECT_EQ(exact.total_weight, 4u);
  EXPECT_EQ(exact.twice_numerator, 7u);

  BootstrapOptions options;
  options.enumerate = true;
  const auto report = bootstrap_compare(a, b, options);
  EXPECT_EQ(report.replicates, 4u);
  EXPECT_EQ(report.poi, 0.875);
}

TEST(Bootstrap, SingleUtterancePoiIsZeroHalfOrOne) {
  EXPECT_EQ(exhaustive_poi(scores("a", {{2, 5}}), scores("b", {{1, 5}})).poi, 1.0);
  EXPECT_EQ(exhaustive_poi(scores("a", {{1, 5}}), scores("b", {{1, 5}})).poi, 0.5);
  EXPECT_EQ(exhaustive_poi(scores("a", {{0, 5}}), scores("b", {{1, 5}})).poi, 0.0);
}

TEST(Bootstrap, SelfComparisonAndDominance) {
  Rng rng(91);
  const auto a = random_system(rng, 50, 5);
  for (std::uint64_t b_reps : {1u, 7u, 1000u}) {
    BootstrapOptions options;
    options.replicates = b_reps;
    options.seed = 5;
    const auto self = bootstrap_compare(a, a, options);
    EXPECT_EQ(self.poi, 0.5);
    EXPECT_EQ(self.mean_diff, 0.0);
  }
  SystemScores worse = a;
  for (auto& u : worse.per_utterance) u.errors += 1;
  EXPECT_EQ(bootstrap_compare(worse, a).poi, 1.0);
}

TEST(Bootstrap, Errors) {
  EXPECT_THROW(bootstrap_compare(scores("a", {{1, 1}}), scores("b", {{1, 1}, {0, 1}})),
               ValidationError);
  EXPECT_THROW(bootstrap_compare(scores("a", {{1, 0}}), scores("b", {{1, 0}})), ValidationError);
  BootstrapOptions zero;
  zero.replicates = 0;
  EXPECT_THROW(bootstrap_compare(scores("a", {{1, 1}}), scores("b", {{1, 1}}), zero),
               ValidationError);
  SystemScores nine;
  nine.per_utterance.assign(9, {1, 1});
  EXPECT_THROW(exhaustive_poi(nine, nine), ValidationError);
}

TEST(BootstrapProperty, EnumerationMatchesExhaustive) {
  Rng rng(92);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(5);
    auto a = random_system(rng, n, 4);
    auto b = paired(rng, a, 4);
    if (n > 1 && rng.below(4) == 0) a.per_utterance[0].ref_words = 0;  // zero-word draws
    b.per_utterance[0].ref_words = a.per_utterance[0].ref_words;
    BootstrapOptions options;
    options.enumerate = true;
    const auto exact = exhaustive_poi(a, b);
    const auto report = bootstrap_compare(a, b, options);
    ASSERT_EQ(report.poi, exact.poi);
    ASSERT_EQ(report.poi_twice_numerator * exact.total_weight,
              exact.twice_numerator * report.replicates);
  }
}

TEST(BootstrapProperty, AntisymmetricAndReproducible) {
  Rng rng(93);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_system(rng, 5 + rng.below(60), 6);
    const auto b = paired(rng, a, 6);
    BootstrapOptions options;
    options.replicates = 500 + rng.below(1500);
    options.seed = rng.next();
    const auto ab = bootstrap_compare(a, b, options);
    const auto ba = bootstrap_compare(b, a, options);
    ASSERT_EQ(ab.poi + ba.poi, 1.0);
    ASSERT_EQ(ab.poi_twice_numerator + ba.poi_twice_numerator, 2 * ab.replicates);
    ASSERT_EQ(format_bootstrap_report(ab), format_bootstrap_report(bootstrap_compare(a, b, options)));
    ASSERT_LE(ab.ci_low, ab.mean_diff);
    ASSERT_LE(ab.mean_diff, ab.ci_high);
    ASSERT_GE(ab.poi, 0.0);
    ASSERT_LE(ab.poi, 1.0);
  }
}

TEST(BootstrapProperty, ParallelEqualsSerial) {
  Rng rng(94);
  const auto a = random_system(rng, 80, 5);
  const auto b = paired(rng, a, 5);
  BootstrapOptions options;
  options.replicates = 3000;
  options.seed = 17;
  const auto serial = bootstrap_compare(a, b, options);
  options.threads = 4;
  const auto parallel = bootstrap_compare(a, b, options);
  EXPECT_EQ(format_bootstrap_report(serial), format_bootstrap_report(parallel));
}

TEST(BootstrapProperty, ReplicateIndicesArePure) {
  EXPECT_EQ(replicate_indices(3, 10, 50), replicate_indices(3, 10, 50));
  EXPECT_NE(replicate_indices(3, 10, 50), replicate_indices(3, 11, 50));
  for (auto i : replicate_indices(99, 0, 7)) EXPECT_LT(i, 7u);
}

TEST(BootstrapProperty, IntervalNarrowsWithMoreUtterances) {
  Rng rng(95);
  auto width = [&](std::size_t n) {
    SystemScores a, b;
    for (std::size_t i = 0; i < n; ++i) {
      a.per_utterance.push_back({rng.below(10) < 2 ? 1u : 0u, 10});
      b.per_utterance.push_back({rng.below(10) < 1 ? 1u : 0u, 10});
    }
    BootstrapOptions options;
    options.replicates = 2000;
    options.seed = 1;
    const auto r = bootstrap_compare(a, b, options);
    return r.ci_high - r.ci_low;
  };
  EXPECT_GT(width(20), width(2000));
}

TEST(Significance, Bands) {
  EXPECT_TRUE(is_significant(0.96));
  EXPECT_FALSE(is_significant(0.85));
  EXPECT_FALSE(is_significant(0.5));
  EXPECT_TRUE(is_significant(0.95));
  EXPECT_EQ(significance_band(0.85), SignificanceBand::kAcceptable);
  EXPECT_EQ(significance_band(0.5), SignificanceBand::kNotSignificant);
  EXPECT_NE(describe_significance(0.85).find("acceptable"), std::string::npos);
}

TEST(Significance, ReportCarriesGeneratorAndBand) {
  Rng rng(96);
  const auto a = random_system(rng, 30, 4);
  const auto b = paired(rng, a, 2);
  BootstrapOptions options;
  options.seed = 17;
  options.replicates = 1000;
  const auto doc = nlohmann::json::parse(format_bootstrap_report(bootstrap_compare(a, b, options)));
  EXPECT_EQ(doc["seed"], 17);
  EXPECT_EQ(doc["replicates"], 1000);
  EXPECT_EQ(doc["generator"], kBootstrapGenerator);
  for (const char* key : {"mean_diff", "ci_low", "ci_high", "poi", "level", "significant", "band"}) {
    EXPECT_TRUE(doc.contains(key)) << key;
  }
}

}  // namespace
}  // namespace corpusforge
