// Copyright 2026 The grouprec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "test_support.hpp"

namespace grouprec {
namespace {

TEST(Equivalence, BatteryShape) {
  const auto cases = equivalence_battery(30);
  EXPECT_EQ(cases.size(), 180u);
  for (const auto& c : cases) {
    EXPECT_GE(c.nodes, 5u);
    EXPECT_LE(c.nodes, 40u);
    EXPECT_GE(c.hyperedges, 3u);
    EXPECT_LE(c.hyperedges, 40u);
  }
}

TEST(Equivalence, ThcWithoutIntrinsicIsHyperconv) {
  for (const auto& c : equivalence_battery(30)) {
    const auto r = check_thc_vs_hyperconv(c);
    EXPECT_TRUE(r.passed) << "seed " << c.topology_seed << " dev " << r.max_deviation;
    EXPECT_LE(r.max_deviation, 1e-10);
  }
}

TEST(Equivalence, ChainedBipartiteConvIsHyperconv) {
  for (const auto& c : equivalence_battery(30)) {
    const auto r = check_thc_vs_lightgcn(c);
    EXPECT_TRUE(r.passed) << "seed " << c.topology_seed << " dev " << r.max_deviation;
  }
}

TEST(Equivalence, NegativeControlFails) {
  std::size_t covered = 0;
  for (const auto& c : equivalence_battery(5)) {
    if (random_incidence(c.nodes, c.hyperedges, c.density, c.topology_seed).num_incidences() == 0)
      continue;
    ++covered;
    EXPECT_FALSE(check_thc_vs_hyperconv(c, 0.7).passed) << "seed " << c.topology_seed;
  }
  EXPECT_GT(covered, 20u);
}

TEST(Equivalence, SymmetricRouteDeviatesOnIrregularGraphs) {
  std::size_t deviating = 0;
  for (const auto& c : equivalence_battery(5)) deviating += check_thc_vs_lightgcn(c).symmetric_route_deviation > 1e-6;
  EXPECT_GT(deviating, 0u);
}

TEST(Equivalence, IdentityIncidenceIsExact) {
  std::vector<Incidence> xs;
  for (Id i = 0; i < 7; ++i) xs.push_back({i, i});
  const IncidenceMatrix eye(7, 7, xs);
  const auto x = testing::random_matrix(7, 4, 3);
  EXPECT_EQ(thc_layer(x, eye, 0.0).output.max_abs_diff(x), 0.0);
  EXPECT_EQ(oracle_hypergraph_conv(x, eye).max_abs_diff(x), 0.0);
  EXPECT_EQ(oracle_lightgcn_two_layer(x, eye).max_abs_diff(x), 0.0);
}

TEST(Equivalence, DegreeOneNodesAreExact) {
  // Every node touches one hyperedge; each hyperedge holds two nodes.
  std::vector<Incidence> xs;
  for (Id n = 0; n < 8; ++n) xs.push_back({n, n / 2});
  const IncidenceMatrix inc(8, 4, xs);
  const auto x = testing::random_matrix(8, 3, 9);
  const auto thc = thc_layer(x, inc, 0.0).output;
  EXPECT_EQ(thc.max_abs_diff(oracle_hypergraph_conv(x, inc)), 0.0);
  for (std::size_t n = 0; n < 8; ++n)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(thc(n, c), (x(n, c) + x(n ^ 1, c)) / 2);
}

TEST(Equivalence, ReportJson) {
  const auto j = equivalence_report(2);
  EXPECT_TRUE(j.at("passed").get<bool>());
  EXPECT_EQ(j.at("thc_vs_hyperconv").size(), 12u);
  EXPECT_EQ(j.at("thc_vs_lightgcn").size(), 12u);
  EXPECT_EQ(dump(j), dump(equivalence_report(2)));
}

TEST(Equivalence, GradcheckReportJson) {
  const auto j = gradcheck_report(2);
  EXPECT_TRUE(j.at("passed").get<bool>());
  ASSERT_EQ(j.at("cases").size(), 2u);
  EXPECT_LT(j.at("cases")[0].at("max_rel_error").get<double>(), 1e-4);
}

}  // namespace
}  // namespace grouprec
