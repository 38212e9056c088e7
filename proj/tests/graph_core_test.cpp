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

#include <algorithm>
#include <set>
#include <sstream>

#include "test_support.hpp"

namespace grouprec {
namespace {

using testing::random_graph;

TEST(InteractionGraph, SortsAndDeduplicates) {
  InteractionGraph g(2, 3, 1, {{1, 2}, {0, 0}, {0, 0}, {0, 1}}, {{1, 0}, {0, 0}});
  EXPECT_EQ(g.user_group_edges(), (std::vector<Edge>{{0, 0}, {0, 1}, {1, 2}}));
  InteractionGraph h(2, 3, 1, {{0, 1}, {1, 2}, {0, 0}}, {{0, 0}, {1, 0}});
  EXPECT_EQ(g, h);
}

TEST(InteractionGraph, RejectsOutOfRangeIds) {
  EXPECT_THROW(InteractionGraph(2, 2, 1, {{0, 2}}, {{0, 0}}), Error);
  EXPECT_THROW(InteractionGraph(2, 2, 1, {{2, 0}}, {{0, 0}}), Error);
  EXPECT_THROW(InteractionGraph(2, 2, 1, {{0, 0}}, {{0, 1}}), Error);
}

TEST(EdgeList, DuplicateLinesCollapse) {
  std::istringstream ug("0\t0\n0\t0\n1\t2\n");
  std::istringstream ui("0\t0\n");
  const auto g = make_graph(parse_edge_list(ug, "ug"), parse_edge_list(ui, "ui"));
  EXPECT_EQ(g.user_group_edges().size(), 2u);
  EXPECT_EQ(g.num_users(), 2u);
  EXPECT_EQ(g.num_groups(), 3u);
  EXPECT_EQ(g.num_items(), 1u);
}

TEST(EdgeList, EmptyItemFileIsAnError) {
  const auto dir = testing::scratch_dir("io");
  write_edge_list((dir / "ug.tsv").string(), std::vector<Edge>{{0, 0}});
  write_edge_list((dir / "ui.tsv").string(), std::vector<Edge>{});
  try {
    load_interactions((dir / "ug.tsv").string(), (dir / "ui.tsv").string());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no user-item edges"), std::string::npos);
  }
}

TEST(EdgeList, ParseErrorsCarryLineNumbers) {
  const std::vector<std::pair<std::string, std::size_t>> bad{
      {"0\t1\n2\tx\n", 2}, {"0 1\n", 1}, {"0\t1\t2\n", 1}, {"0\t1\n\n-1\t0\n", 3}, {"0\t\n", 1}};
  for (const auto& [text, line] : bad) {
    std::istringstream in(text);
    try {
      parse_edge_list(in, "f.tsv");
      FAIL() << "accepted: " << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << text;
      EXPECT_NE(std::string(e.what()).find("f.tsv:"), std::string::npos);
    }
  }
}

TEST(EdgeList, CountOverridesKeepTrailingIds) {
  EntityCounts c;
  c.groups = 10;
  const auto g = make_graph({{0, 1}}, {{0, 0}}, c);
  EXPECT_EQ(g.num_groups(), 10u);
  EXPECT_THROW(make_graph({}, {{0, 0}}), Error);
}

TEST(EdgeList, TsvRoundTripIsExact) {
  const auto dir = testing::scratch_dir("rt");
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = random_graph(12, 7, 9, 0.3, seed);
    write_edge_list((dir / "ug.tsv").string(), g.user_group_edges());
    write_edge_list((dir / "ui.tsv").string(), g.user_item_edges());
    EntityCounts c{g.num_users(), g.num_groups(), g.num_items()};
    EXPECT_EQ(load_interactions((dir / "ug.tsv").string(), (dir / "ui.tsv").string(), c), g);
  }
}

TEST(Split, FloorCounts) {
  const auto one = split_counts(1, 0.3, 0.2);
  EXPECT_EQ(one.test, 0u);
  EXPECT_EQ(one.train, 1u);
  const auto ten = split_counts(10, 0.3, 0.2);
  EXPECT_EQ(ten.test, 3u);
  EXPECT_EQ(ten.validation, 1u);
  EXPECT_EQ(ten.train, 6u);
}

TEST(Split, TenGroupUser) {
  std::vector<Edge> ug;
  for (Id g = 0; g < 10; ++g) ug.push_back({0, g});
  const InteractionGraph full(1, 10, 1, ug, {{0, 0}});
  const auto s = split_train_test(full, 0.3, 0.2, 11);
  EXPECT_EQ(s.test[0].size(), 3u);
  EXPECT_EQ(s.validation[0].size(), 1u);
  EXPECT_EQ(s.train.user_group_edges().size(), 6u);
}

TEST(Split, PropertiesOnRandomGraphs) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto full = random_graph(30, 15, 10, 0.25, seed);
    const auto s = split_train_test(full, 0.3, 0.2, seed);
    EXPECT_EQ(s.train.user_item_edges(), full.user_item_edges());
    const auto orig = full.groups_by_user();
    const auto train = s.train.groups_by_user();
    for (std::size_t u = 0; u < orig.size(); ++u) {
      const auto c = split_counts(orig[u].size(), 0.3, 0.2);
      ASSERT_EQ(s.test[u].size(), c.test);
      ASSERT_EQ(s.validation[u].size(), c.validation);
      ASSERT_EQ(train[u].size(), c.train);
      std::multiset<Id> all(train[u].begin(), train[u].end());
      all.insert(s.test[u].begin(), s.test[u].end());
      all.insert(s.validation[u].begin(), s.validation[u].end());
      EXPECT_EQ(std::vector<Id>(all.begin(), all.end()), orig[u]);  // disjoint and complete
    }
  }
}

TEST(Split, SameSeedSameSplit) {
  const auto full = random_graph(25, 12, 8, 0.3, 3);
  const auto a = split_train_test(full, 0.3, 0.2, 99);
  const auto b = split_train_test(full, 0.3, 0.2, 99);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_THROW(split_train_test(full, 1.0, 0.0, 1), Error);
}

TEST(Hypergraphs, UserViewGroupHypergraph) {
  const InteractionGraph g(2, 3, 1, {{0, 0}, {0, 1}, {1, 1}}, {{0, 0}});
  const auto h = build_user_view_group_hypergraph(g);
  EXPECT_EQ(h.num_nodes(), 3u);
  EXPECT_EQ(h.num_hyperedges(), 2u);
  EXPECT_EQ(h.num_incidences(), 3u);
  EXPECT_EQ(h.hyperedge_degrees(), (std::vector<std::size_t>{2, 1}));
  EXPECT_EQ(h.node_degree(2), 0u);
}

TEST(Hypergraphs, ThreeMemberGroupHyperedge) {
  // One group with three members becomes a hyperedge over those three users.
  const InteractionGraph g(4, 2, 1, {{0, 0}, {1, 0}, {2, 0}, {3, 1}}, {{0, 0}});
  const auto ug = build_group_view_user_hypergraph(g);
  const auto nodes = ug.nodes_of(0);
  EXPECT_EQ(std::vector<Id>(nodes.begin(), nodes.end()), (std::vector<Id>{0, 1, 2}));
}

TEST(Hypergraphs, TransposeAndItemView) {
  const auto g = random_graph(9, 6, 5, 0.3, 4);
  const auto h = build_user_view_group_hypergraph(g);
  const auto ug = build_group_view_user_hypergraph(g);
  EXPECT_EQ(ug, h.transposed());
  for (std::size_t gid = 0; gid < h.num_nodes(); ++gid) {
    const auto a = ug.nodes_of(gid);
    const auto b = h.hyperedges_of(gid);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
  }
  const InteractionGraph two(2, 1, 1, {{0, 0}, {1, 0}}, {{0, 0}, {1, 0}});
  const auto ui = build_item_view_user_hypergraph(two);
  const auto members = ui.nodes_of(0);
  EXPECT_EQ(std::vector<Id>(members.begin(), members.end()), (std::vector<Id>{0, 1}));
}

TEST(Hypergraphs, DegreeDuality) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto hg = Hypergraphs::build(random_graph(15, 8, 11, 0.2, seed));
    for (const IncidenceMatrix* m : {&hg.group, &hg.user_item, &hg.user_group}) {
      const auto nd = m->node_degrees();
      const auto ed = m->hyperedge_degrees();
      const auto sn = std::accumulate(nd.begin(), nd.end(), std::size_t{0});
      const auto se = std::accumulate(ed.begin(), ed.end(), std::size_t{0});
      EXPECT_EQ(sn, m->num_incidences());
      EXPECT_EQ(se, m->num_incidences());
      for (std::size_t n = 0; n < m->num_nodes(); ++n)
        EXPECT_EQ(nd[n], m->hyperedges_of(n).size());
      EXPECT_EQ(IncidenceMatrix::from_dense(m->to_dense()), *m);
    }
  }
}

TEST(ColdStart, CapBehaviour) {
  std::vector<Edge> ug;
  for (Id g = 0; g < 6; ++g) ug.push_back({0, g});
  ug.push_back({1, 0});
  ug.push_back({1, 1});
  const InteractionGraph g(2, 6, 2, ug, {{0, 0}, {1, 1}});
  const auto capped = cap_group_degree(g, 1, 5);
  const auto by_user = capped.groups_by_user();
  EXPECT_EQ(by_user[0].size(), 1u);
  EXPECT_EQ(by_user[1].size(), 1u);
  EXPECT_EQ(cap_group_degree(g, 4, 5).groups_by_user()[1], (std::vector<Id>{0, 1}));
  EXPECT_THROW(cap_group_degree(g, 0, 5), Error);
}

TEST(ColdStart, CapNeverIncreasesDegree) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = random_graph(20, 10, 6, 0.4, seed);
    const auto before = g.groups_by_user();
    std::size_t prev_edges = 0;
    for (std::size_t k = 1; k <= 6; ++k) {
      const auto c = cap_group_degree(g, k, seed);
      EXPECT_EQ(c.user_item_edges(), g.user_item_edges());
      EXPECT_EQ(c, cap_group_degree(g, k, seed));
      const auto after = c.groups_by_user();
      for (std::size_t u = 0; u < before.size(); ++u) {
        EXPECT_EQ(after[u].size(), std::min(k, before[u].size()));
        EXPECT_TRUE(std::includes(before[u].begin(), before[u].end(), after[u].begin(),
                                  after[u].end()));
      }
      EXPECT_GE(c.user_group_edges().size(), prev_edges);
      prev_edges = c.user_group_edges().size();
    }
  }
}

TEST(Synthetic, GuaranteesAndDeterminism) {
  SyntheticSpec spec;
  spec.users_per_cluster = 30;
  spec.in_cluster_prob = 0.0;
  spec.noise_prob = 0.0;
  const auto g = generate_synthetic(spec);
  for (const auto& groups : g.groups_by_user()) EXPECT_GE(groups.size(), 2u);
  for (const auto& items : g.items_by_user()) EXPECT_GE(items.size(), 1u);
  EXPECT_EQ(g, generate_synthetic(spec));
  spec.noise_prob = 1.5;
  EXPECT_THROW(generate_synthetic(spec), Error);
  SyntheticSpec tiny;
  tiny.num_clusters = 1;
  tiny.groups_per_cluster = 1;
  EXPECT_THROW(generate_synthetic(tiny), Error);
}

TEST(Synthetic, ZeroNoiseStaysInCluster) {
  SyntheticSpec spec;
  spec.noise_prob = 0.0;
  const auto g = generate_synthetic(spec);
  for (const Edge& e : g.user_group_edges())
    EXPECT_EQ(spec.user_cluster(e.first), spec.group_cluster(e.second));
  for (const Edge& e : g.user_item_edges())
    EXPECT_EQ(spec.user_cluster(e.first), spec.item_cluster(e.second));
}

TEST(Synthetic, CrossClusterFractionMatchesNoiseShare) {
  const SyntheticSpec spec;  // 5 clusters, 100 users, 40 groups, in 0.2, noise 0.01
  const auto g = generate_synthetic(spec);
  std::size_t cross = 0;
  for (const Edge& e : g.user_group_edges())
    if (spec.user_cluster(e.first) != spec.group_cluster(e.second)) ++cross;
  // Expected per user: 40 * 0.2 = 8 in-cluster, 160 * 0.01 = 1.6 foreign.
  const double expected = 1.6 / 9.6;
  const double observed = static_cast<double>(cross) / g.user_group_edges().size();
  EXPECT_NEAR(observed, expected, 0.02);
}

TEST(Synthetic, NullModelHasNoClusterSignal) {
  SyntheticSpec spec;
  spec.in_cluster_prob = 0.05;
  spec.noise_prob = 0.05;
  const auto g = generate_synthetic(spec);
  std::size_t same = 0;
  for (const Edge& e : g.user_group_edges())
    if (spec.user_cluster(e.first) == spec.group_cluster(e.second)) ++same;
  EXPECT_NEAR(static_cast<double>(same) / g.user_group_edges().size(), 0.2, 0.03);
}

TEST(Stats, Averages) {
  const InteractionGraph g(2, 4, 3, {{0, 0}, {0, 1}, {1, 2}}, {{0, 0}, {1, 1}, {1, 2}, {0, 2}});
  const auto s = graph_stats(g);
  EXPECT_DOUBLE_EQ(s.groups_per_user, 1.5);
  EXPECT_DOUBLE_EQ(s.users_per_group, 0.75);
  EXPECT_DOUBLE_EQ(s.items_per_user, 2.0);
  EXPECT_DOUBLE_EQ(s.users_per_item, 4.0 / 3.0);
}

}  // namespace
}  // namespace grouprec
