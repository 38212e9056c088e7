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

#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "grouprec/incidence.hpp"
#include "grouprec/interaction_graph.hpp"
#include "grouprec/model.hpp"
#include "grouprec/objectives.hpp"

namespace grouprec {

/// A full-model instance small enough to perturb every coordinate.
struct SmallInstance {
  InteractionGraph graph;
  Hypergraphs hypergraphs;
  EmbeddingTable embeddings;
  std::vector<TrainTriple> triples;
};

/// Every user gets one or two groups (never all of them) and one to three
/// items; every group gets at least one member. One triple per positive.
inline SmallInstance make_small_instance(std::size_t users, std::size_t groups, std::size_t items,
                                         std::size_t dim, std::uint64_t seed,
                                         double init_stddev = 0.5) {
  if (groups < 2 || users < groups || items < 1) {
    throw Error("make_small_instance: need users >= groups >= 2 and items >= 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<Edge> ug, ui;
  for (Id u = 0; u < users; ++u) {
    const Id first = static_cast<Id>(u < groups ? u : rng() % groups);
    ug.push_back({u, first});
    if (rng() % 2 == 0) ug.push_back({u, static_cast<Id>((first + 1 + rng() % (groups - 1)) % groups)});
    const std::size_t n_items = 1 + rng() % std::min<std::size_t>(3, items);
    for (std::size_t k = 0; k < n_items; ++k) ui.push_back({u, static_cast<Id>(rng() % items)});
  }
  SmallInstance inst;
  inst.graph = InteractionGraph(users, groups, items, std::move(ug), std::move(ui));
  inst.hypergraphs = Hypergraphs::build(inst.graph);
  inst.embeddings = EmbeddingTable::random(users, groups, dim, init_stddev, seed + 1);
  const auto pos = inst.graph.groups_by_user();
  for (const Edge& e : inst.graph.user_group_edges()) {
    Id neg = 0;
    do {
      neg = static_cast<Id>(rng() % groups);
    } while (std::binary_search(pos[e.first].begin(), pos[e.first].end(), neg));
    inst.triples.push_back({e.first, e.second, neg});
  }
  return inst;
}

struct GradCheckCase {
  std::uint64_t seed = 0;
  Hyperparams hp;
  GradCheckReport report;
};

/// `count` instances (5 users, 4 groups, 6 items, d = 3) cycling through
/// gamma in {0, 0.5, 1}, beta in {0, 0.5, 1} and L in {1, 2}.
inline std::vector<GradCheckCase> run_gradcheck_suite(std::size_t count, double h = 1e-5,
                                                      double tolerance = 1e-4) {
  constexpr std::array<double, 3> kGammas{0.0, 0.5, 1.0};
  constexpr std::array<double, 3> kBetas{0.0, 0.5, 1.0};
  std::vector<GradCheckCase> out;
  for (std::size_t i = 0; i < count; ++i) {
    GradCheckCase c;
    c.seed = 100 + i;
    c.hp.gamma = kGammas[i % 3];
    c.hp.beta = kBetas[(i + i / 3) % 3];
    c.hp.layers = 1 + i % 2;
    c.hp.dim = 3;
    c.hp.lambda_ssl = 0.1;
    c.hp.lambda_reg = 1e-2;
    const SmallInstance inst = make_small_instance(5, 4, 6, c.hp.dim, c.seed);
    c.report = finite_diff_check(inst.embeddings, inst.hypergraphs, inst.triples, c.hp, h, tolerance);
    out.push_back(c);
  }
  return out;
}

}  // namespace grouprec
