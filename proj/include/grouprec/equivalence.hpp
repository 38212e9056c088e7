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

// Reduction checks: THC with no transition is plain hypergraph convolution,
// and hypergraph convolution on the user-group hypergraph is two chained
// bipartite graph convolutions.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "grouprec/dense_matrix.hpp"
#include "grouprec/incidence.hpp"
#include "grouprec/model.hpp"

namespace grouprec {

struct EquivalenceCase {
  std::size_t nodes = 10;
  std::size_t hyperedges = 8;
  double density = 0.3;
  std::uint64_t topology_seed = 1;
  std::size_t dim = 8;
  std::uint64_t embedding_seed = 2;
  double tolerance = 1e-10;
};

struct EquivalenceResult {
  bool passed = false;
  double max_deviation = 0.0;
};

struct LightGcnEquivalenceResult : EquivalenceResult {
  /// Deviation of the symmetric-normalization route from the hypergraph
  /// convolution; informational only.
  double symmetric_route_deviation = 0.0;
};

/// Bernoulli(density) incidences.
inline IncidenceMatrix random_incidence(std::size_t nodes, std::size_t hyperedges, double density,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(density);
  std::vector<Incidence> xs;
  for (std::size_t n = 0; n < nodes; ++n)
    for (std::size_t e = 0; e < hyperedges; ++e)
      if (coin(rng)) xs.push_back({static_cast<Id>(n), static_cast<Id>(e)});
  return IncidenceMatrix(nodes, hyperedges, std::move(xs));
}

inline DenseMatrix case_embeddings(const EquivalenceCase& c, std::size_t rows) {
  std::mt19937_64 rng(c.embedding_seed);
  return DenseMatrix::random_normal(rows, c.dim, 1.0, rng);
}

/// thc_layer with `gamma` against the plain hypergraph convolution. A
/// nonzero gamma injects a random intrinsic block, which should fail.
inline EquivalenceResult check_thc_vs_hyperconv(const EquivalenceCase& c, double gamma = 0.0) {
  const IncidenceMatrix inc = random_incidence(c.nodes, c.hyperedges, c.density, c.topology_seed);
  const DenseMatrix x = case_embeddings(c, c.nodes);
  DenseMatrix thc_out;
  if (gamma == 0.0) {
    thc_out = thc_layer(x, inc, 0.0).output;
  } else {
    std::mt19937_64 rng(c.embedding_seed ^ 0x9e3779b97f4a7c15ULL);
    const DenseMatrix intrinsic = DenseMatrix::random_normal(c.hyperedges, c.dim, 1.0, rng);
    thc_out = thc_layer(x, inc, gamma, &intrinsic).output;
  }
  EquivalenceResult r;
  r.max_deviation = thc_out.max_abs_diff(oracle_hypergraph_conv(x, inc));
  r.passed = r.max_deviation <= c.tolerance;
  return r;
}

/// Treats the random incidence as a groups x users adjacency A and compares
/// two chained bipartite convolutions against D^-1 H B^-1 H^T with H = A.
inline LightGcnEquivalenceResult check_thc_vs_lightgcn(const EquivalenceCase& c) {
  const IncidenceMatrix adjacency =
      random_incidence(c.nodes, c.hyperedges, c.density, c.topology_seed);
  const DenseMatrix groups = case_embeddings(c, c.nodes);
  const DenseMatrix hyperconv = oracle_hypergraph_conv(groups, adjacency);
  LightGcnEquivalenceResult r;
  r.max_deviation = oracle_lightgcn_two_layer(groups, adjacency).max_abs_diff(hyperconv);
  r.symmetric_route_deviation =
      symmetric_lightgcn_two_layer(groups, adjacency).max_abs_diff(hyperconv);
  r.passed = r.max_deviation <= c.tolerance;
  return r;
}

/// Standard battery: `seeds` random cases per (dim, density) cell.
inline std::vector<EquivalenceCase> equivalence_battery(std::size_t seeds,
                                                        std::vector<std::size_t> dims = {1, 8, 64},
                                                        std::vector<double> densities = {0.05, 0.5},
                                                        double tolerance = 1e-10) {
  std::vector<EquivalenceCase> cases;
  std::uint64_t s = 1;
  for (std::size_t d : dims)
    for (double rho : densities)
      for (std::size_t i = 0; i < seeds; ++i, ++s) {
        EquivalenceCase c;
        c.nodes = 5 + (s * 7) % 36;
        c.hyperedges = 3 + (s * 11) % 38;
        c.density = rho;
        c.topology_seed = 1000 + s;
        c.embedding_seed = 5000 + s;
        c.dim = d;
        c.tolerance = tolerance;
        cases.push_back(c);
      }
  return cases;
}

}  // namespace grouprec
