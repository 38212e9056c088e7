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

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "grouprec/dense_matrix.hpp"
#include "grouprec/interaction_graph.hpp"

namespace grouprec {

/// One (node, hyperedge) membership.
struct Incidence {
  Id node = 0;
  Id hyperedge = 0;
  auto operator<=>(const Incidence&) const = default;
};

/// Binary node x hyperedge incidence matrix stored twice in CSR form, once
/// per node and once per hyperedge. Degrees are the CSR row lengths.
class IncidenceMatrix {
 public:
  IncidenceMatrix() = default;

  IncidenceMatrix(std::size_t num_nodes, std::size_t num_hyperedges,
                  std::vector<Incidence> incidences)
      : num_nodes_(num_nodes), num_hyperedges_(num_hyperedges) {
    std::sort(incidences.begin(), incidences.end());
    incidences.erase(std::unique(incidences.begin(), incidences.end()), incidences.end());
    for (const Incidence& x : incidences) {
      if (x.node >= num_nodes || x.hyperedge >= num_hyperedges) {
        throw Error("incidence (" + std::to_string(x.node) + ", " + std::to_string(x.hyperedge) +
                    ") out of range");
      }
    }
    build_csr(incidences, num_nodes, [](const Incidence& x) { return x.node; },
              [](const Incidence& x) { return x.hyperedge; }, node_offsets_, node_adj_);
    build_csr(incidences, num_hyperedges, [](const Incidence& x) { return x.hyperedge; },
              [](const Incidence& x) { return x.node; }, edge_offsets_, edge_adj_);
  }

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_hyperedges() const { return num_hyperedges_; }
  std::size_t num_incidences() const { return node_adj_.size(); }

  /// Sorted hyperedges containing node n (N_n).
  std::span<const Id> hyperedges_of(std::size_t n) const {
    return {node_adj_.data() + node_offsets_[n], node_offsets_[n + 1] - node_offsets_[n]};
  }
  /// Sorted nodes in hyperedge e (N_e).
  std::span<const Id> nodes_of(std::size_t e) const {
    return {edge_adj_.data() + edge_offsets_[e], edge_offsets_[e + 1] - edge_offsets_[e]};
  }

  std::size_t node_degree(std::size_t n) const { return node_offsets_[n + 1] - node_offsets_[n]; }
  std::size_t hyperedge_degree(std::size_t e) const {
    return edge_offsets_[e + 1] - edge_offsets_[e];
  }

  std::vector<std::size_t> node_degrees() const { return degrees(node_offsets_); }
  std::vector<std::size_t> hyperedge_degrees() const { return degrees(edge_offsets_); }

  std::vector<Incidence> incidences() const {
    std::vector<Incidence> out;
    out.reserve(num_incidences());
    for (std::size_t n = 0; n < num_nodes_; ++n)
      for (Id e : hyperedges_of(n)) out.push_back({static_cast<Id>(n), e});
    return out;
  }

  /// Swaps the roles of nodes and hyperedges.
  IncidenceMatrix transposed() const {
    std::vector<Incidence> flipped;
    flipped.reserve(num_incidences());
    for (const Incidence& x : incidences()) flipped.push_back({x.hyperedge, x.node});
    return IncidenceMatrix(num_hyperedges_, num_nodes_, std::move(flipped));
  }

  /// Dense {0,1} matrix with nodes as rows. Test-sized instances only.
  DenseMatrix to_dense() const {
    DenseMatrix h(num_nodes_, num_hyperedges_);
    for (const Incidence& x : incidences()) h(x.node, x.hyperedge) = 1.0;
    return h;
  }

  static IncidenceMatrix from_dense(const DenseMatrix& h) {
    std::vector<Incidence> xs;
    for (std::size_t n = 0; n < h.rows(); ++n)
      for (std::size_t e = 0; e < h.cols(); ++e)
        if (h(n, e) != 0.0) xs.push_back({static_cast<Id>(n), static_cast<Id>(e)});
    return IncidenceMatrix(h.rows(), h.cols(), std::move(xs));
  }

  bool operator==(const IncidenceMatrix&) const = default;

 private:
  template <class KeyFn, class ValFn>
  static void build_csr(const std::vector<Incidence>& xs, std::size_t rows, KeyFn key, ValFn val,
                        std::vector<std::size_t>& offsets, std::vector<Id>& adj) {
    offsets.assign(rows + 1, 0);
    for (const Incidence& x : xs) ++offsets[key(x) + 1];
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    adj.assign(xs.size(), 0);
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    // xs is sorted by (node, hyperedge); both CSR views come out sorted.
    for (const Incidence& x : xs) adj[cursor[key(x)]++] = val(x);
  }

  static std::vector<std::size_t> degrees(const std::vector<std::size_t>& offsets) {
    std::vector<std::size_t> d(offsets.size() - 1);
    for (std::size_t i = 0; i + 1 < offsets.size(); ++i) d[i] = offsets[i + 1] - offsets[i];
    return d;
  }

  std::size_t num_nodes_ = 0;
  std::size_t num_hyperedges_ = 0;
  std::vector<std::size_t> node_offsets_{0};
  std::vector<Id> node_adj_;
  std::vector<std::size_t> edge_offsets_{0};
  std::vector<Id> edge_adj_;
};

/// H: groups are nodes, users are hyperedges.
inline IncidenceMatrix build_user_view_group_hypergraph(const InteractionGraph& train) {
  std::vector<Incidence> xs;
  xs.reserve(train.user_group_edges().size());
  for (const Edge& e : train.user_group_edges()) xs.push_back({e.second, e.first});
  return IncidenceMatrix(train.num_groups(), train.num_users(), std::move(xs));
}

/// U_g: users are nodes, groups are hyperedges.
inline IncidenceMatrix build_group_view_user_hypergraph(const InteractionGraph& train) {
  std::vector<Incidence> xs;
  xs.reserve(train.user_group_edges().size());
  for (const Edge& e : train.user_group_edges()) xs.push_back({e.first, e.second});
  return IncidenceMatrix(train.num_users(), train.num_groups(), std::move(xs));
}

/// U_i: users are nodes, items are hyperedges.
inline IncidenceMatrix build_item_view_user_hypergraph(const InteractionGraph& train) {
  std::vector<Incidence> xs;
  xs.reserve(train.user_item_edges().size());
  for (const Edge& e : train.user_item_edges()) xs.push_back({e.first, e.second});
  return IncidenceMatrix(train.num_users(), train.num_items(), std::move(xs));
}

/// Column-wise concatenation [a | b]; hyperedges of b are renumbered after a's.
inline IncidenceMatrix concat_hyperedges(const IncidenceMatrix& a, const IncidenceMatrix& b) {
  if (a.num_nodes() != b.num_nodes()) {
    throw ShapeError("concat_hyperedges: node counts differ");
  }
  auto xs = a.incidences();
  const auto offset = static_cast<Id>(a.num_hyperedges());
  for (const Incidence& x : b.incidences()) xs.push_back({x.node, x.hyperedge + offset});
  return IncidenceMatrix(a.num_nodes(), a.num_hyperedges() + b.num_hyperedges(), std::move(xs));
}

/// The three hypergraphs the model convolves over.
struct Hypergraphs {
  IncidenceMatrix group;      // H, |G| x |U|
  IncidenceMatrix user_item;  // U_i, |U| x |I|
  IncidenceMatrix user_group; // U_g, |U| x |G|

  static Hypergraphs build(const InteractionGraph& train) {
    return {build_user_view_group_hypergraph(train), build_item_view_user_hypergraph(train),
            build_group_view_user_hypergraph(train)};
  }

  std::size_t num_users() const { return user_item.num_nodes(); }
  std::size_t num_groups() const { return group.num_nodes(); }
};

}  // namespace grouprec
