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

// Transitional hypergraph convolution and the three-pipeline forward pass.
//
// Every layer in the model is linear in its inputs: gather a mean row per
// hyperedge, optionally add a gamma-scaled intrinsic row per hyperedge, then
// scatter a mean row back to every node. The forward pass keeps every
// intermediate so objectives.hpp can run the exact adjoint.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "grouprec/dense_matrix.hpp"
#include "grouprec/incidence.hpp"
#include "grouprec/sparse_ops.hpp"

namespace grouprec {

/// How the item-view user embeddings are produced.
enum class Variant {
  kDefault,            // L convolutions on the user x item hypergraph
  kGcnItem,            // one bipartite GCN layer from item means to users
  kJointSimultaneous,  // L convolutions on [U_i | U_g]
  kJointSequential,    // per layer: item hyperedges, then group hyperedges
};

/// Which user embedding feeds the score inner product.
enum class ScoreView {
  kCombined,  // beta-weighted sum of both views
  kItem,      // item-view user embedding only
};

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::kDefault: return "default";
    case Variant::kGcnItem: return "gcn_item";
    case Variant::kJointSimultaneous: return "joint_simultaneous";
    case Variant::kJointSequential: return "joint_sequential";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "default") return Variant::kDefault;
  if (s == "gcn_item") return Variant::kGcnItem;
  if (s == "joint_simultaneous") return Variant::kJointSimultaneous;
  if (s == "joint_sequential") return Variant::kJointSequential;
  throw Error("unknown variant mode '" + s + "'");
}

inline std::string to_string(ScoreView v) { return v == ScoreView::kItem ? "item" : "combined"; }

inline ScoreView parse_score_view(const std::string& s) {
  if (s == "combined") return ScoreView::kCombined;
  if (s == "item") return ScoreView::kItem;
  throw Error("unknown score_view '" + s + "'");
}

struct Hyperparams {
  double gamma = 1.0;        // transition intensity
  double beta = 0.5;         // weight of the item view in the combined user embedding
  double tau_u = 0.2;        // cross-view InfoNCE temperature
  double tau_g = 0.2;        // group-uniformity temperature
  double lambda_ssl = 0.1;   // weight of both self-supervised terms
  double lambda_reg = 1e-7;  // L2 weight on the embedding table
  double lr = 0.05;
  std::size_t dim = 64;
  std::size_t layers = 1;
  std::uint64_t seed = 2023;
  std::size_t patience = 10;  // evaluations without improvement before stopping
  std::vector<std::size_t> k_list{10, 20};
  double init_stddev = 0.1;

  Variant variant = Variant::kDefault;
  ScoreView score_view = ScoreView::kCombined;
  bool use_cssl = true;
  bool use_group_reg = true;

  void validate() const {
    auto fail = [](const std::string& what) { throw Error("invalid hyperparameter: " + what); };
    if (!(gamma >= 0.0)) fail("gamma must be >= 0");
    if (!(beta >= 0.0 && beta <= 1.0)) fail("beta must lie in [0, 1]");
    if (!(tau_u > 0.0) || !(tau_g > 0.0)) fail("temperatures must be > 0");
    if (!(lambda_ssl >= 0.0) || !(lambda_reg >= 0.0)) fail("loss weights must be >= 0");
    if (!(lr >= 0.0)) fail("learning rate must be >= 0");
    if (dim == 0) fail("dim must be >= 1");
    if (layers == 0) fail("layers must be >= 1");
    if (!(init_stddev >= 0.0)) fail("init_stddev must be >= 0");
    if (k_list.empty()) fail("k_list must be nonempty");
    for (std::size_t i = 0; i < k_list.size(); ++i) {
      if (k_list[i] == 0) fail("k_list entries must be >= 1");
      if (i > 0 && k_list[i] <= k_list[i - 1]) fail("k_list must be strictly increasing");
    }
  }
};

/// The only trainable state: two embeddings per user and one per group.
struct EmbeddingTable {
  DenseMatrix item_view_user;   // |U| x d
  DenseMatrix group_view_user;  // |U| x d
  DenseMatrix group;            // |G| x d

  static EmbeddingTable zeros(std::size_t users, std::size_t groups, std::size_t dim) {
    return {DenseMatrix(users, dim), DenseMatrix(users, dim), DenseMatrix(groups, dim)};
  }

  /// N(0, stddev^2) entries, drawn block by block from one seeded stream.
  static EmbeddingTable random(std::size_t users, std::size_t groups, std::size_t dim,
                               double stddev, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto a = DenseMatrix::random_normal(users, dim, stddev, rng);
    auto b = DenseMatrix::random_normal(users, dim, stddev, rng);
    auto g = DenseMatrix::random_normal(groups, dim, stddev, rng);
    return {std::move(a), std::move(b), std::move(g)};
  }

  EmbeddingTable zeros_like() const {
    return zeros(num_users(), num_groups(), dim());
  }

  std::size_t num_users() const { return item_view_user.rows(); }
  std::size_t num_groups() const { return group.rows(); }
  std::size_t dim() const { return group.cols(); }
  std::size_t parameter_count() const {
    return item_view_user.size() + group_view_user.size() + group.size();
  }

  std::array<DenseMatrix*, 3> blocks() { return {&item_view_user, &group_view_user, &group}; }
  std::array<const DenseMatrix*, 3> blocks() const {
    return {&item_view_user, &group_view_user, &group};
  }
  static constexpr std::array<const char*, 3> kBlockNames{"item_view_user", "group_view_user",
                                                          "group"};

  /// Flat coordinate access across the three blocks, in block order.
  double& at(std::size_t flat) {
    for (DenseMatrix* b : blocks()) {
      if (flat < b->size()) return b->values()[flat];
      flat -= b->size();
    }
    throw Error("EmbeddingTable::at: index out of range");
  }

  bool all_finite() const {
    return item_view_user.all_finite() && group_view_user.all_finite() && group.all_finite();
  }

  bool operator==(const EmbeddingTable&) const = default;
};

// ---------------------------------------------------------------------------
// Layers

/// Intermediates of one convolution layer.
struct LayerTrace {
  DenseMatrix input;   // node rows entering the layer
  DenseMatrix gather;  // t: per-hyperedge means
  DenseMatrix fused;   // q: t plus the transition term
  DenseMatrix output;  // node rows leaving the layer
};

/// output = D^-1 H (B^-1 H^T node_emb + gamma * intrinsic). A missing
/// intrinsic block is treated as zero.
inline LayerTrace thc_layer(const DenseMatrix& node_emb, const IncidenceMatrix& inc, double gamma,
                            const DenseMatrix* intrinsic = nullptr) {
  LayerTrace tr;
  tr.input = node_emb;
  tr.gather = hyperedge_gather(inc, node_emb);
  tr.fused = tr.gather;
  if (intrinsic != nullptr) {
    if (intrinsic->rows() != inc.num_hyperedges() || intrinsic->cols() != node_emb.cols()) {
      throw ShapeError("thc_layer: intrinsic block is " + intrinsic->shape_string() +
                       ", expected " + std::to_string(inc.num_hyperedges()) + "x" +
                       std::to_string(node_emb.cols()));
    }
    if (gamma != 0.0) tr.fused.add_scaled(*intrinsic, gamma);
  }
  tr.output = node_scatter(inc, tr.fused);
  return tr;
}

/// A linear step of a user-view pipeline.
struct UserStage {
  enum class Kind {
    kHyperConv,              // D^-1 H B^-1 H^T X
    kHyperConvKeepIsolated,  // same, but nodes without hyperedges keep their row
    kBipartiteGcn,           // D^-1/2 H B^-1/2 (B^-1 H^T X): item means, symmetric GCN step
  };
  Kind kind = Kind::kHyperConv;
  std::shared_ptr<const IncidenceMatrix> inc;
};

namespace detail {

/// Non-owning shared_ptr to a matrix owned by the caller.
inline std::shared_ptr<const IncidenceMatrix> borrow(const IncidenceMatrix& m) {
  return std::shared_ptr<const IncidenceMatrix>(std::shared_ptr<void>(), &m);
}

/// H B^-1/2 applied per node with the extra D^-1/2 factor: node n receives
/// sum_{e in N_n} x_e / sqrt(d_n * b_e).
inline DenseMatrix symmetric_scatter(const IncidenceMatrix& inc, const DenseMatrix& edge_rows) {
  DenseMatrix out(inc.num_nodes(), edge_rows.cols());
  for (std::size_t n = 0; n < inc.num_nodes(); ++n) {
    auto dst = out.row(n);
    for (Id e : inc.hyperedges_of(n)) {
      const double w =
          1.0 / std::sqrt(static_cast<double>(inc.node_degree(n) * inc.hyperedge_degree(e)));
      auto src = edge_rows.row(e);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * src[c];
    }
  }
  return out;
}

inline DenseMatrix symmetric_scatter_adjoint(const IncidenceMatrix& inc, const DenseMatrix& grad) {
  DenseMatrix out(inc.num_hyperedges(), grad.cols());
  for (std::size_t e = 0; e < inc.num_hyperedges(); ++e) {
    auto dst = out.row(e);
    for (Id n : inc.nodes_of(e)) {
      const double w =
          1.0 / std::sqrt(static_cast<double>(inc.node_degree(n) * inc.hyperedge_degree(e)));
      auto src = grad.row(n);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * src[c];
    }
  }
  return out;
}

}  // namespace detail

inline LayerTrace apply_stage(const UserStage& stage, const DenseMatrix& x) {
  switch (stage.kind) {
    case UserStage::Kind::kHyperConv:
      return thc_layer(x, *stage.inc, 0.0);
    case UserStage::Kind::kHyperConvKeepIsolated: {
      LayerTrace tr = thc_layer(x, *stage.inc, 0.0);
      for (std::size_t n = 0; n < stage.inc->num_nodes(); ++n) {
        if (stage.inc->node_degree(n) != 0) continue;
        auto src = x.row(n);
        auto dst = tr.output.row(n);
        std::copy(src.begin(), src.end(), dst.begin());
      }
      return tr;
    }
    case UserStage::Kind::kBipartiteGcn: {
      LayerTrace tr;
      tr.input = x;
      tr.gather = hyperedge_gather(*stage.inc, x);
      tr.fused = tr.gather;
      tr.output = detail::symmetric_scatter(*stage.inc, tr.fused);
      return tr;
    }
  }
  throw Error("apply_stage: unknown stage kind");
}

/// Gradient with respect to the stage input, given the gradient of its output.
inline DenseMatrix stage_adjoint(const UserStage& stage, const DenseMatrix& grad_out) {
  const IncidenceMatrix& inc = *stage.inc;
  switch (stage.kind) {
    case UserStage::Kind::kHyperConv:
      return hyperedge_gather_adjoint(inc, node_scatter_adjoint(inc, grad_out));
    case UserStage::Kind::kHyperConvKeepIsolated: {
      DenseMatrix g = hyperedge_gather_adjoint(inc, node_scatter_adjoint(inc, grad_out));
      for (std::size_t n = 0; n < inc.num_nodes(); ++n) {
        if (inc.node_degree(n) != 0) continue;
        auto src = grad_out.row(n);
        auto dst = g.row(n);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
      }
      return g;
    }
    case UserStage::Kind::kBipartiteGcn:
      return hyperedge_gather_adjoint(inc, detail::symmetric_scatter_adjoint(inc, grad_out));
  }
  throw Error("stage_adjoint: unknown stage kind");
}

/// A sequence of stages with the per-stage intermediates of one run.
struct PipelineTrace {
  std::vector<UserStage> stages;
  std::vector<LayerTrace> layers;

  const DenseMatrix& output() const { return layers.back().output; }
};

inline PipelineTrace run_pipeline(std::vector<UserStage> stages, const DenseMatrix& input) {
  PipelineTrace tr;
  tr.stages = std::move(stages);
  const DenseMatrix* x = &input;
  for (const UserStage& s : tr.stages) {
    tr.layers.push_back(apply_stage(s, *x));
    x = &tr.layers.back().output;
  }
  if (tr.layers.empty()) throw Error("run_pipeline: empty stage list");
  return tr;
}

/// Pulls a gradient on the pipeline output back to its input.
inline DenseMatrix pipeline_adjoint(const PipelineTrace& tr, DenseMatrix grad) {
  for (auto it = tr.stages.rbegin(); it != tr.stages.rend(); ++it) grad = stage_adjoint(*it, grad);
  return grad;
}

// ---------------------------------------------------------------------------
// The three pipelines

struct UserViews {
  DenseMatrix item_view;   // E_u^i after L layers
  DenseMatrix group_view;  // E_u^g after L layers
  PipelineTrace item_trace;
  PipelineTrace group_trace;
};

inline std::vector<UserStage> repeat_stage(const IncidenceMatrix& inc, std::size_t layers) {
  return std::vector<UserStage>(layers, UserStage{UserStage::Kind::kHyperConv, detail::borrow(inc)});
}

/// L plain convolutions (gamma = 0) on each user hypergraph independently.
/// Only the layer-L output is kept as the view embedding.
inline UserViews propagate_user_views(const EmbeddingTable& emb, const IncidenceMatrix& user_item,
                                      const IncidenceMatrix& user_group, std::size_t layers) {
  if (layers == 0) throw Error("propagate_user_views: need at least one layer");
  UserViews v;
  v.item_trace = run_pipeline(repeat_stage(user_item, layers), emb.item_view_user);
  v.group_trace = run_pipeline(repeat_stage(user_group, layers), emb.group_view_user);
  v.item_view = v.item_trace.output();
  v.group_view = v.group_trace.output();
  return v;
}

struct GroupPropagation {
  DenseMatrix groups;  // E_g after L layers
  std::vector<LayerTrace> layers;
};

/// L THC layers on the group block; every layer injects the same intrinsic
/// block `user_item_view` (one row per user hyperedge).
inline GroupPropagation propagate_groups(const EmbeddingTable& emb, const IncidenceMatrix& group_inc,
                                         const DenseMatrix& user_item_view, double gamma,
                                         std::size_t layers) {
  if (user_item_view.rows() != group_inc.num_hyperedges()) {
    throw ShapeError("propagate_groups: item-view block has " +
                     std::to_string(user_item_view.rows()) + " rows, hypergraph has " +
                     std::to_string(group_inc.num_hyperedges()) + " user hyperedges");
  }
  if (layers == 0) throw Error("propagate_groups: need at least one layer");
  GroupPropagation out;
  const DenseMatrix* x = &emb.group;
  for (std::size_t l = 0; l < layers; ++l) {
    out.layers.push_back(thc_layer(*x, group_inc, gamma, &user_item_view));
    x = &out.layers.back().output;
  }
  out.groups = *x;
  return out;
}

inline DenseMatrix combine_user_views(const DenseMatrix& item_view, const DenseMatrix& group_view,
                                      double beta) {
  item_view.require_same_shape(group_view, "combine_user_views");
  DenseMatrix out(item_view.rows(), item_view.cols());
  auto a = item_view.values();
  auto b = group_view.values();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = beta * a[i] + (1.0 - beta) * b[i];
  return out;
}

/// Everything a forward pass produced, kept for the backward pass.
struct ForwardTrace {
  PipelineTrace item_view;
  PipelineTrace group_view;
  std::vector<LayerTrace> group_layers;
  std::shared_ptr<const IncidenceMatrix> group_inc;  // H, for the adjoint

  DenseMatrix user_item_view;   // E_u^i
  DenseMatrix user_group_view;  // E_u^g
  DenseMatrix user;             // user embedding used for scoring
  DenseMatrix group;            // E_g

  double gamma = 0.0;
  double beta = 0.5;
  ScoreView score_view = ScoreView::kCombined;

  bool complete() const {
    return !item_view.layers.empty() && !group_view.layers.empty() && !group_layers.empty() &&
           group_inc != nullptr && !user.empty() && !group.empty();
  }
};

namespace detail {

inline void check_consistent(const EmbeddingTable& emb, const Hypergraphs& hg,
                             const Hyperparams& hp) {
  const std::size_t u = emb.num_users(), g = emb.num_groups();
  if (emb.group_view_user.rows() != u || hg.user_item.num_nodes() != u ||
      hg.user_group.num_nodes() != u || hg.group.num_hyperedges() != u) {
    throw ShapeError("forward: user counts disagree between embeddings and hypergraphs");
  }
  if (hg.group.num_nodes() != g || hg.user_group.num_hyperedges() != g) {
    throw ShapeError("forward: group counts disagree between embeddings and hypergraphs");
  }
  if (emb.item_view_user.cols() != emb.dim() || emb.group_view_user.cols() != emb.dim()) {
    throw ShapeError("forward: embedding blocks disagree on dimension");
  }
  if (hp.layers == 0) throw Error("forward: need at least one layer");
}

inline std::vector<UserStage> item_view_stages(Variant mode, const Hypergraphs& hg,
                                               std::size_t layers) {
  using Kind = UserStage::Kind;
  std::vector<UserStage> stages;
  switch (mode) {
    case Variant::kDefault:
      return repeat_stage(hg.user_item, layers);
    case Variant::kGcnItem:
      stages.push_back({Kind::kBipartiteGcn, borrow(hg.user_item)});
      return stages;
    case Variant::kJointSimultaneous: {
      auto joint = std::make_shared<const IncidenceMatrix>(
          concat_hyperedges(hg.user_item, hg.user_group));
      for (std::size_t l = 0; l < layers; ++l) stages.push_back({Kind::kHyperConv, joint});
      return stages;
    }
    case Variant::kJointSequential:
      for (std::size_t l = 0; l < layers; ++l) {
        stages.push_back({Kind::kHyperConv, borrow(hg.user_item)});
        stages.push_back({Kind::kHyperConvKeepIsolated, borrow(hg.user_group)});
      }
      return stages;
  }
  throw Error("variant_forward: unknown mode");
}

}  // namespace detail

/// Forward pass for any item-view construction. The group-view user pipeline
/// and the group pipeline are shared by all variants.
inline ForwardTrace variant_forward(Variant mode, const EmbeddingTable& emb, const Hypergraphs& hg,
                                    const Hyperparams& hp) {
  detail::check_consistent(emb, hg, hp);
  ForwardTrace tr;
  tr.gamma = hp.gamma;
  tr.beta = hp.beta;
  tr.score_view = hp.score_view;
  tr.item_view = run_pipeline(detail::item_view_stages(mode, hg, hp.layers), emb.item_view_user);
  tr.group_view = run_pipeline(repeat_stage(hg.user_group, hp.layers), emb.group_view_user);
  tr.user_item_view = tr.item_view.output();
  tr.user_group_view = tr.group_view.output();
  auto groups = propagate_groups(emb, hg.group, tr.user_item_view, hp.gamma, hp.layers);
  tr.group_layers = std::move(groups.layers);
  tr.group_inc = detail::borrow(hg.group);
  tr.group = std::move(groups.groups);
  tr.user = hp.score_view == ScoreView::kItem
                ? tr.user_item_view
                : combine_user_views(tr.user_item_view, tr.user_group_view, hp.beta);
  return tr;
}

/// Forward pass with the variant selected in `hp`.
inline ForwardTrace forward(const EmbeddingTable& emb, const Hypergraphs& hg,
                            const Hyperparams& hp) {
  return variant_forward(hp.variant, emb, hg, hp);
}

// ---------------------------------------------------------------------------
// Scores

/// y[g] = <user_row, E_g[g]> for every group.
inline void score_row(const DenseMatrix& users, const DenseMatrix& groups, std::size_t u,
                      std::span<double> out) {
  auto eu = users.row(u);
  for (std::size_t g = 0; g < groups.rows(); ++g) out[g] = dot(eu, groups.row(g));
}

inline DenseMatrix predict_scores(const DenseMatrix& users, const DenseMatrix& groups) {
  if (users.cols() != groups.cols()) {
    throw ShapeError("predict_scores: user dim " + std::to_string(users.cols()) +
                     " vs group dim " + std::to_string(groups.cols()));
  }
  DenseMatrix out(users.rows(), groups.rows());
  for (std::size_t u = 0; u < users.rows(); ++u) score_row(users, groups, u, out.row(u));
  return out;
}

// ---------------------------------------------------------------------------
// Reference convolutions

/// D^-1 H B^-1 H^T X written as explicit two-hop neighbour sums, independent
/// of the gather/scatter kernels.
inline DenseMatrix oracle_hypergraph_conv(const DenseMatrix& node_emb, const IncidenceMatrix& inc) {
  detail::require_rows(node_emb, inc.num_nodes(), "oracle_hypergraph_conv");
  DenseMatrix out(inc.num_nodes(), node_emb.cols());
  std::vector<double> edge_sum(node_emb.cols());
  for (std::size_t n = 0; n < inc.num_nodes(); ++n) {
    const auto edges = inc.hyperedges_of(n);
    if (edges.empty()) continue;
    for (Id e : edges) {
      std::fill(edge_sum.begin(), edge_sum.end(), 0.0);
      const auto members = inc.nodes_of(e);
      for (Id m : members)
        for (std::size_t c = 0; c < edge_sum.size(); ++c) edge_sum[c] += node_emb(m, c);
      for (std::size_t c = 0; c < edge_sum.size(); ++c)
        out(n, c) += edge_sum[c] / static_cast<double>(members.size());
    }
    for (std::size_t c = 0; c < edge_sum.size(); ++c) out(n, c) /= static_cast<double>(edges.size());
  }
  return out;
}

/// Two chained random-walk-normalized graph convolutions over the bipartite
/// user-group graph: users average their groups, then groups average their
/// users. `adjacency` has groups as nodes and users as hyperedges (A).
inline DenseMatrix oracle_lightgcn_two_layer(const DenseMatrix& group_emb,
                                             const IncidenceMatrix& adjacency) {
  detail::require_rows(group_emb, adjacency.num_nodes(), "oracle_lightgcn_two_layer");
  const std::size_t d = group_emb.cols();
  // Layer 1: E_u = D_u^-1 A^T E_g, walking bipartite edges user by user.
  DenseMatrix users(adjacency.num_hyperedges(), d);
  for (std::size_t u = 0; u < adjacency.num_hyperedges(); ++u) {
    const auto groups = adjacency.nodes_of(u);
    for (Id g : groups)
      for (std::size_t c = 0; c < d; ++c) users(u, c) += group_emb(g, c);
    if (!groups.empty())
      for (std::size_t c = 0; c < d; ++c) users(u, c) /= static_cast<double>(groups.size());
  }
  // Layer 2: E_g' = D_g^-1 A E_u.
  DenseMatrix out(adjacency.num_nodes(), d);
  for (std::size_t g = 0; g < adjacency.num_nodes(); ++g) {
    const auto members = adjacency.hyperedges_of(g);
    for (Id u : members)
      for (std::size_t c = 0; c < d; ++c) out(g, c) += users(u, c);
    if (!members.empty())
      for (std::size_t c = 0; c < d; ++c) out(g, c) /= static_cast<double>(members.size());
  }
  return out;
}

/// The same two layers with symmetric D^-1/2 A D^-1/2 normalization. This
/// route matches the random-walk route only when every group in a connected
/// component has the same degree; it is reported, not asserted.
inline DenseMatrix symmetric_lightgcn_two_layer(const DenseMatrix& group_emb,
                                                const IncidenceMatrix& adjacency) {
  detail::require_rows(group_emb, adjacency.num_nodes(), "symmetric_lightgcn_two_layer");
  const DenseMatrix users = detail::symmetric_scatter(adjacency.transposed(), group_emb);
  return detail::symmetric_scatter(adjacency, users);
}

}  // namespace grouprec
