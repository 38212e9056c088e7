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

// Mean-normalized products between an incidence matrix and dense row blocks.
// Zero-degree rows follow the 1/0 := 0 convention and come out all-zero.

#pragma once

#include <cstddef>
#include <string>

#include "grouprec/dense_matrix.hpp"
#include "grouprec/incidence.hpp"

namespace grouprec {

namespace detail {

inline void require_rows(const DenseMatrix& m, std::size_t rows, const char* what) {
  if (m.rows() != rows) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(rows) + " rows, got " +
                     m.shape_string());
  }
}

inline double inverse_or_zero(std::size_t degree) {
  return degree == 0 ? 0.0 : 1.0 / static_cast<double>(degree);
}

}  // namespace detail

/// B^-1 H^T X: each hyperedge row is the mean of its nodes' rows.
inline DenseMatrix hyperedge_gather(const IncidenceMatrix& inc, const DenseMatrix& node_emb) {
  detail::require_rows(node_emb, inc.num_nodes(), "hyperedge_gather");
  DenseMatrix out(inc.num_hyperedges(), node_emb.cols());
  for (std::size_t e = 0; e < inc.num_hyperedges(); ++e) {
    auto dst = out.row(e);
    for (Id n : inc.nodes_of(e)) {
      auto src = node_emb.row(n);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
    const double scale = detail::inverse_or_zero(inc.hyperedge_degree(e));
    for (double& v : dst) v *= scale;
  }
  return out;
}

/// D^-1 H Q: each node row is the mean of its hyperedges' rows.
inline DenseMatrix node_scatter(const IncidenceMatrix& inc, const DenseMatrix& edge_emb) {
  detail::require_rows(edge_emb, inc.num_hyperedges(), "node_scatter");
  DenseMatrix out(inc.num_nodes(), edge_emb.cols());
  for (std::size_t n = 0; n < inc.num_nodes(); ++n) {
    auto dst = out.row(n);
    for (Id e : inc.hyperedges_of(n)) {
      auto src = edge_emb.row(e);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
    const double scale = detail::inverse_or_zero(inc.node_degree(n));
    for (double& v : dst) v *= scale;
  }
  return out;
}

/// Adjoint of hyperedge_gather: H B^-1 G (hyperedge rows back to nodes).
inline DenseMatrix hyperedge_gather_adjoint(const IncidenceMatrix& inc, const DenseMatrix& grad) {
  detail::require_rows(grad, inc.num_hyperedges(), "hyperedge_gather_adjoint");
  DenseMatrix out(inc.num_nodes(), grad.cols());
  for (std::size_t n = 0; n < inc.num_nodes(); ++n) {
    auto dst = out.row(n);
    for (Id e : inc.hyperedges_of(n)) {
      const double scale = detail::inverse_or_zero(inc.hyperedge_degree(e));
      auto src = grad.row(e);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += scale * src[c];
    }
  }
  return out;
}

/// Adjoint of node_scatter: H^T D^-1 G (node rows back to hyperedges).
inline DenseMatrix node_scatter_adjoint(const IncidenceMatrix& inc, const DenseMatrix& grad) {
  detail::require_rows(grad, inc.num_nodes(), "node_scatter_adjoint");
  DenseMatrix out(inc.num_hyperedges(), grad.cols());
  for (std::size_t e = 0; e < inc.num_hyperedges(); ++e) {
    auto dst = out.row(e);
    for (Id n : inc.nodes_of(e)) {
      const double scale = detail::inverse_or_zero(inc.node_degree(n));
      auto src = grad.row(n);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += scale * src[c];
    }
  }
  return out;
}

enum class NormalizeSide {
  kHyperedgeMean,  // B^-1 H^T x
  kNodeMean,       // D^-1 H x
};

/// Explicit dense evaluation of the two normalized products. `h_dense` is the
/// node x hyperedge {0,1} matrix. Intended as a test oracle on small inputs.
inline DenseMatrix dense_reference_product(const DenseMatrix& h_dense, const DenseMatrix& x,
                                           NormalizeSide side) {
  const DenseMatrix h = side == NormalizeSide::kHyperedgeMean ? h_dense.transposed() : h_dense;
  if (h.cols() != x.rows()) {
    throw ShapeError("dense_reference_product: " + h.shape_string() + " times " +
                     x.shape_string());
  }
  DenseMatrix inv_degree(h.rows(), h.rows());
  for (std::size_t r = 0; r < h.rows(); ++r) {
    double degree = 0.0;
    for (std::size_t c = 0; c < h.cols(); ++c) degree += h(r, c);
    inv_degree(r, r) = degree == 0.0 ? 0.0 : 1.0 / degree;
  }
  return inv_degree.matmul(h).matmul(x);
}

}  // namespace grouprec
