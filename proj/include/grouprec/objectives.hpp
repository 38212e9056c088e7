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

// Loss terms, their exact gradients, and a central-difference checker.
//
// All losses are sums over their index set. Scalar accumulations run in
// long double so finite differences of the total stay well above rounding.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "grouprec/dense_matrix.hpp"
#include "grouprec/incidence.hpp"
#include "grouprec/model.hpp"

namespace grouprec {

struct TrainTriple {
  Id user = 0;
  Id pos_group = 0;
  Id neg_group = 0;
  auto operator<=>(const TrainTriple&) const = default;
};

struct LossBreakdown {
  double bpr = 0.0;
  double cssl = 0.0;
  double group_reg = 0.0;
  double l2 = 0.0;
  double total = 0.0;
};

inline constexpr double kZeroNorm = 1e-12;

/// Cosine similarity; 0 when either vector has norm below 1e-12.
inline double cosine_sim(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a), nb = norm(b);
  if (na < kZeroNorm || nb < kZeroNorm) return 0.0;
  return dot(a, b) / (na * nb);
}

/// log(1 + e^x) without overflow.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct ScorePair {
  double pos = 0.0;
  double neg = 0.0;
};

/// sum of -log sigmoid(pos - neg) = softplus(neg - pos).
inline double bpr_loss(std::span<const ScorePair> pairs) {
  if (pairs.empty()) throw Error("bpr_loss: empty triple set");
  long double s = 0.0L;
  for (const ScorePair& p : pairs) s += softplus(p.neg - p.pos);
  return static_cast<double>(s);
}

namespace detail {

/// Unit rows (zero rows stay zero) and the original norms.
struct NormalizedRows {
  DenseMatrix unit;
  std::vector<double> norms;
};

inline NormalizedRows normalize_rows(const DenseMatrix& m) {
  NormalizedRows out{DenseMatrix(m.rows(), m.cols()), std::vector<double>(m.rows())};
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double n = norm(m.row(r));
    out.norms[r] = n;
    if (n < kZeroNorm) continue;
    auto src = m.row(r);
    auto dst = out.unit.row(r);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] = src[c] / n;
  }
  return out;
}

/// Pulls a gradient on unit rows back through x / ||x||.
inline void unit_row_adjoint(const NormalizedRows& nr, const DenseMatrix& grad_unit,
                             DenseMatrix& grad_out) {
  for (std::size_t r = 0; r < grad_unit.rows(); ++r) {
    if (nr.norms[r] < kZeroNorm) continue;
    auto u = nr.unit.row(r);
    auto g = grad_unit.row(r);
    const double radial = dot(g, u);
    auto dst = grad_out.row(r);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += (g[c] - radial * u[c]) / nr.norms[r];
  }
}

/// Stable log-sum-exp of `logits`; fills `probs` with the softmax.
inline double log_sum_exp(std::span<const double> logits, std::span<double> probs) {
  const double m = *std::max_element(logits.begin(), logits.end());
  long double s = 0.0L;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - m);
    s += probs[i];
  }
  for (double& p : probs) p = static_cast<double>(p / s);
  return m + static_cast<double>(std::log(s));
}

}  // namespace detail

/// Cross-view InfoNCE over users. Row u of `item_view` is the anchor, row u
/// of `group_view` the positive, every row of `group_view` a candidate.
/// Accumulates gradients into the optional outputs (already shaped).
inline double cssl_loss_and_grad(const DenseMatrix& item_view, const DenseMatrix& group_view,
                                 double tau, DenseMatrix* grad_item, DenseMatrix* grad_group) {
  item_view.require_same_shape(group_view, "cssl_loss");
  if (!(tau > 0.0)) throw Error("cssl_loss: temperature must be > 0");
  const std::size_t n = item_view.rows();
  const bool want_grad = grad_item != nullptr || grad_group != nullptr;
  const auto a = detail::normalize_rows(item_view);
  const auto b = detail::normalize_rows(group_view);
  DenseMatrix ga_unit(n, item_view.cols()), gb_unit(n, item_view.cols());
  std::vector<double> logits(n), probs(n);
  long double loss = 0.0L;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) logits[v] = dot(a.unit.row(u), b.unit.row(v)) / tau;
    loss += detail::log_sum_exp(logits, probs) - logits[u];
    if (!want_grad) continue;
    auto gau = ga_unit.row(u);
    for (std::size_t v = 0; v < n; ++v) {
      const double w = (probs[v] - (u == v ? 1.0 : 0.0)) / tau;
      if (w == 0.0) continue;
      auto bv = b.unit.row(v);
      auto au = a.unit.row(u);
      auto gbv = gb_unit.row(v);
      for (std::size_t c = 0; c < gau.size(); ++c) {
        gau[c] += w * bv[c];
        gbv[c] += w * au[c];
      }
    }
  }
  if (grad_item != nullptr) detail::unit_row_adjoint(a, ga_unit, *grad_item);
  if (grad_group != nullptr) detail::unit_row_adjoint(b, gb_unit, *grad_group);
  return static_cast<double>(loss);
}

inline double cssl_loss(const DenseMatrix& item_view, const DenseMatrix& group_view, double tau_u) {
  return cssl_loss_and_grad(item_view, group_view, tau_u, nullptr, nullptr);
}

/// Uniformity penalty on group embeddings: the numerator is the fixed
/// exp(1/tau), the denominator runs over every group including g itself.
inline double group_reg_loss_and_grad(const DenseMatrix& groups, double tau, DenseMatrix* grad) {
  if (!(tau > 0.0)) throw Error("group_reg_loss: temperature must be > 0");
  const std::size_t n = groups.rows();
  const auto e = detail::normalize_rows(groups);
  DenseMatrix g_unit(n, groups.cols());
  std::vector<double> logits(n), probs(n);
  long double loss = 0.0L;
  for (std::size_t g = 0; g < n; ++g) {
    for (std::size_t k = 0; k < n; ++k) logits[k] = dot(e.unit.row(g), e.unit.row(k)) / tau;
    // cos(x, x) is exactly 1 for any nonzero row.
    if (e.norms[g] >= kZeroNorm) logits[g] = 1.0 / tau;
    loss += detail::log_sum_exp(logits, probs) - 1.0 / tau;
    if (grad == nullptr) continue;
    // d/ds_gk = p_gk / tau; s_gk depends on both unit rows g and k.
    auto gg = g_unit.row(g);
    auto eg = e.unit.row(g);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == g) continue;
      const double w = probs[k] / tau;
      auto ek = e.unit.row(k);
      auto gk = g_unit.row(k);
      for (std::size_t c = 0; c < gg.size(); ++c) {
        gg[c] += w * ek[c];
        gk[c] += w * eg[c];
      }
    }
  }
  if (grad != nullptr) detail::unit_row_adjoint(e, g_unit, *grad);
  return static_cast<double>(loss);
}

inline double group_reg_loss(const DenseMatrix& groups, double tau_g) {
  return group_reg_loss_and_grad(groups, tau_g, nullptr);
}

/// Sum of squares over all three embedding blocks.
inline double l2_penalty(const EmbeddingTable& emb) {
  long double s = 0.0L;
  for (const DenseMatrix* b : emb.blocks())
    for (double v : b->values()) s += static_cast<long double>(v) * v;
  return static_cast<double>(s);
}

namespace detail {

inline void check_triples(std::span<const TrainTriple> triples, std::size_t users,
                          std::size_t groups) {
  for (const TrainTriple& t : triples) {
    if (t.user >= users || t.pos_group >= groups || t.neg_group >= groups) {
      throw Error("triple (" + std::to_string(t.user) + ", " + std::to_string(t.pos_group) +
                  ", " + std::to_string(t.neg_group) + ") out of range");
    }
  }
}

inline double bpr_from_trace(const ForwardTrace& trace, std::span<const TrainTriple> triples) {
  long double s = 0.0L;
  for (const TrainTriple& t : triples) {
    auto eu = trace.user.row(t.user);
    const double margin = dot(eu, trace.group.row(t.pos_group)) - dot(eu, trace.group.row(t.neg_group));
    s += softplus(-margin);
  }
  return static_cast<double>(s);
}

}  // namespace detail

/// bpr + lambda * (cssl + group_reg) + lambda_reg * l2.
inline double joint_objective(double bpr, double cssl, double group_reg, double l2,
                              const Hyperparams& hp) {
  const long double total = static_cast<long double>(bpr) +
                            static_cast<long double>(hp.lambda_ssl) *
                                (static_cast<long double>(cssl) + group_reg) +
                            static_cast<long double>(hp.lambda_reg) * l2;
  return static_cast<double>(total);
}

/// Evaluates every term of the joint objective. A disabled self-supervised
/// term is reported as 0; an empty triple set contributes 0.
inline LossBreakdown total_loss(const ForwardTrace& trace, std::span<const TrainTriple> triples,
                                const EmbeddingTable& emb, const Hyperparams& hp) {
  if (!trace.complete()) throw Error("total_loss: incomplete forward trace");
  detail::check_triples(triples, trace.user.rows(), trace.group.rows());
  LossBreakdown b;
  b.bpr = detail::bpr_from_trace(trace, triples);
  if (hp.use_cssl) b.cssl = cssl_loss(trace.user_item_view, trace.user_group_view, hp.tau_u);
  if (hp.use_group_reg) b.group_reg = group_reg_loss(trace.group, hp.tau_g);
  b.l2 = l2_penalty(emb);
  b.total = joint_objective(b.bpr, b.cssl, b.group_reg, b.l2, hp);
  return b;
}

/// Exact gradient of total_loss with respect to every embedding entry.
inline EmbeddingTable backward(const ForwardTrace& trace, std::span<const TrainTriple> triples,
                               const EmbeddingTable& emb, const Hyperparams& hp) {
  if (!trace.complete()) throw Error("backward: forward trace is missing intermediates");
  detail::check_triples(triples, trace.user.rows(), trace.group.rows());
  const std::size_t users = trace.user.rows(), d = trace.user.cols();

  DenseMatrix g_user(users, d);
  DenseMatrix g_group(trace.group.rows(), d);
  DenseMatrix g_item_view(users, d);
  DenseMatrix g_group_view(users, d);

  // BPR: d softplus(-m)/dm = -sigmoid(-m).
  for (const TrainTriple& t : triples) {
    auto eu = trace.user.row(t.user);
    auto ep = trace.group.row(t.pos_group);
    auto en = trace.group.row(t.neg_group);
    const double coef = -sigmoid(-(dot(eu, ep) - dot(eu, en)));
    auto gu = g_user.row(t.user);
    auto gp = g_group.row(t.pos_group);
    auto gn = g_group.row(t.neg_group);
    for (std::size_t c = 0; c < d; ++c) {
      gu[c] += coef * (ep[c] - en[c]);
      gp[c] += coef * eu[c];
      gn[c] -= coef * eu[c];
    }
  }

  if (hp.lambda_ssl != 0.0) {
    if (hp.use_cssl) {
      DenseMatrix ga(users, d), gb(users, d);
      cssl_loss_and_grad(trace.user_item_view, trace.user_group_view, hp.tau_u, &ga, &gb);
      g_item_view.add_scaled(ga, hp.lambda_ssl);
      g_group_view.add_scaled(gb, hp.lambda_ssl);
    }
    if (hp.use_group_reg) {
      DenseMatrix gg(trace.group.rows(), d);
      group_reg_loss_and_grad(trace.group, hp.tau_g, &gg);
      g_group.add_scaled(gg, hp.lambda_ssl);
    }
  }

  if (trace.score_view == ScoreView::kItem) {
    g_item_view += g_user;
  } else {
    g_item_view.add_scaled(g_user, trace.beta);
    g_group_view.add_scaled(g_user, 1.0 - trace.beta);
  }

  // Group pipeline: Z' = S_H(G_H(Z) + gamma * C) with C the item view.
  const IncidenceMatrix& h = *trace.group_inc;
  DenseMatrix g_z = std::move(g_group);
  for (std::size_t l = trace.group_layers.size(); l-- > 0;) {
    DenseMatrix g_fused = node_scatter_adjoint(h, g_z);
    g_item_view.add_scaled(g_fused, trace.gamma);
    g_z = hyperedge_gather_adjoint(h, g_fused);
  }

  EmbeddingTable grad{pipeline_adjoint(trace.item_view, std::move(g_item_view)),
                      pipeline_adjoint(trace.group_view, std::move(g_group_view)), std::move(g_z)};
  if (!grad.item_view_user.same_shape(emb.item_view_user) || !grad.group.same_shape(emb.group)) {
    throw ShapeError("backward: trace does not match the embedding table");
  }
  if (hp.lambda_reg != 0.0) {
    auto gb = grad.blocks();
    auto eb = emb.blocks();
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i]->add_scaled(*eb[i], 2.0 * hp.lambda_reg);
  }
  return grad;
}

/// Result of comparing analytic and central-difference gradients.
struct GradCheckReport {
  std::size_t coordinates = 0;
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t worst_index = 0;
  bool passed = false;
};

/// Relative error with a max(|a|, |b|, 1e-8) denominator.
inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

/// Perturbs every coordinate of `emb` by +-h and compares
/// (L(x+h) - L(x-h)) / 2h against `backward`. Triples are held fixed.
inline GradCheckReport finite_diff_check(const EmbeddingTable& emb, const Hypergraphs& hg,
                                         std::span<const TrainTriple> triples,
                                         const Hyperparams& hp, double h, double tolerance) {
  auto loss_at = [&](const EmbeddingTable& e) {
    return total_loss(forward(e, hg, hp), triples, e, hp).total;
  };
  EmbeddingTable analytic = backward(forward(emb, hg, hp), triples, emb, hp);
  EmbeddingTable probe = emb;
  GradCheckReport r;
  r.coordinates = emb.parameter_count();
  double sum = 0.0;
  for (std::size_t i = 0; i < r.coordinates; ++i) {
    const double x = probe.at(i);
    probe.at(i) = x + h;
    const double up = loss_at(probe);
    probe.at(i) = x - h;
    const double down = loss_at(probe);
    probe.at(i) = x;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic.at(i);
    const double rel = relative_error(a, numeric);
    sum += rel;
    r.max_abs_error = std::max(r.max_abs_error, std::abs(a - numeric));
    if (rel > r.max_rel_error || i == 0) {
      r.max_rel_error = rel;
      r.worst_index = i;
    }
  }
  r.mean_rel_error = r.coordinates == 0 ? 0.0 : sum / static_cast<double>(r.coordinates);
  r.passed = r.max_rel_error < tolerance;
  return r;
}

}  // namespace grouprec
