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
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grouprec/dense_matrix.hpp"
#include "grouprec/interaction_graph.hpp"
#include "grouprec/model.hpp"
#include "grouprec/objectives.hpp"

namespace grouprec {

/// Per-user ranked candidates (train positives excluded) and held-out positives.
struct RankingResult {
  std::vector<std::vector<Id>> ranked;     // descending score, ascending id on ties
  std::vector<std::vector<Id>> positives;  // sorted
};

struct MetricsReport {
  std::vector<std::size_t> k_list;
  std::vector<double> recall;  // parallel to k_list
  std::vector<double> ndcg;
  std::size_t evaluated_users = 0;

  double recall_at(std::size_t k) const { return value_at(recall, k); }
  double ndcg_at(std::size_t k) const { return value_at(ndcg, k); }

  bool operator==(const MetricsReport&) const = default;

 private:
  double value_at(const std::vector<double>& v, std::size_t k) const {
    for (std::size_t i = 0; i < k_list.size(); ++i)
      if (k_list[i] == k) return v[i];
    throw Error("metrics report has no cutoff " + std::to_string(k));
  }
};

namespace detail {

/// Ranks the candidates of one user. When `limit` is set only that many
/// leading entries are ordered and returned.
inline std::vector<Id> rank_user(std::span<const double> scores, std::span<const Id> excluded,
                                 std::optional<std::size_t> limit) {
  std::vector<Id> cand;
  cand.reserve(scores.size());
  std::size_t x = 0;
  for (Id g = 0; g < scores.size(); ++g) {
    while (x < excluded.size() && excluded[x] < g) ++x;
    if (x < excluded.size() && excluded[x] == g) continue;
    cand.push_back(g);
  }
  auto better = [&](Id a, Id b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; };
  if (limit && *limit < cand.size()) {
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(*limit), cand.end(),
                      better);
    cand.resize(*limit);
  } else {
    std::sort(cand.begin(), cand.end(), better);
  }
  return cand;
}

inline double user_recall(std::span<const Id> ranked, std::span<const Id> positives,
                          std::size_t k) {
  std::size_t hits = 0;
  const std::size_t top = std::min(k, ranked.size());
  for (std::size_t p = 0; p < top; ++p)
    if (std::binary_search(positives.begin(), positives.end(), ranked[p])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(positives.size());
}

inline double user_ndcg(std::span<const Id> ranked, std::span<const Id> positives, std::size_t k) {
  double dcg = 0.0, idcg = 0.0;
  const std::size_t top = std::min(k, ranked.size());
  for (std::size_t p = 0; p < top; ++p)
    if (std::binary_search(positives.begin(), positives.end(), ranked[p]))
      dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  const std::size_t ideal = std::min(k, positives.size());
  for (std::size_t p = 0; p < ideal; ++p) idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  return idcg == 0.0 ? 0.0 : dcg / idcg;
}

template <class PerUser>
double average_over_evaluated(const RankingResult& r, PerUser per_user) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t u = 0; u < r.positives.size(); ++u) {
    if (r.positives[u].empty()) continue;
    sum += per_user(r.ranked[u], r.positives[u]);
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace detail

/// Full ranking of every user's candidate groups.
inline RankingResult rank_groups(const DenseMatrix& users, const DenseMatrix& groups,
                                 const std::vector<std::vector<Id>>& train_positives,
                                 const std::vector<std::vector<Id>>& test_positives) {
  if (users.cols() != groups.cols()) throw ShapeError("rank_groups: dimension mismatch");
  if (train_positives.size() != users.rows() || test_positives.size() != users.rows()) {
    throw ShapeError("rank_groups: per-user lists must have one entry per user");
  }
  RankingResult r;
  r.ranked.resize(users.rows());
  r.positives = test_positives;
  std::vector<double> scores(groups.rows());
  for (std::size_t u = 0; u < users.rows(); ++u) {
    score_row(users, groups, u, scores);
    r.ranked[u] = detail::rank_user(scores, train_positives[u], std::nullopt);
  }
  return r;
}

inline double recall_at_k(const RankingResult& r, std::size_t k) {
  if (k == 0) throw Error("recall_at_k: K must be >= 1");
  return detail::average_over_evaluated(
      r, [k](const auto& ranked, const auto& pos) { return detail::user_recall(ranked, pos, k); });
}

inline double ndcg_at_k(const RankingResult& r, std::size_t k) {
  if (k == 0) throw Error("ndcg_at_k: K must be >= 1");
  return detail::average_over_evaluated(
      r, [k](const auto& ranked, const auto& pos) { return detail::user_ndcg(ranked, pos, k); });
}

inline std::size_t evaluated_user_count(const std::vector<std::vector<Id>>& positives) {
  return static_cast<std::size_t>(std::count_if(positives.begin(), positives.end(),
                                                [](const auto& p) { return !p.empty(); }));
}

inline MetricsReport metrics_from_ranking(const RankingResult& r, std::vector<std::size_t> k_list) {
  MetricsReport m;
  m.k_list = std::move(k_list);
  for (std::size_t k : m.k_list) {
    m.recall.push_back(recall_at_k(r, k));
    m.ndcg.push_back(ndcg_at_k(r, k));
  }
  m.evaluated_users = evaluated_user_count(r.positives);
  return m;
}

/// Same metrics as metrics_from_ranking, but only partially sorts each
/// evaluated user's top max(k_list) candidates.
inline MetricsReport evaluate_topk(const DenseMatrix& users, const DenseMatrix& groups,
                                   const std::vector<std::vector<Id>>& train_positives,
                                   const std::vector<std::vector<Id>>& test_positives,
                                   std::vector<std::size_t> k_list) {
  if (k_list.empty()) throw Error("evaluate_topk: empty k_list");
  if (users.cols() != groups.cols()) throw ShapeError("evaluate_topk: dimension mismatch");
  if (train_positives.size() != users.rows() || test_positives.size() != users.rows()) {
    throw ShapeError("evaluate_topk: per-user lists must have one entry per user");
  }
  const std::size_t kmax = *std::max_element(k_list.begin(), k_list.end());
  MetricsReport m;
  m.k_list = std::move(k_list);
  m.recall.assign(m.k_list.size(), 0.0);
  m.ndcg.assign(m.k_list.size(), 0.0);
  std::vector<double> scores(groups.rows());
  for (std::size_t u = 0; u < users.rows(); ++u) {
    if (test_positives[u].empty()) continue;
    score_row(users, groups, u, scores);
    const auto top = detail::rank_user(scores, train_positives[u], kmax);
    for (std::size_t i = 0; i < m.k_list.size(); ++i) {
      m.recall[i] += detail::user_recall(top, test_positives[u], m.k_list[i]);
      m.ndcg[i] += detail::user_ndcg(top, test_positives[u], m.k_list[i]);
    }
    ++m.evaluated_users;
  }
  if (m.evaluated_users > 0) {
    const double n = static_cast<double>(m.evaluated_users);
    for (double& v : m.recall) v /= n;
    for (double& v : m.ndcg) v /= n;
  }
  return m;
}

/// Expected Recall@K of a uniformly random ranking: min(K, c_u) / c_u per
/// evaluated user with c_u candidates, averaged.
inline double random_recall_baseline(std::size_t num_groups,
                                     const std::vector<std::vector<Id>>& train_positives,
                                     const std::vector<std::vector<Id>>& test_positives,
                                     std::size_t k) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t u = 0; u < test_positives.size(); ++u) {
    if (test_positives[u].empty()) continue;
    const double c = static_cast<double>(num_groups - train_positives[u].size());
    sum += std::min(static_cast<double>(k), c) / c;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Cross-view consistency

struct ConsistencyResult {
  double numerator = 0.0;    // mean same-user cross-view similarity
  double denominator = 0.0;  // mean item-view similarity over ordered user pairs
  std::optional<double> value;  // empty when |denominator| < 1e-9
};

inline ConsistencyResult consistency(const DenseMatrix& item_view, const DenseMatrix& group_view) {
  item_view.require_same_shape(group_view, "consistency");
  const std::size_t n = item_view.rows();
  if (n == 0) throw Error("consistency: no users");
  ConsistencyResult r;
  long double same = 0.0L;
  for (std::size_t u = 0; u < n; ++u) same += cosine_sim(item_view.row(u), group_view.row(u));
  r.numerator = static_cast<double>(same / static_cast<long double>(n));
  // mean over (u, v) of <a_u, a_v> with unit rows equals ||sum of unit rows||^2 / n^2.
  std::vector<long double> total(item_view.cols(), 0.0L);
  for (std::size_t u = 0; u < n; ++u) {
    const double len = norm(item_view.row(u));
    if (len < kZeroNorm) continue;
    auto row = item_view.row(u);
    for (std::size_t c = 0; c < total.size(); ++c) total[c] += row[c] / len;
  }
  long double sq = 0.0L;
  for (long double t : total) sq += t * t;
  r.denominator = static_cast<double>(sq / (static_cast<long double>(n) * n));
  if (std::abs(r.denominator) >= 1e-9) r.value = r.numerator / r.denominator;
  return r;
}

// ---------------------------------------------------------------------------
// Group relatedness vs. common-user ratio

/// |a intersect b| / |a union b| of two sorted id lists; 0 when both are empty.
inline double common_user_ratio(std::span<const Id> a, std::span<const Id> b) {
  std::size_t i = 0, j = 0, common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (b[j] < a[i]) ++j;
    else { ++common; ++i; ++j; }
  }
  const std::size_t uni = a.size() + b.size() - common;
  return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

struct RelatednessPoint {
  double relatedness = 0.0;
  double common_ratio = 0.0;
  std::size_t pairs = 0;
};

struct RelatednessAnalysis {
  std::vector<RelatednessPoint> bins;
  double pearson = 0.0;
  std::size_t total_pairs = 0;
  std::optional<std::string> warning;
};

inline double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Every unordered pair of groups with nonempty member sets gets a cosine
/// relatedness and a common-user ratio. Pairs are sorted by relatedness and
/// cut into `num_bins` contiguous bins (the last absorbs the remainder); the
/// Pearson coefficient is taken over the bin means.
inline RelatednessAnalysis group_relatedness_analysis(const DenseMatrix& groups,
                                                      const std::vector<std::vector<Id>>& members,
                                                      std::size_t num_bins) {
  if (members.size() != groups.rows()) throw ShapeError("group_relatedness_analysis: member lists");
  if (num_bins == 0) throw Error("group_relatedness_analysis: need at least one bin");
  std::vector<std::size_t> active;
  for (std::size_t g = 0; g < members.size(); ++g)
    if (!members[g].empty()) active.push_back(g);
  if (active.size() < 2) throw Error("group_relatedness_analysis: need two groups with members");

  struct Pair {
    double rel;
    double ratio;
  };
  std::vector<Pair> pairs;
  pairs.reserve(active.size() * (active.size() - 1) / 2);
  for (std::size_t i = 0; i < active.size(); ++i)
    for (std::size_t j = i + 1; j < active.size(); ++j) {
      const std::size_t a = active[i], b = active[j];
      pairs.push_back({cosine_sim(groups.row(a), groups.row(b)),
                       common_user_ratio(members[a], members[b])});
    }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& x, const Pair& y) { return x.rel < y.rel; });

  RelatednessAnalysis out;
  out.total_pairs = pairs.size();
  std::size_t bins = num_bins;
  if (pairs.size() < bins) {
    out.warning = "only " + std::to_string(pairs.size()) + " pairs; using that many bins instead of " +
                  std::to_string(num_bins);
    bins = pairs.size();
  }
  const std::size_t width = pairs.size() / bins;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t lo = b * width;
    const std::size_t hi = b + 1 == bins ? pairs.size() : lo + width;
    RelatednessPoint p;
    p.pairs = hi - lo;
    for (std::size_t i = lo; i < hi; ++i) {
      p.relatedness += pairs[i].rel;
      p.common_ratio += pairs[i].ratio;
    }
    p.relatedness /= static_cast<double>(p.pairs);
    p.common_ratio /= static_cast<double>(p.pairs);
    out.bins.push_back(p);
  }
  std::vector<double> xs, ys;
  for (const auto& p : out.bins) {
    xs.push_back(p.relatedness);
    ys.push_back(p.common_ratio);
  }
  out.pearson = pearson(xs, ys);
  return out;
}

}  // namespace grouprec
