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
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "grouprec/evaluation.hpp"
#include "grouprec/incidence.hpp"
#include "grouprec/interaction_graph.hpp"
#include "grouprec/model.hpp"
#include "grouprec/objectives.hpp"

namespace grouprec {

/// One triple per training (user, group) edge; the negative is uniform over
/// the groups the user has no training edge with. Deterministic in
/// (seed, epoch).
inline std::vector<TrainTriple> sample_negatives(const InteractionGraph& train, std::uint64_t seed,
                                                 std::uint64_t epoch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  const auto groups = train.groups_by_user();
  const std::size_t total = train.num_groups();
  std::vector<TrainTriple> out;
  out.reserve(train.user_group_edges().size());
  for (std::size_t u = 0; u < groups.size(); ++u) {
    const auto& pos = groups[u];
    if (pos.empty()) continue;
    if (pos.size() >= total) {
      throw Error("sample_negatives: user " + std::to_string(u) +
                  " belongs to every group; no negative exists");
    }
    std::uniform_int_distribution<std::size_t> pick(0, total - pos.size() - 1);
    for (Id g : pos) {
      // The r-th group (0-based) not in the sorted positive list.
      std::size_t neg = pick(rng);
      for (Id p : pos) {
        if (p <= neg) ++neg;
        else break;
      }
      out.push_back({static_cast<Id>(u), g, static_cast<Id>(neg)});
    }
  }
  return out;
}

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  EmbeddingTable first_moment;
  EmbeddingTable second_moment;
  std::uint64_t step = 0;

  static AdamState for_table(const EmbeddingTable& emb) {
    return {emb.zeros_like(), emb.zeros_like(), 0};
  }
};

/// Bias-corrected Adam update on all three blocks.
inline void adam_step(EmbeddingTable& emb, const EmbeddingTable& grads, AdamState& state,
                      double lr) {
  const auto pb = emb.blocks();
  const auto gb = grads.blocks();
  const auto mb = state.first_moment.blocks();
  const auto vb = state.second_moment.blocks();
  for (std::size_t b = 0; b < pb.size(); ++b) {
    if (!pb[b]->same_shape(*gb[b]) || !pb[b]->same_shape(*mb[b]) || !pb[b]->same_shape(*vb[b])) {
      throw ShapeError(std::string("adam_step: shape mismatch in block ") +
                       EmbeddingTable::kBlockNames[b]);
    }
    const auto g = gb[b]->values();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) {
        throw Error(std::string("adam_step: non-finite gradient in block ") +
                    EmbeddingTable::kBlockNames[b] + " at index " + std::to_string(i));
      }
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(AdamState::kBeta1, t);
  const double c2 = 1.0 - std::pow(AdamState::kBeta2, t);
  for (std::size_t b = 0; b < pb.size(); ++b) {
    auto p = pb[b]->values();
    const auto g = gb[b]->values();
    auto m = mb[b]->values();
    auto v = vb[b]->values();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = AdamState::kBeta1 * m[i] + (1.0 - AdamState::kBeta1) * g[i];
      v[i] = AdamState::kBeta2 * v[i] + (1.0 - AdamState::kBeta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + AdamState::kEpsilon);
    }
  }
}

struct EpochRecord {
  std::size_t epoch = 0;
  LossBreakdown loss;
};

struct EvalRecord {
  std::size_t epoch = 0;
  double metric = 0.0;  // validation Recall@(largest K)
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::vector<EvalRecord> evaluations;
  std::size_t best_epoch = 0;
  double best_metric = 0.0;
  std::size_t optimizer_steps = 0;
  std::string stop_reason;
};

struct TrainOptions {
  std::size_t eval_every = 5;
  std::size_t max_epochs = 200;
  bool allow_large_cssl = false;  // lift the |U| <= 50,000 guard
};

inline constexpr std::size_t kMaxUsersForFullCssl = 50000;

class TrainingAborted : public Error {
 public:
  TrainingAborted(std::size_t epoch, const LossBreakdown& loss)
      : Error("non-finite loss at epoch " + std::to_string(epoch) +
              ": bpr=" + std::to_string(loss.bpr) + " cssl=" + std::to_string(loss.cssl) +
              " group_reg=" + std::to_string(loss.group_reg) + " l2=" + std::to_string(loss.l2) +
              " total=" + std::to_string(loss.total)),
        epoch_(epoch),
        loss_(loss) {}
  std::size_t epoch() const { return epoch_; }
  const LossBreakdown& loss() const { return loss_; }

 private:
  std::size_t epoch_;
  LossBreakdown loss_;
};

struct TrainResult {
  EmbeddingTable embeddings;  // best-epoch parameters
  TrainHistory history;
};

/// Full-batch training: one Adam step per epoch over every triple and the
/// complete self-supervised terms. Validation Recall@(largest K) is checked
/// every `eval_every` epochs and the best parameters are restored at the end.
inline TrainResult train(const SplitGraph& split, const Hyperparams& hp,
                         const TrainOptions& opts = {}) {
  hp.validate();
  if (opts.eval_every == 0) throw Error("train: eval_every must be >= 1");
  const InteractionGraph& g = split.train;
  if (g.num_users() > kMaxUsersForFullCssl && hp.use_cssl && !opts.allow_large_cssl) {
    throw Error("train: " + std::to_string(g.num_users()) +
                " users exceeds the full-denominator cross-view loss limit of " +
                std::to_string(kMaxUsersForFullCssl) + "; pass the override to run anyway");
  }
  const Hypergraphs hg = Hypergraphs::build(g);
  const auto train_pos = g.groups_by_user();
  const bool have_validation = evaluated_user_count(split.validation) > 0;
  const std::size_t eval_k = hp.k_list.back();

  EmbeddingTable emb =
      EmbeddingTable::random(g.num_users(), g.num_groups(), hp.dim, hp.init_stddev, hp.seed);
  AdamState adam = AdamState::for_table(emb);
  TrainResult out{emb, {}};
  TrainHistory& hist = out.history;
  std::size_t stale = 0;

  for (std::size_t epoch = 1; epoch <= opts.max_epochs; ++epoch) {
    const auto triples = sample_negatives(g, hp.seed, epoch);
    const ForwardTrace trace = forward(emb, hg, hp);
    const LossBreakdown loss = total_loss(trace, triples, emb, hp);
    if (!std::isfinite(loss.total)) throw TrainingAborted(epoch, loss);
    hist.epochs.push_back({epoch, loss});
    adam_step(emb, backward(trace, triples, emb, hp), adam, hp.lr);
    ++hist.optimizer_steps;

    if (!have_validation || epoch % opts.eval_every != 0) continue;
    const ForwardTrace now = forward(emb, hg, hp);
    const double metric =
        evaluate_topk(now.user, now.group, train_pos, split.validation, {eval_k}).recall.front();
    hist.evaluations.push_back({epoch, metric});
    if (hist.evaluations.size() == 1 || metric > hist.best_metric) {
      hist.best_metric = metric;
      hist.best_epoch = epoch;
      out.embeddings = emb;
      stale = 0;
    } else if (++stale >= hp.patience) {
      hist.stop_reason = "early_stopping";
      break;
    }
  }
  if (hist.stop_reason.empty()) hist.stop_reason = "max_epochs";
  if (!have_validation || hist.evaluations.empty()) {
    hist.stop_reason = have_validation ? "max_epochs" : "max_epochs_no_validation";
    hist.best_epoch = hist.epochs.empty() ? 0 : hist.epochs.back().epoch;
    out.embeddings = emb;
  }
  return out;
}

}  // namespace grouprec
