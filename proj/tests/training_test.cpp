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

#include <cmath>
#include <map>

#include "test_support.hpp"

namespace grouprec {
namespace {

using testing::random_graph;

SplitGraph small_split(std::uint64_t seed = 3) {
  SyntheticSpec spec;
  spec.num_clusters = 3;
  spec.users_per_cluster = 20;
  spec.groups_per_cluster = 8;
  spec.items_per_cluster = 10;
  spec.in_cluster_prob = 0.4;
  spec.noise_prob = 0.02;
  spec.seed = seed;
  return split_train_test(generate_synthetic(spec), 0.3, 0.2, seed);
}

Hyperparams small_hp() {
  Hyperparams hp;
  hp.dim = 8;
  hp.patience = 3;
  return hp;
}

TEST(Negatives, ForcedChoice) {
  const InteractionGraph g(1, 2, 1, {{0, 0}}, {{0, 0}});
  for (std::uint64_t epoch = 0; epoch < 50; ++epoch)
    EXPECT_EQ(sample_negatives(g, 1, epoch).front().neg_group, 1u);
}

TEST(Negatives, OnePerPositiveAndNeverPositive) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = random_graph(20, 9, 5, 0.3, seed);
    const auto triples = sample_negatives(g, seed, 4);
    ASSERT_EQ(triples.size(), g.user_group_edges().size());
    const auto pos = g.groups_by_user();
    for (std::size_t i = 0; i < triples.size(); ++i) {
      EXPECT_EQ(triples[i].user, g.user_group_edges()[i].first);
      EXPECT_EQ(triples[i].pos_group, g.user_group_edges()[i].second);
      EXPECT_FALSE(std::binary_search(pos[triples[i].user].begin(), pos[triples[i].user].end(),
                                      triples[i].neg_group));
    }
  }
}

TEST(Negatives, DeterministicPerEpochAndResampled) {
  const auto g = random_graph(30, 12, 5, 0.3, 2);
  EXPECT_EQ(sample_negatives(g, 5, 1), sample_negatives(g, 5, 1));
  EXPECT_NE(sample_negatives(g, 5, 1), sample_negatives(g, 5, 2));
}

TEST(Negatives, UniformOverComplement) {
  // One user in groups {1, 4}: negatives are uniform over the other 6 of 8.
  const InteractionGraph g(1, 8, 1, {{0, 1}, {0, 4}}, {{0, 0}});
  std::map<Id, std::size_t> counts;
  std::size_t total = 0;
  for (std::uint64_t epoch = 0; total < 100000; ++epoch)
    for (const auto& t : sample_negatives(g, 9, epoch)) {
      ++counts[t.neg_group];
      ++total;
    }
  ASSERT_EQ(counts.size(), 6u);
  EXPECT_EQ(counts.count(1), 0u);
  EXPECT_EQ(counts.count(4), 0u);
  const double p = 1.0 / 6.0;
  const double mean = total * p, sigma = std::sqrt(total * p * (1 - p));
  double chi2 = 0;
  for (const auto& [group, n] : counts) {
    EXPECT_LT(std::abs(static_cast<double>(n) - mean), 3 * sigma) << "group " << group;
    chi2 += (n - mean) * (n - mean) / mean;
  }
  EXPECT_LT(chi2, 20.52);  // chi-square, 5 dof, p = 0.001
}

TEST(Negatives, FullMembershipIsAnError) {
  const InteractionGraph g(1, 2, 1, {{0, 0}, {0, 1}}, {{0, 0}});
  EXPECT_THROW(sample_negatives(g, 1, 1), Error);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  auto emb = EmbeddingTable::random(3, 2, 2, 1.0, 1);
  const auto before = emb;
  auto state = AdamState::for_table(emb);
  adam_step(emb, emb.zeros_like(), state, 0.1);
  EXPECT_EQ(emb, before);
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  auto emb = EmbeddingTable::random(3, 2, 2, 1.0, 1);
  auto before = emb;
  auto grad = EmbeddingTable::random(3, 2, 2, 5.0, 2);
  auto state = AdamState::for_table(emb);
  adam_step(emb, grad, state, 0.05);
  for (std::size_t i = 0; i < emb.parameter_count(); ++i) {
    const double g = grad.at(i);
    const double delta = emb.at(i) - before.at(i);
    EXPECT_NEAR(delta, -0.05 * (g > 0 ? 1 : -1), 1e-7);
  }
}

TEST(Adam, TwoStepsOnOneParameterQuadratic) {
  // f(x) = x^2, x0 = 1, lr = 0.1; hand-applied Adam recurrence.
  auto emb = EmbeddingTable::zeros(0, 1, 1);
  emb.group(0, 0) = 1.0;
  auto state = AdamState::for_table(emb);
  double x = 1.0, m = 0, v = 0;
  for (int t = 1; t <= 2; ++t) {
    auto grad = emb.zeros_like();
    grad.group(0, 0) = 2 * emb.group(0, 0);
    adam_step(emb, grad, state, 0.1);
    const double g = 2 * x;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
    x -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    EXPECT_NEAR(emb.group(0, 0), x, 1e-15);
  }
}

TEST(Adam, NonFiniteGradientNamesBlockAndIndex) {
  auto emb = EmbeddingTable::random(2, 2, 2, 1.0, 1);
  auto grad = emb.zeros_like();
  grad.group_view_user(1, 0) = std::numeric_limits<double>::infinity();
  auto state = AdamState::for_table(emb);
  try {
    adam_step(emb, grad, state, 0.1);
    FAIL();
  } catch (const Error& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("group_view_user"), std::string::npos);
    EXPECT_NE(what.find("index 2"), std::string::npos);
  }
  EXPECT_EQ(state.step, 0u);
  EXPECT_THROW(adam_step(emb, EmbeddingTable::zeros(3, 2, 2), state, 0.1), ShapeError);
}

TEST(Train, ZeroLearningRateIsFlat) {
  auto hp = small_hp();
  hp.lr = 0.0;
  TrainOptions opts;
  opts.max_epochs = 6;
  opts.eval_every = 2;
  const auto split = small_split();
  const auto r = train(split, hp, opts);
  const auto init = EmbeddingTable::random(split.train.num_users(), split.train.num_groups(),
                                           hp.dim, hp.init_stddev, hp.seed);
  EXPECT_EQ(r.embeddings, init);
  // bpr varies with the resampled negatives; the sampling-free terms do not.
  for (const auto& e : r.history.epochs) {
    EXPECT_EQ(e.loss.cssl, r.history.epochs.front().loss.cssl);
    EXPECT_EQ(e.loss.l2, r.history.epochs.front().loss.l2);
  }
}

TEST(Train, StepsEqualEpochsAndBestIsRestored) {
  const auto split = small_split();
  auto hp = small_hp();
  TrainOptions opts;
  opts.max_epochs = 60;
  opts.eval_every = 2;
  const auto r = train(split, hp, opts);
  const auto& h = r.history;
  EXPECT_EQ(h.optimizer_steps, h.epochs.size());
  ASSERT_FALSE(h.evaluations.empty());
  double best = -1;
  for (const auto& e : h.evaluations) best = std::max(best, e.metric);
  EXPECT_EQ(h.best_metric, best);
  const auto tr = forward(r.embeddings, Hypergraphs::build(split.train), hp);
  const double metric = evaluate_topk(tr.user, tr.group, split.train.groups_by_user(),
                                      split.validation, {hp.k_list.back()})
                            .recall.front();
  EXPECT_EQ(metric, h.best_metric);
  EXPECT_TRUE(h.stop_reason == "early_stopping" || h.stop_reason == "max_epochs");
}

TEST(Train, Deterministic) {
  const auto split = small_split(5);
  TrainOptions opts;
  opts.max_epochs = 20;
  const auto a = train(split, small_hp(), opts);
  const auto b = train(split, small_hp(), opts);
  EXPECT_EQ(a.embeddings, b.embeddings);
  EXPECT_EQ(history_csv(a.history), history_csv(b.history));
}

TEST(Train, WithoutValidationRunsToMaxEpochs) {
  auto split = small_split();
  for (auto& v : split.validation) v.clear();
  TrainOptions opts;
  opts.max_epochs = 7;
  const auto r = train(split, small_hp(), opts);
  EXPECT_EQ(r.history.epochs.size(), 7u);
  EXPECT_EQ(r.history.stop_reason, "max_epochs_no_validation");
  EXPECT_EQ(r.history.best_epoch, 7u);
}

TEST(Train, LossFallsOnPlantedBenchmark) {
  const auto split = split_train_test(generate_synthetic(SyntheticSpec{}), 0.3, 0.0, 7);
  Hyperparams hp;
  hp.dim = 32;
  TrainOptions opts;
  opts.max_epochs = 100;
  const auto r = train(split, hp, opts);
  ASSERT_EQ(r.history.epochs.size(), 100u);
  EXPECT_LT(r.history.epochs.back().loss.total, r.history.epochs.front().loss.total);
}

TEST(Train, Guards) {
  TrainOptions opts;
  opts.eval_every = 0;
  EXPECT_THROW(train(small_split(), small_hp(), opts), Error);

  SplitGraph huge;
  huge.train = InteractionGraph(kMaxUsersForFullCssl + 1, 2, 1, {{0, 0}}, {{0, 0}});
  huge.validation.resize(kMaxUsersForFullCssl + 1);
  huge.test.resize(kMaxUsersForFullCssl + 1);
  try {
    train(huge, small_hp(), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("50000"), std::string::npos);
  }
}

TEST(Train, NonFiniteLossAborts) {
  auto hp = small_hp();
  hp.init_stddev = 1e200;
  try {
    train(small_split(), hp, {});
    FAIL();
  } catch (const TrainingAborted& e) {
    EXPECT_EQ(e.epoch(), 1u);
    EXPECT_FALSE(std::isfinite(e.loss().total));
  }
}

}  // namespace
}  // namespace grouprec
