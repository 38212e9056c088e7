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

// Run configuration and the command implementations behind the CLI. Every
// command writes its outputs under RunConfig::output_dir and echoes the
// effective configuration into its manifest.

#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "grouprec/equivalence.hpp"
#include "grouprec/evaluation.hpp"
#include "grouprec/gradcheck.hpp"
#include "grouprec/incidence.hpp"
#include "grouprec/interaction_graph.hpp"
#include "grouprec/model.hpp"
#include "grouprec/serialization.hpp"
#include "grouprec/training.hpp"

namespace grouprec {

struct RunConfig {
  // Exactly one data source.
  std::optional<std::string> ug_path;
  std::optional<std::string> ui_path;
  EntityCounts counts;
  std::optional<SyntheticSpec> synthetic;

  SplitParams split;
  std::optional<std::string> split_manifest;  // reuse a prepared split

  Hyperparams hp;
  bool disable_cssl = false;
  bool disable_group_reg = false;
  bool disable_thc = false;
  TrainOptions train;
  std::size_t analysis_bins = 100;

  std::string output_dir = "grouprec_out";

  void validate() const {
    const bool have_paths = ug_path.has_value() || ui_path.has_value();
    if (have_paths == synthetic.has_value()) {
      throw Error("config: set either ug_path/ui_path or synthetic, not both or neither");
    }
    if (have_paths && (!ug_path || !ui_path)) throw Error("config: both ug_path and ui_path are required");
    effective_hyperparams().validate();
  }

  /// Hyperparams with the ablation toggles applied (disable_thc means gamma = 0).
  Hyperparams effective_hyperparams() const {
    Hyperparams h = hp;
    if (disable_thc) h.gamma = 0.0;
    if (disable_cssl) h.use_cssl = false;
    if (disable_group_reg) h.use_group_reg = false;
    return h;
  }

  std::filesystem::path out(const std::string& name) const {
    return std::filesystem::path(output_dir) / name;
  }
};

inline json to_json(const RunConfig& c) {
  json j = to_json(c.hp);
  if (c.ug_path) j["ug_path"] = *c.ug_path;
  if (c.ui_path) j["ui_path"] = *c.ui_path;
  if (c.counts.users) j["num_users"] = *c.counts.users;
  if (c.counts.groups) j["num_groups"] = *c.counts.groups;
  if (c.counts.items) j["num_items"] = *c.counts.items;
  j["synthetic"] = c.synthetic.has_value();
  if (c.synthetic) {
    const SyntheticSpec& s = *c.synthetic;
    j["syn_clusters"] = s.num_clusters;
    j["syn_users_per_cluster"] = s.users_per_cluster;
    j["syn_groups_per_cluster"] = s.groups_per_cluster;
    j["syn_items_per_cluster"] = s.items_per_cluster;
    j["syn_in_cluster_prob"] = s.in_cluster_prob;
    j["syn_noise_prob"] = s.noise_prob;
    j["syn_seed"] = s.seed;
  }
  j["test_ratio"] = c.split.test_ratio;
  j["val_ratio"] = c.split.val_ratio;
  j["split_seed"] = c.split.seed;
  if (c.split_manifest) j["split_manifest"] = *c.split_manifest;
  j["disable_cssl"] = c.disable_cssl;
  j["disable_group_reg"] = c.disable_group_reg;
  j["disable_thc"] = c.disable_thc;
  j["eval_every"] = c.train.eval_every;
  j["max_epochs"] = c.train.max_epochs;
  j["allow_large_cssl"] = c.train.allow_large_cssl;
  j["analysis_bins"] = c.analysis_bins;
  j["output_dir"] = c.output_dir;
  return j;
}

/// Overlays the keys present in `j` onto `c`. Unknown keys are an error so
/// typos do not silently fall back to defaults.
inline void merge_config(const json& j, RunConfig& c) {
  static const std::vector<std::string> known{
      "gamma", "beta", "tau_u", "tau_g", "lambda_ssl", "lambda_reg", "lr", "dim", "layers", "seed",
      "patience", "k_list", "init_stddev", "variant", "score_view", "use_cssl", "use_group_reg",
      "ug_path", "ui_path", "num_users", "num_groups", "num_items", "synthetic", "syn_clusters",
      "syn_users_per_cluster", "syn_groups_per_cluster", "syn_items_per_cluster",
      "syn_in_cluster_prob", "syn_noise_prob", "syn_seed", "test_ratio", "val_ratio", "split_seed",
      "split_manifest", "disable_cssl", "disable_group_reg", "disable_thc", "eval_every",
      "max_epochs", "allow_large_cssl", "analysis_bins", "output_dir"};
  if (!j.is_object()) throw Error("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw Error("config: unknown key '" + key + "'");
  }
  merge_hyperparams(j, c.hp);
  auto take = [&j](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  auto take_opt = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<typename std::decay_t<decltype(field)>::value_type>();
  };
  take_opt("ug_path", c.ug_path);
  take_opt("ui_path", c.ui_path);
  take_opt("num_users", c.counts.users);
  take_opt("num_groups", c.counts.groups);
  take_opt("num_items", c.counts.items);
  if (j.contains("synthetic")) {
    if (j.at("synthetic").get<bool>()) {
      if (!c.synthetic) c.synthetic = SyntheticSpec{};
    } else {
      c.synthetic.reset();
    }
  }
  if (c.synthetic) {
    SyntheticSpec& s = *c.synthetic;
    take("syn_clusters", s.num_clusters);
    take("syn_users_per_cluster", s.users_per_cluster);
    take("syn_groups_per_cluster", s.groups_per_cluster);
    take("syn_items_per_cluster", s.items_per_cluster);
    take("syn_in_cluster_prob", s.in_cluster_prob);
    take("syn_noise_prob", s.noise_prob);
    take("syn_seed", s.seed);
  }
  take("test_ratio", c.split.test_ratio);
  take("val_ratio", c.split.val_ratio);
  take("split_seed", c.split.seed);
  take_opt("split_manifest", c.split_manifest);
  take("disable_cssl", c.disable_cssl);
  take("disable_group_reg", c.disable_group_reg);
  take("disable_thc", c.disable_thc);
  take("eval_every", c.train.eval_every);
  take("max_epochs", c.train.max_epochs);
  take("allow_large_cssl", c.train.allow_large_cssl);
  take("analysis_bins", c.analysis_bins);
  take("output_dir", c.output_dir);
}

inline InteractionGraph load_dataset(const RunConfig& c) {
  c.validate();
  if (c.synthetic) return generate_synthetic(*c.synthetic);
  return load_interactions(*c.ug_path, *c.ui_path, c.counts);
}

inline SplitGraph load_split(const RunConfig& c, const InteractionGraph& full) {
  if (c.split_manifest) return apply_split_manifest(full, read_json(*c.split_manifest));
  return split_train_test(full, c.split.test_ratio, c.split.val_ratio, c.split.seed);
}

// ---------------------------------------------------------------------------
// prepare

struct PrepareResult {
  json manifest;
  json stats;
};

inline PrepareResult cmd_prepare(const RunConfig& c) {
  const InteractionGraph full = load_dataset(c);
  const SplitGraph split = load_split(c, full);
  PrepareResult r;
  r.manifest = split_manifest(full, split, c.split);
  r.stats = json{{"dataset", to_json(graph_stats(full))},
                 {"train", to_json(graph_stats(split.train))},
                 {"dataset_hash", dataset_hash(full)},
                 {"config", to_json(c)}};
  write_file_atomic(c.out("split.json"), dump(r.manifest));
  write_file_atomic(c.out("stats.json"), dump(r.stats));
  if (c.synthetic) {
    write_edge_list(c.out("user_group.tsv").string(), full.user_group_edges());
    write_edge_list(c.out("user_item.tsv").string(), full.user_item_edges());
  }
  return r;
}

// ---------------------------------------------------------------------------
// train

struct TrainRunResult {
  Checkpoint checkpoint;
  TrainHistory history;
  json manifest;
  std::string history_csv;
};

inline json run_manifest(const RunConfig& c, const InteractionGraph& full, const TrainHistory& h) {
  return json{{"format", "grouprec-run-v1"},
              {"config", to_json(c)},
              {"effective_hyperparams", to_json(c.effective_hyperparams())},
              {"dataset_hash", dataset_hash(full)},
              {"init_seed", c.hp.seed},
              {"split_seed", c.split.seed},
              {"stop_reason", h.stop_reason},
              {"best_epoch", h.best_epoch},
              {"best_validation_metric", h.best_metric},
              {"epochs_run", h.epochs.size()},
              {"optimizer_steps", h.optimizer_steps}};
}

/// Trains on an already-built split without touching the filesystem.
inline TrainRunResult train_on_split(const RunConfig& c, const InteractionGraph& full,
                                     const SplitGraph& split) {
  const Hyperparams hp = c.effective_hyperparams();
  TrainResult t = train(split, hp, c.train);
  TrainRunResult r;
  r.checkpoint = Checkpoint{std::move(t.embeddings), hp, split.train.num_items()};
  r.history = std::move(t.history);
  r.manifest = run_manifest(c, full, r.history);
  r.history_csv = history_csv(r.history);
  return r;
}

inline TrainRunResult cmd_train(const RunConfig& c) {
  const InteractionGraph full = load_dataset(c);
  const SplitGraph split = load_split(c, full);
  TrainRunResult r = train_on_split(c, full, split);
  save_checkpoint(c.out("checkpoint.json"), r.checkpoint);
  write_file_atomic(c.out("history.csv"), r.history_csv);
  write_file_atomic(c.out("run_manifest.json"), dump(r.manifest));
  return r;
}

// ---------------------------------------------------------------------------
// evaluate

inline ForwardTrace forward_checkpoint(const Checkpoint& ck, const SplitGraph& split) {
  if (ck.embeddings.num_users() != split.train.num_users() ||
      ck.embeddings.num_groups() != split.train.num_groups()) {
    throw Error("checkpoint has " + std::to_string(ck.embeddings.num_users()) + " users / " +
                std::to_string(ck.embeddings.num_groups()) + " groups but the split has " +
                std::to_string(split.train.num_users()) + " / " +
                std::to_string(split.train.num_groups()));
  }
  return forward(ck.embeddings, Hypergraphs::build(split.train), ck.hyperparams);
}

inline MetricsReport evaluate_checkpoint(const Checkpoint& ck, const SplitGraph& split,
                                         const std::vector<std::size_t>& k_list) {
  const ForwardTrace tr = forward_checkpoint(ck, split);
  return evaluate_topk(tr.user, tr.group, split.train.groups_by_user(), split.test, k_list);
}

inline MetricsReport cmd_evaluate(const RunConfig& c, const Checkpoint& ck,
                                  const std::vector<std::size_t>& k_list) {
  const InteractionGraph full = load_dataset(c);
  const SplitGraph split = load_split(c, full);
  MetricsReport m = evaluate_checkpoint(ck, split, k_list);
  json j = to_json(m);
  j["dataset_hash"] = dataset_hash(full);
  j["config"] = to_json(c);
  write_file_atomic(c.out("metrics.json"), dump(j));
  return m;
}

// ---------------------------------------------------------------------------
// coldstart

struct ColdStartRow {
  std::optional<std::size_t> k;  // empty for the uncapped reference run
  std::size_t remaining_edges = 0;
  MetricsReport metrics;
};

/// Caps training degrees at each k, retrains from scratch and evaluates on
/// the untouched test set. The first row is the uncapped run.
inline std::vector<ColdStartRow> coldstart_sweep(const RunConfig& c, const SplitGraph& split,
                                                 const std::vector<std::size_t>& k_values) {
  if (k_values.empty()) throw Error("coldstart: need at least one k");
  const Hyperparams hp = c.effective_hyperparams();
  auto run = [&](const SplitGraph& s) {
    const TrainResult t = train(s, hp, c.train);
    const ForwardTrace tr = forward(t.embeddings, Hypergraphs::build(s.train), hp);
    // Candidates exclude the original training positives so every run ranks
    // the same candidate sets.
    return evaluate_topk(tr.user, tr.group, split.train.groups_by_user(), split.test, hp.k_list);
  };
  std::vector<ColdStartRow> rows;
  rows.push_back({std::nullopt, split.train.user_group_edges().size(), run(split)});
  for (std::size_t k : k_values) {
    SplitGraph capped = split;
    capped.train = cap_group_degree(split.train, k, c.split.seed + k);
    rows.push_back({k, capped.train.user_group_edges().size(), run(capped)});
  }
  return rows;
}

inline std::string coldstart_csv(const std::vector<ColdStartRow>& rows) {
  std::ostringstream os;
  os << "k,remaining_edges";
  for (std::size_t k : rows.front().metrics.k_list) os << ",recall@" << k << ",ndcg@" << k;
  os << '\n';
  for (const auto& r : rows) {
    os << (r.k ? std::to_string(*r.k) : std::string("none")) << ',' << r.remaining_edges;
    for (std::size_t i = 0; i < r.metrics.k_list.size(); ++i)
      os << ',' << format_double(r.metrics.recall[i]) << ',' << format_double(r.metrics.ndcg[i]);
    os << '\n';
  }
  return os.str();
}

inline std::vector<ColdStartRow> cmd_coldstart(const RunConfig& c,
                                               const std::vector<std::size_t>& k_values) {
  const InteractionGraph full = load_dataset(c);
  const SplitGraph split = load_split(c, full);
  auto rows = coldstart_sweep(c, split, k_values);
  write_file_atomic(c.out("coldstart.csv"), coldstart_csv(rows));
  return rows;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeResult {
  ConsistencyResult consistency;
  RelatednessAnalysis relatedness;
};

inline AnalyzeResult analyze_checkpoint(const Checkpoint& ck, const SplitGraph& split,
                                        std::size_t bins) {
  const ForwardTrace tr = forward_checkpoint(ck, split);
  return {consistency(tr.user_item_view, tr.user_group_view),
          group_relatedness_analysis(tr.group, split.train.members_by_group(), bins)};
}

inline AnalyzeResult cmd_analyze(const RunConfig& c, const Checkpoint& ck) {
  const InteractionGraph full = load_dataset(c);
  const SplitGraph split = load_split(c, full);
  AnalyzeResult r = analyze_checkpoint(ck, split, c.analysis_bins);
  json j{{"consistency_numerator", r.consistency.numerator},
         {"consistency_denominator", r.consistency.denominator},
         {"pearson", r.relatedness.pearson},
         {"bins", r.relatedness.bins.size()},
         {"pairs", r.relatedness.total_pairs}};
  j["consistency"] = r.consistency.value ? json(*r.consistency.value) : json("undefined");
  if (r.relatedness.warning) j["warning"] = *r.relatedness.warning;
  write_file_atomic(c.out("analysis.json"), dump(j));
  write_file_atomic(c.out("relatedness.csv"), relatedness_csv(r.relatedness));
  return r;
}

// ---------------------------------------------------------------------------
// gradcheck

inline json gradcheck_report(std::size_t instances) {
  json cases = json::array();
  bool all = true;
  for (const GradCheckCase& c : run_gradcheck_suite(instances)) {
    all = all && c.report.passed;
    cases.push_back({{"seed", c.seed},
                     {"gamma", c.hp.gamma},
                     {"beta", c.hp.beta},
                     {"layers", c.hp.layers},
                     {"coordinates", c.report.coordinates},
                     {"max_rel_error", c.report.max_rel_error},
                     {"mean_rel_error", c.report.mean_rel_error},
                     {"passed", c.report.passed}});
  }
  return json{{"kind", "gradient"}, {"tolerance", 1e-4}, {"step", 1e-5}, {"passed", all},
              {"cases", cases}};
}

inline json equivalence_report(std::size_t seeds) {
  json hyper = json::array(), light = json::array();
  bool all = true;
  for (const EquivalenceCase& c : equivalence_battery(seeds)) {
    const auto a = check_thc_vs_hyperconv(c);
    const auto b = check_thc_vs_lightgcn(c);
    all = all && a.passed && b.passed;
    json meta{{"nodes", c.nodes}, {"hyperedges", c.hyperedges}, {"density", c.density},
              {"dim", c.dim}, {"topology_seed", c.topology_seed}};
    json ja = meta, jb = meta;
    ja["max_deviation"] = a.max_deviation;
    ja["passed"] = a.passed;
    jb["max_deviation"] = b.max_deviation;
    jb["symmetric_route_deviation"] = b.symmetric_route_deviation;
    jb["passed"] = b.passed;
    hyper.push_back(ja);
    light.push_back(jb);
  }
  return json{{"kind", "equivalence"}, {"tolerance", 1e-10}, {"passed", all},
              {"thc_vs_hyperconv", hyper}, {"thc_vs_lightgcn", light}};
}

}  // namespace grouprec
