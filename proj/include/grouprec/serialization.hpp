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

// JSON/CSV formats: split manifests, checkpoints, metric reports, training
// histories. Doubles are written in shortest round-trip form so a reload
// reproduces every bit.

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "grouprec/evaluation.hpp"
#include "grouprec/interaction_graph.hpp"
#include "grouprec/model.hpp"
#include "grouprec/training.hpp"

namespace grouprec {

using json = nlohmann::json;

/// FNV-1a over the sorted edge lists and entity counts, as 16 hex digits.
inline std::string dataset_hash(const InteractionGraph& g) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  mix(g.num_users());
  mix(g.num_groups());
  mix(g.num_items());
  for (const Edge& e : g.user_group_edges()) mix((std::uint64_t{e.first} << 32) | e.second);
  mix(0xffffffffffffffffULL);
  for (const Edge& e : g.user_item_edges()) mix((std::uint64_t{e.first} << 32) | e.second);
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

/// Writes to a sibling temp file, then renames over the destination.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Hyperparams

inline json to_json(const Hyperparams& hp) {
  return json{{"gamma", hp.gamma},
              {"beta", hp.beta},
              {"tau_u", hp.tau_u},
              {"tau_g", hp.tau_g},
              {"lambda_ssl", hp.lambda_ssl},
              {"lambda_reg", hp.lambda_reg},
              {"lr", hp.lr},
              {"dim", hp.dim},
              {"layers", hp.layers},
              {"seed", hp.seed},
              {"patience", hp.patience},
              {"k_list", hp.k_list},
              {"init_stddev", hp.init_stddev},
              {"variant", to_string(hp.variant)},
              {"score_view", to_string(hp.score_view)},
              {"use_cssl", hp.use_cssl},
              {"use_group_reg", hp.use_group_reg}};
}

/// Reads any subset of the keys written by to_json over `hp`.
inline void merge_hyperparams(const json& j, Hyperparams& hp) {
  auto take = [&j](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  take("gamma", hp.gamma);
  take("beta", hp.beta);
  take("tau_u", hp.tau_u);
  take("tau_g", hp.tau_g);
  take("lambda_ssl", hp.lambda_ssl);
  take("lambda_reg", hp.lambda_reg);
  take("lr", hp.lr);
  take("dim", hp.dim);
  take("layers", hp.layers);
  take("seed", hp.seed);
  take("patience", hp.patience);
  take("k_list", hp.k_list);
  take("init_stddev", hp.init_stddev);
  if (j.contains("variant")) hp.variant = parse_variant(j.at("variant").get<std::string>());
  if (j.contains("score_view")) hp.score_view = parse_score_view(j.at("score_view").get<std::string>());
  take("use_cssl", hp.use_cssl);
  take("use_group_reg", hp.use_group_reg);
}

// ---------------------------------------------------------------------------
// Split manifest

struct SplitParams {
  double test_ratio = 0.3;
  double val_ratio = 0.2;
  std::uint64_t seed = 7;
};

inline json split_manifest(const InteractionGraph& full, const SplitGraph& split,
                           const SplitParams& params) {
  return json{{"format", "grouprec-split-v1"},
              {"seed", params.seed},
              {"test_ratio", params.test_ratio},
              {"val_ratio", params.val_ratio},
              {"num_users", full.num_users()},
              {"num_groups", full.num_groups()},
              {"num_items", full.num_items()},
              {"dataset_hash", dataset_hash(full)},
              {"test", split.test},
              {"validation", split.validation}};
}

/// Rebuilds a split from the full graph and a manifest. Every held-out group
/// must be one of the user's groups.
inline SplitGraph apply_split_manifest(const InteractionGraph& full, const json& manifest) {
  if (manifest.value("format", "") != "grouprec-split-v1") throw Error("not a split manifest");
  if (manifest.at("num_users").get<std::size_t>() != full.num_users() ||
      manifest.at("num_groups").get<std::size_t>() != full.num_groups()) {
    throw Error("split manifest entity counts do not match the dataset");
  }
  SplitGraph out;
  out.test = manifest.at("test").get<std::vector<std::vector<Id>>>();
  out.validation = manifest.at("validation").get<std::vector<std::vector<Id>>>();
  if (out.test.size() != full.num_users() || out.validation.size() != full.num_users()) {
    throw Error("split manifest has wrong number of users");
  }
  const auto groups = full.groups_by_user();
  std::vector<Edge> train;
  for (std::size_t u = 0; u < groups.size(); ++u) {
    std::vector<Id> held = out.test[u];
    held.insert(held.end(), out.validation[u].begin(), out.validation[u].end());
    std::sort(held.begin(), held.end());
    for (Id g : held)
      if (!std::binary_search(groups[u].begin(), groups[u].end(), g))
        throw Error("split manifest holds out group " + std::to_string(g) + " for user " +
                    std::to_string(u) + " who never joined it");
    for (Id g : groups[u])
      if (!std::binary_search(held.begin(), held.end(), g)) train.push_back({static_cast<Id>(u), g});
  }
  out.train = InteractionGraph(full.num_users(), full.num_groups(), full.num_items(),
                               std::move(train), full.user_item_edges());
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoint

inline constexpr const char* kCheckpointFormat = "grouprec-checkpoint-v1";

struct Checkpoint {
  EmbeddingTable embeddings;
  Hyperparams hyperparams;
  std::size_t num_items = 0;
};

inline json checkpoint_json(const Checkpoint& c) {
  const EmbeddingTable& e = c.embeddings;
  auto flat = [](const DenseMatrix& m) {
    return std::vector<double>(m.values().begin(), m.values().end());
  };
  return json{{"format", kCheckpointFormat},
              {"dim", e.dim()},
              {"num_users", e.num_users()},
              {"num_groups", e.num_groups()},
              {"num_items", c.num_items},
              {"init_seed", c.hyperparams.seed},
              {"hyperparams", to_json(c.hyperparams)},
              {"item_view_user", flat(e.item_view_user)},
              {"group_view_user", flat(e.group_view_user)},
              {"group", flat(e.group)}};
}

inline Checkpoint checkpoint_from_json(const json& j) {
  if (j.value("format", "") != kCheckpointFormat) throw Error("not a grouprec checkpoint");
  Checkpoint c;
  merge_hyperparams(j.at("hyperparams"), c.hyperparams);
  const auto d = j.at("dim").get<std::size_t>();
  const auto users = j.at("num_users").get<std::size_t>();
  const auto groups = j.at("num_groups").get<std::size_t>();
  c.num_items = j.at("num_items").get<std::size_t>();
  c.embeddings.item_view_user = DenseMatrix(users, d, j.at("item_view_user").get<std::vector<double>>());
  c.embeddings.group_view_user = DenseMatrix(users, d, j.at("group_view_user").get<std::vector<double>>());
  c.embeddings.group = DenseMatrix(groups, d, j.at("group").get<std::vector<double>>());
  if (!c.embeddings.all_finite()) throw Error("checkpoint contains non-finite values");
  return c;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  write_file_atomic(path, dump(checkpoint_json(c)));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_json(path));
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const MetricsReport& m) {
  json j{{"k_list", m.k_list}, {"evaluated_users", m.evaluated_users}, {"averaging", "per_user"}};
  for (std::size_t i = 0; i < m.k_list.size(); ++i) {
    j["recall@" + std::to_string(m.k_list[i])] = m.recall[i];
    j["ndcg@" + std::to_string(m.k_list[i])] = m.ndcg[i];
  }
  return j;
}

inline json to_json(const LossBreakdown& b) {
  return json{{"bpr", b.bpr}, {"cssl", b.cssl}, {"group_reg", b.group_reg}, {"l2", b.l2},
              {"total", b.total}};
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// epoch,bpr,cssl,group_reg,l2,total,val_metric (blank when not evaluated).
inline std::string history_csv(const TrainHistory& h) {
  std::ostringstream os;
  os << "epoch,bpr,cssl,group_reg,l2,total,val_metric\n";
  std::size_t next_eval = 0;
  for (const EpochRecord& r : h.epochs) {
    os << r.epoch << ',' << format_double(r.loss.bpr) << ',' << format_double(r.loss.cssl) << ','
       << format_double(r.loss.group_reg) << ',' << format_double(r.loss.l2) << ','
       << format_double(r.loss.total) << ',';
    if (next_eval < h.evaluations.size() && h.evaluations[next_eval].epoch == r.epoch) {
      os << format_double(h.evaluations[next_eval].metric);
      ++next_eval;
    }
    os << '\n';
  }
  return os.str();
}

inline std::string relatedness_csv(const RelatednessAnalysis& a) {
  std::ostringstream os;
  os << "bin,relatedness,common_user_ratio,pairs\n";
  for (std::size_t i = 0; i < a.bins.size(); ++i) {
    os << i << ',' << format_double(a.bins[i].relatedness) << ','
       << format_double(a.bins[i].common_ratio) << ',' << a.bins[i].pairs << '\n';
  }
  os << "# pearson," << format_double(a.pearson) << '\n';
  return os.str();
}

inline json to_json(const GraphStats& s) {
  return json{{"users", s.users},
              {"groups", s.groups},
              {"items", s.items},
              {"user_group_edges", s.user_group_edges},
              {"user_item_edges", s.user_item_edges},
              {"avg_groups_per_user", s.groups_per_user},
              {"avg_users_per_group", s.users_per_group},
              {"avg_items_per_user", s.items_per_user},
              {"avg_users_per_item", s.users_per_item}};
}

}  // namespace grouprec
