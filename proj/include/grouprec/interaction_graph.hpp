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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "grouprec/dense_matrix.hpp"

namespace grouprec {

using Id = std::uint32_t;

/// A (first, second) id pair: (user, group) or (user, item).
struct Edge {
  Id first = 0;
  Id second = 0;
  auto operator<=>(const Edge&) const = default;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Users, groups, items and the two interaction edge sets.
///
/// Edge lists are kept sorted and duplicate-free so two graphs built from the
/// same edges in any order compare equal.
class InteractionGraph {
 public:
  InteractionGraph() = default;
  InteractionGraph(std::size_t num_users, std::size_t num_groups, std::size_t num_items,
                   std::vector<Edge> user_group, std::vector<Edge> user_item)
      : num_users_(num_users),
        num_groups_(num_groups),
        num_items_(num_items),
        user_group_(normalize(std::move(user_group))),
        user_item_(normalize(std::move(user_item))) {
    check_range(user_group_, num_groups_, "user-group");
    check_range(user_item_, num_items_, "user-item");
  }

  std::size_t num_users() const { return num_users_; }
  std::size_t num_groups() const { return num_groups_; }
  std::size_t num_items() const { return num_items_; }
  const std::vector<Edge>& user_group_edges() const { return user_group_; }
  const std::vector<Edge>& user_item_edges() const { return user_item_; }

  /// Per-user sorted group ids.
  std::vector<std::vector<Id>> groups_by_user() const { return by_first(user_group_, num_users_); }
  std::vector<std::vector<Id>> items_by_user() const { return by_first(user_item_, num_users_); }

  /// Per-group sorted member user ids.
  std::vector<std::vector<Id>> members_by_group() const {
    std::vector<std::vector<Id>> out(num_groups_);
    for (const Edge& e : user_group_) out[e.second].push_back(e.first);
    return out;
  }

  bool operator==(const InteractionGraph&) const = default;

 private:
  static std::vector<Edge> normalize(std::vector<Edge> edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
  }

  void check_range(const std::vector<Edge>& edges, std::size_t second_count,
                   const char* what) const {
    for (const Edge& e : edges) {
      if (e.first >= num_users_ || e.second >= second_count) {
        throw Error(std::string(what) + " edge (" + std::to_string(e.first) + ", " +
                    std::to_string(e.second) + ") out of range");
      }
    }
  }

  static std::vector<std::vector<Id>> by_first(const std::vector<Edge>& edges, std::size_t n) {
    std::vector<std::vector<Id>> out(n);
    for (const Edge& e : edges) out[e.first].push_back(e.second);
    return out;
  }

  std::size_t num_users_ = 0;
  std::size_t num_groups_ = 0;
  std::size_t num_items_ = 0;
  std::vector<Edge> user_group_;
  std::vector<Edge> user_item_;
};

// ---------------------------------------------------------------------------
// TSV edge lists

/// Parses `<id>\t<id>` lines. Blank trailing lines are ignored; anything else
/// that is not exactly two non-negative integers is a ParseError.
inline std::vector<Edge> parse_edge_list(std::istream& in, const std::string& source) {
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  auto parse_id = [&](std::string_view field) {
    Id value = 0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (field.empty() || ec != std::errc() || ptr != end) {
      throw ParseError(source, line_no, "not a non-negative integer: '" + std::string(field) + "'");
    }
    return value;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(source, line_no, "expected two TAB-separated fields");
    }
    const std::string_view view(line);
    edges.push_back({parse_id(view.substr(0, tab)), parse_id(view.substr(tab + 1))});
  }
  return edges;
}

inline std::vector<Edge> read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_edge_list(in, path);
}

inline void write_edge_list(std::ostream& out, std::span<const Edge> edges) {
  for (const Edge& e : edges) out << e.first << '\t' << e.second << '\n';
}

inline void write_edge_list(const std::string& path, std::span<const Edge> edges) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_edge_list(out, edges);
}

/// Optional entity-count overrides; unset counts default to max id + 1.
struct EntityCounts {
  std::optional<std::size_t> users;
  std::optional<std::size_t> groups;
  std::optional<std::size_t> items;
};

inline InteractionGraph make_graph(std::vector<Edge> user_group, std::vector<Edge> user_item,
                                   const EntityCounts& counts = {}) {
  if (user_group.empty()) throw Error("no user-group edges");
  if (user_item.empty()) throw Error("no user-item edges");
  std::size_t users = 0, groups = 0, items = 0;
  for (const Edge& e : user_group) {
    users = std::max<std::size_t>(users, e.first + 1);
    groups = std::max<std::size_t>(groups, e.second + 1);
  }
  for (const Edge& e : user_item) {
    users = std::max<std::size_t>(users, e.first + 1);
    items = std::max<std::size_t>(items, e.second + 1);
  }
  return InteractionGraph(counts.users.value_or(users), counts.groups.value_or(groups),
                          counts.items.value_or(items), std::move(user_group),
                          std::move(user_item));
}

inline InteractionGraph load_interactions(const std::string& ug_path, const std::string& ui_path,
                                          const EntityCounts& counts = {}) {
  auto ug = read_edge_list(ug_path);
  if (ug.empty()) throw Error("no user-group edges in " + ug_path);
  auto ui = read_edge_list(ui_path);
  if (ui.empty()) throw Error("no user-item edges in " + ui_path);
  return make_graph(std::move(ug), std::move(ui), counts);
}

// ---------------------------------------------------------------------------
// Splits

/// Train graph plus per-user held-out group ids.
struct SplitGraph {
  InteractionGraph train;
  std::vector<std::vector<Id>> validation;  // per user, sorted
  std::vector<std::vector<Id>> test;        // per user, sorted
};

struct SplitCounts {
  std::size_t test = 0;
  std::size_t validation = 0;
  std::size_t train = 0;
};

/// Per-user counts under the floor rule.
inline SplitCounts split_counts(std::size_t n, double test_ratio, double val_ratio) {
  SplitCounts c;
  c.test = static_cast<std::size_t>(std::floor(test_ratio * static_cast<double>(n)));
  c.validation = static_cast<std::size_t>(std::floor(val_ratio * static_cast<double>(n - c.test)));
  c.train = n - c.test - c.validation;
  return c;
}

inline SplitGraph split_train_test(const InteractionGraph& g, double test_ratio, double val_ratio,
                                   std::uint64_t seed) {
  if (!(test_ratio >= 0.0 && test_ratio < 1.0) || !(val_ratio >= 0.0 && val_ratio < 1.0)) {
    throw Error("split ratios must lie in [0, 1)");
  }
  std::mt19937_64 rng(seed);
  SplitGraph out;
  out.validation.resize(g.num_users());
  out.test.resize(g.num_users());
  std::vector<Edge> train_edges;
  auto groups = g.groups_by_user();
  for (std::size_t u = 0; u < groups.size(); ++u) {
    auto& mine = groups[u];
    const SplitCounts c = split_counts(mine.size(), test_ratio, val_ratio);
    std::shuffle(mine.begin(), mine.end(), rng);
    out.test[u].assign(mine.begin(), mine.begin() + c.test);
    out.validation[u].assign(mine.begin() + c.test, mine.begin() + c.test + c.validation);
    for (auto it = mine.begin() + c.test + c.validation; it != mine.end(); ++it) {
      train_edges.push_back({static_cast<Id>(u), *it});
    }
    std::sort(out.test[u].begin(), out.test[u].end());
    std::sort(out.validation[u].begin(), out.validation[u].end());
  }
  out.train = InteractionGraph(g.num_users(), g.num_groups(), g.num_items(), std::move(train_edges),
                               g.user_item_edges());
  return out;
}

/// Keeps at most k training groups per user, chosen uniformly at random.
inline InteractionGraph cap_group_degree(const InteractionGraph& train, std::size_t k,
                                         std::uint64_t seed) {
  if (k < 1) throw Error("cap_group_degree: k must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<Edge> kept;
  auto groups = train.groups_by_user();
  for (std::size_t u = 0; u < groups.size(); ++u) {
    auto& mine = groups[u];
    if (mine.size() > k) {
      std::shuffle(mine.begin(), mine.end(), rng);
      mine.resize(k);
    }
    for (Id g : mine) kept.push_back({static_cast<Id>(u), g});
  }
  return InteractionGraph(train.num_users(), train.num_groups(), train.num_items(), std::move(kept),
                          train.user_item_edges());
}

// ---------------------------------------------------------------------------
// Planted-cluster synthetic data

struct SyntheticSpec {
  std::size_t num_clusters = 5;
  std::size_t users_per_cluster = 100;
  std::size_t groups_per_cluster = 40;
  std::size_t items_per_cluster = 60;
  double in_cluster_prob = 0.2;
  double noise_prob = 0.01;
  std::uint64_t seed = 7;

  std::size_t num_users() const { return num_clusters * users_per_cluster; }
  std::size_t num_groups() const { return num_clusters * groups_per_cluster; }
  std::size_t num_items() const { return num_clusters * items_per_cluster; }
  std::size_t user_cluster(Id u) const { return u / users_per_cluster; }
  std::size_t group_cluster(Id g) const { return g / groups_per_cluster; }
  std::size_t item_cluster(Id i) const { return i / items_per_cluster; }
};

/// Every user joins same-cluster groups/items with in_cluster_prob and
/// foreign ones with noise_prob. Users that end up with fewer than two groups
/// or no item are topped up with random same-cluster entities (falling back
/// to any entity when the cluster is too small).
inline InteractionGraph generate_synthetic(const SyntheticSpec& spec) {
  auto valid_prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!valid_prob(spec.in_cluster_prob) || !valid_prob(spec.noise_prob)) {
    throw Error("generate_synthetic: probabilities must lie in [0, 1]");
  }
  if (spec.num_clusters == 0 || spec.users_per_cluster == 0) {
    throw Error("generate_synthetic: need at least one user");
  }
  if (spec.num_groups() < 2) {
    throw Error("generate_synthetic: at least two groups are required to give every user two groups");
  }
  if (spec.num_items() < 1) throw Error("generate_synthetic: at least one item is required");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Edge> ug, ui;

  // Draws entity ids for one user: Bernoulli per entity, then top up.
  auto draw = [&](Id u, std::size_t per_cluster, std::size_t minimum, std::vector<Edge>& out) {
    const std::size_t cluster = spec.user_cluster(u);
    const std::size_t total = per_cluster * spec.num_clusters;
    std::vector<char> chosen(total, 0);
    std::size_t count = 0;
    for (std::size_t e = 0; e < total; ++e) {
      const double p = (e / per_cluster == cluster) ? spec.in_cluster_prob : spec.noise_prob;
      if (coin(rng) < p) {
        chosen[e] = 1;
        ++count;
      }
    }
    if (count < minimum) {
      std::vector<Id> pool;
      for (std::size_t e = cluster * per_cluster; e < (cluster + 1) * per_cluster; ++e)
        if (!chosen[e]) pool.push_back(static_cast<Id>(e));
      std::shuffle(pool.begin(), pool.end(), rng);
      std::vector<Id> rest;
      for (std::size_t e = 0; e < total; ++e)
        if (!chosen[e] && e / per_cluster != cluster) rest.push_back(static_cast<Id>(e));
      std::shuffle(rest.begin(), rest.end(), rng);
      pool.insert(pool.end(), rest.begin(), rest.end());
      for (std::size_t i = 0; count < minimum; ++i, ++count) chosen[pool[i]] = 1;
    }
    for (std::size_t e = 0; e < total; ++e)
      if (chosen[e]) out.push_back({u, static_cast<Id>(e)});
  };

  for (Id u = 0; u < spec.num_users(); ++u) {
    draw(u, spec.groups_per_cluster, 2, ug);
    draw(u, spec.items_per_cluster, 1, ui);
  }
  return InteractionGraph(spec.num_users(), spec.num_groups(), spec.num_items(), std::move(ug),
                          std::move(ui));
}

// ---------------------------------------------------------------------------
// Summary statistics (the dataset table columns)

struct GraphStats {
  std::size_t users = 0, groups = 0, items = 0;
  std::size_t user_group_edges = 0, user_item_edges = 0;
  double groups_per_user = 0, users_per_group = 0, items_per_user = 0, users_per_item = 0;
};

inline GraphStats graph_stats(const InteractionGraph& g) {
  auto ratio = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  GraphStats s;
  s.users = g.num_users();
  s.groups = g.num_groups();
  s.items = g.num_items();
  s.user_group_edges = g.user_group_edges().size();
  s.user_item_edges = g.user_item_edges().size();
  s.groups_per_user = ratio(s.user_group_edges, s.users);
  s.users_per_group = ratio(s.user_group_edges, s.groups);
  s.items_per_user = ratio(s.user_item_edges, s.users);
  s.users_per_item = ratio(s.user_item_edges, s.items);
  return s;
}

}  // namespace grouprec
