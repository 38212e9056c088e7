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

// Small helpers shared by the unit tests.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "grouprec/grouprec.hpp"

namespace grouprec::testing {

inline DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                 double stddev = 1.0) {
  std::mt19937_64 rng(seed);
  return DenseMatrix::random_normal(rows, cols, stddev, rng);
}

/// Random bipartite graph where every user has at least one group and item.
inline InteractionGraph random_graph(std::size_t users, std::size_t groups, std::size_t items,
                                     double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(density);
  std::vector<Edge> ug, ui;
  for (Id u = 0; u < users; ++u) {
    ug.push_back({u, static_cast<Id>(rng() % groups)});
    ui.push_back({u, static_cast<Id>(rng() % items)});
    for (Id g = 0; g < groups; ++g)
      if (coin(rng)) ug.push_back({u, g});
    for (Id i = 0; i < items; ++i)
      if (coin(rng)) ui.push_back({u, i});
  }
  return InteractionGraph(users, groups, items, std::move(ug), std::move(ui));
}

inline void expect_matrix_near(const DenseMatrix& a, const DenseMatrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  EXPECT_LE(a.max_abs_diff(b), tol);
}

/// Fresh per-test scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = std::filesystem::temp_directory_path() / "grouprec_tests" /
             (std::string(info->test_suite_name()) + "." + info->name() + "." + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace grouprec::testing
