// Copyright 2026 The OCF Lab Authors.
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

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ocf/sampler.hpp"
#include "test_support.hpp"

namespace ocf {
namespace {

TEST(Sampler, CumulativeTable) {
  PopularityProfile p{{2, 1, 1}, 4, {0.5, 0.25, 0.25}};
  const auto s = build_sampler(p, 0);
  ASSERT_EQ(s.cumulative().size(), 3u);
  EXPECT_EQ(s.cumulative()[0], 0.5);
  EXPECT_EQ(s.cumulative()[1], 0.75);
  EXPECT_EQ(s.cumulative()[2], 1.0);
}

TEST(Sampler, NeverDrawsZeroProbabilityItems) {
  PopularityProfile p{{0, 5, 0, 3, 0}, 8, {0, 0.625, 0, 0.375, 0}};
  const auto s = build_sampler(p, 1);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50000; ++t) {
    const Index j = s.draw(rng);
    EXPECT_TRUE(j == 1 || j == 3) << j;
  }
  EXPECT_THROW(build_sampler(PopularityProfile{}, 0), DataError);
}

TEST(DrawCounts, RowSumsAndDeterminism) {
  const auto train = testing::random_matrix(600, 30, 0.1, 5, 0);
  const auto s = build_sampler(popularity(train), 77);
  const auto a = draw_counts(s, 40, train);
  for (Index i = 0; i < train.users(); ++i) {
    EXPECT_EQ(a.row_sum(i), train.row_size(i) > 0 ? 40 : 0) << "user " << i;
  }
  EXPECT_EQ(a, draw_counts(s, 40, train));
  EXPECT_EQ(a, draw_counts(s, 40, train, 4));  // thread count does not change the draw
  EXPECT_NE(a, draw_counts(build_sampler(popularity(train), 78), 40, train));
  EXPECT_THROW(draw_counts(s, 0, train), UsageError);
}

TEST(DrawCounts, PooledFrequenciesTrackPopularity) {
  const auto train = testing::random_matrix(200, 12, 0.3, 8);
  const auto prof = popularity(train);
  const auto counts = draw_counts(build_sampler(prof, 2), 500, train);
  std::vector<double> pooled(12, 0.0);
  double total = 0.0;
  for (Index i = 0; i < counts.users(); ++i) {
    for (const auto& e : counts.row(i)) {
      pooled[static_cast<std::size_t>(e.item)] += static_cast<double>(e.count);
      total += static_cast<double>(e.count);
    }
  }
  double tv = 0.0;
  for (std::size_t j = 0; j < pooled.size(); ++j) tv += std::abs(pooled[j] / total - prof.probs[j]);
  EXPECT_LT(tv / 2.0, 0.01);
}

TEST(DrawCounts, WritesSparseTable) {
  const auto train = InteractionMatrix::from_rows(2, {{0}, {}});
  PopularityProfile p{{1, 0}, 1, {1.0, 0.0}};
  std::ostringstream out;
  write_sample_counts(out, draw_counts(build_sampler(p, 0), 3, train));
  EXPECT_EQ(out.str(), "user\titem\tcount\n0\t0\t3\n");
}

TEST(Seeds, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(9, 4), derive_seed(9, 4));
}

}  // namespace
}  // namespace ocf
