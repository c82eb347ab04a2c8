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

#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "ocf/common.hpp"
#include "ocf/interaction_store.hpp"

namespace ocf {

/// Inverse-CDF sampler over items, distributed as the popularity profile.
class WeightedSampler {
 public:
  WeightedSampler(const PopularityProfile& profile, std::uint64_t seed) : seed_(seed) {
    if (profile.counts.empty() || profile.total <= 0) {
      throw DataError("cannot build a sampler from an empty popularity profile");
    }
    // Cumulating integer counts keeps the table exact up to the final
    // division, and makes the last entry exactly 1.
    cdf_.resize(profile.counts.size());
    std::int64_t running = 0;
    const double total = static_cast<double>(profile.total);
    for (std::size_t j = 0; j < cdf_.size(); ++j) {
      running += profile.counts[j];
      cdf_[j] = static_cast<double>(running) / total;
      if (profile.counts[j] > 0) last_positive_ = static_cast<Index>(j);
    }
  }

  std::span<const double> cumulative() const { return cdf_; }
  std::uint64_t seed() const { return seed_; }
  Index items() const { return static_cast<Index>(cdf_.size()); }

  /// One draw, O(log n). Zero-probability items are never returned.
  template <class Engine>
  Index draw(Engine& engine) const {
    const double u = uniform_unit(engine);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) return last_positive_;
    return static_cast<Index>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
  std::uint64_t seed_ = 0;
  Index last_positive_ = 0;
};

inline WeightedSampler build_sampler(const PopularityProfile& profile, std::uint64_t seed) {
  return WeightedSampler(profile, seed);
}

/// Per-user negative-sample counts, sparse by row.
class SampleCountMatrix {
 public:
  struct Entry {
    std::int32_t item;
    std::int64_t count;
    bool operator==(const Entry&) const = default;
  };

  SampleCountMatrix() = default;
  SampleCountMatrix(Index n, std::int64_t per_user, std::vector<std::vector<Entry>> rows)
      : n_(n), per_user_(per_user), rows_(std::move(rows)) {}

  Index users() const { return static_cast<Index>(rows_.size()); }
  Index items() const { return n_; }
  std::int64_t per_user() const { return per_user_; }
  std::span<const Entry> row(Index i) const { return rows_.at(static_cast<std::size_t>(i)); }

  std::int64_t row_sum(Index i) const {
    std::int64_t s = 0;
    for (const auto& e : row(i)) s += e.count;
    return s;
  }

  Matrix dense_rows(std::span<const Index> users) const {
    Matrix out = Matrix::Zero(static_cast<Index>(users.size()), n_);
    for (std::size_t b = 0; b < users.size(); ++b) {
      for (const auto& e : row(users[b])) out(static_cast<Index>(b), e.item) = static_cast<double>(e.count);
    }
    return out;
  }

  bool operator==(const SampleCountMatrix&) const = default;

 private:
  Index n_ = 0;
  std::int64_t per_user_ = 0;
  std::vector<std::vector<Entry>> rows_;
};

inline constexpr Index kSamplerBlockUsers = 256;

/// N i.i.d. popularity draws (with replacement, positives not excluded) for
/// every user with a nonempty row. Users are split into fixed blocks of
/// kSamplerBlockUsers; block b draws from its own engine seeded with
/// derive_seed(sampler seed, b), so the result does not depend on `threads`.
inline SampleCountMatrix draw_counts(const WeightedSampler& sampler, std::int64_t per_user,
                                     const InteractionMatrix& users, int threads = 1) {
  if (per_user < 1) throw UsageError("number of negative samples must be at least 1");
  if (users.items() != sampler.items()) {
    throw DataError("draw_counts: sampler and interaction matrix disagree on item count");
  }
  const Index m = users.users();
  const Index n = users.items();
  std::vector<std::vector<SampleCountMatrix::Entry>> rows(static_cast<std::size_t>(m));
  const Index blocks = (m + kSamplerBlockUsers - 1) / kSamplerBlockUsers;

  auto run_block = [&](Index block, std::vector<std::int64_t>& scratch) {
    std::mt19937_64 rng(derive_seed(sampler.seed(), static_cast<std::uint64_t>(block)));
    const Index end = std::min(m, (block + 1) * kSamplerBlockUsers);
    for (Index i = block * kSamplerBlockUsers; i < end; ++i) {
      if (users.row_size(i) == 0) continue;
      for (std::int64_t d = 0; d < per_user; ++d) ++scratch[static_cast<std::size_t>(sampler.draw(rng))];
      auto& row = rows[static_cast<std::size_t>(i)];
      for (Index j = 0; j < n; ++j) {
        auto& c = scratch[static_cast<std::size_t>(j)];
        if (c != 0) {
          row.push_back({static_cast<std::int32_t>(j), c});
          c = 0;
        }
      }
    }
  };

  const int workers = static_cast<int>(std::clamp<Index>(threads, 1, std::max<Index>(blocks, 1)));
  if (workers == 1) {
    std::vector<std::int64_t> scratch(static_cast<std::size_t>(n), 0);
    for (Index b = 0; b < blocks; ++b) run_block(b, scratch);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        std::vector<std::int64_t> scratch(static_cast<std::size_t>(n), 0);
        for (Index b = w; b < blocks; b += workers) run_block(b, scratch);
      });
    }
  }
  return {n, per_user, std::move(rows)};
}

inline void write_sample_counts(std::ostream& out, const SampleCountMatrix& s) {
  out << "user\titem\tcount\n";
  for (Index i = 0; i < s.users(); ++i) {
    for (const auto& e : s.row(i)) out << i << '\t' << e.item << '\t' << e.count << '\n';
  }
}

}  // namespace ocf
