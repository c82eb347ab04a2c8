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
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "ocf/common.hpp"
#include "ocf/interaction_store.hpp"

namespace ocf {

/// Generator for rating logs shaped like MovieLens-100K: a long-tailed item
/// popularity, heavy-tailed user activity with a floor, 1-5 star ratings
/// driven by latent tastes, and per-user timestamps.
struct SyntheticSpec {
  Index users = 943;
  Index items = 1682;
  Index min_ratings = 20;
  Index max_ratings = 740;
  double mean_ratings = 106.0;
  int factors = 12;
  double popularity_sigma = 2.0;  // log-normal spread of item exposure
  double taste_strength = 1.6;    // how strongly tastes steer which items get rated
  double rating_noise = 0.7;
  std::uint64_t seed = 7;
};

inline std::vector<RatingRecord> generate_ratings(const SyntheticSpec& spec) {
  if (spec.users < 1 || spec.items < 2 || spec.min_ratings < 1 || spec.factors < 1) {
    throw UsageError("invalid synthetic dataset spec");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<std::size_t>(spec.factors);
  const double unit = 1.0 / std::sqrt(static_cast<double>(spec.factors));

  std::vector<double> exposure(static_cast<std::size_t>(spec.items));
  std::vector<double> quality(exposure.size());
  std::vector<std::vector<double>> item_f(exposure.size(), std::vector<double>(d));
  for (std::size_t j = 0; j < exposure.size(); ++j) {
    const double z = normal(rng);
    exposure[j] = spec.popularity_sigma * z;
    // Widely seen items are rated somewhat better on average.
    quality[j] = 0.25 * z + 0.35 * normal(rng);
    for (auto& f : item_f[j]) f = normal(rng) * unit;
  }

  std::vector<RatingRecord> records;
  records.reserve(static_cast<std::size_t>(spec.users * spec.mean_ratings * 1.1));
  std::vector<double> logits(exposure.size());
  std::vector<std::size_t> pool(exposure.size());
  const double extra_mean = std::max(1.0, spec.mean_ratings - static_cast<double>(spec.min_ratings));
  std::exponential_distribution<double> activity(1.0);
  for (Index u = 0; u < spec.users; ++u) {
    std::vector<double> taste(d);
    for (auto& t : taste) t = normal(rng) * unit * 1.5;
    const double bias = 0.3 * normal(rng);
    // Heavy-tailed activity: exponential mixture squared for a long tail.
    const double a = activity(rng);
    const auto count = std::min<Index>(std::min(spec.items - 1, spec.max_ratings),
                                       spec.min_ratings + static_cast<Index>(extra_mean * a * a / 2.0));

    for (std::size_t j = 0; j < logits.size(); ++j) {
      double affinity = 0.0;
      for (std::size_t k = 0; k < d; ++k) affinity += taste[k] * item_f[j][k];
      logits[j] = exposure[j] + spec.taste_strength * affinity * std::sqrt(static_cast<double>(d));
    }
    // Weighted sampling without replacement via Gumbel-top-k.
    std::vector<double> keys(logits.size());
    for (std::size_t j = 0; j < logits.size(); ++j) {
      const double g = -std::log(-std::log(std::max(uniform_unit(rng), 1e-300)));
      keys[j] = logits[j] + g;
    }
    std::iota(pool.begin(), pool.end(), 0);
    std::partial_sort(pool.begin(), pool.begin() + count, pool.end(),
                      [&](std::size_t x, std::size_t y) { return keys[x] > keys[y]; });

    std::int64_t clock = 874'724'710 + static_cast<std::int64_t>(uniform_below(rng, 15'000'000));
    for (Index c = 0; c < count; ++c) {
      const std::size_t j = pool[static_cast<std::size_t>(c)];
      double affinity = 0.0;
      for (std::size_t k = 0; k < d; ++k) affinity += taste[k] * item_f[j][k];
      const double latent = 2.75 + bias + quality[j] + 1.6 * affinity * std::sqrt(static_cast<double>(d)) * unit +
                            spec.rating_noise * normal(rng);
      const double stars = std::clamp(std::round(latent), 1.0, 5.0);
      clock += 1 + static_cast<std::int64_t>(uniform_below(rng, 20'000));
      records.push_back({std::to_string(u + 1), std::to_string(j + 1), stars, clock});
    }
  }
  // Present the log in time order, as rating dumps usually are.
  std::stable_sort(records.begin(), records.end(), [](const RatingRecord& x, const RatingRecord& y) {
    return *x.timestamp < *y.timestamp;
  });
  return records;
}

/// Tab-separated "user item rating timestamp", no header.
inline void write_ratings(std::ostream& out, const std::vector<RatingRecord>& records) {
  for (const auto& r : records) {
    out << r.user_key << '\t' << r.item_key << '\t' << r.rating << '\t' << r.timestamp.value_or(0) << '\n';
  }
}

}  // namespace ocf
