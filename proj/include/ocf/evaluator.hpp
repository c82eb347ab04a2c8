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
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ocf/common.hpp"
#include "ocf/interaction_store.hpp"
#include "ocf/network.hpp"

namespace ocf {

inline constexpr int kNdcgCutoff = 50;

struct RankedList {
  Index user = -1;
  std::vector<std::int32_t> items;
};

namespace detail {

/// Top-k of `scores` with `excluded` (sorted) masked out; higher score first,
/// ties by ascending item index.
inline std::vector<std::int32_t> top_k(const double* scores, Index n,
                                       std::span<const std::int32_t> excluded, Index k) {
  std::vector<std::int32_t> candidates;
  candidates.reserve(static_cast<std::size_t>(n) - excluded.size());
  auto ex = excluded.begin();
  for (std::int32_t j = 0; j < n; ++j) {
    while (ex != excluded.end() && *ex < j) ++ex;
    if (ex != excluded.end() && *ex == j) continue;
    candidates.push_back(j);
  }
  if (k > static_cast<Index>(candidates.size())) {
    throw UsageError("K exceeds the number of recommendable items");
  }
  auto better = [scores](std::int32_t a, std::int32_t b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  };
  auto mid = candidates.begin() + k;
  std::partial_sort(candidates.begin(), mid, candidates.end(), better);
  candidates.resize(static_cast<std::size_t>(k));
  return candidates;
}

}  // namespace detail

/// Top-K items from the serving head for a user whose observed items are
/// `observed`; observed items are never recommended.
inline RankedList recommend_topk(const TwoHeadedModel& model, std::span<const std::int32_t> observed,
                                 Index k, Index user = -1) {
  if (k < 1) throw UsageError("K must be at least 1");
  RowVector x = RowVector::Zero(model.items);
  for (auto j : observed) {
    if (j < 0 || j >= model.items) throw DataError("observed item out of range");
    x[j] = 1.0;
  }
  const RowVector s = decode(model.serving_head(), encode(model, x));
  return {user, detail::top_k(s.data(), model.items, observed, k)};
}

/// Ranked lists for a set of users, scored in batches through the serving head.
inline std::vector<RankedList> recommend_users(const TwoHeadedModel& model, const InteractionMatrix& input,
                                               std::span<const Index> users, Index k,
                                               int threads = 1) {
  if (input.items() != model.items) throw DataError("model and data disagree on item count");
  std::vector<RankedList> out(users.size());
  constexpr Index kBatch = 256;
  const Index batches = (static_cast<Index>(users.size()) + kBatch - 1) / kBatch;
  auto run = [&](Index b) {
    const auto begin = static_cast<std::size_t>(b * kBatch);
    const auto end = std::min(users.size(), begin + static_cast<std::size_t>(kBatch));
    const auto slice = users.subspan(begin, end - begin);
    const Matrix scores = decode(model.serving_head(), encode(model, input.dense_rows(slice)));
    for (std::size_t r = 0; r < slice.size(); ++r) {
      const auto observed = input.row(slice[r]);
      const Index kk = std::min<Index>(k, model.items - static_cast<Index>(observed.size()));
      out[begin + r] = {slice[r], detail::top_k(scores.row(static_cast<Index>(r)).data(), model.items,
                                                observed, kk)};
    }
  };
  const int workers = static_cast<int>(std::clamp<Index>(threads, 1, std::max<Index>(batches, 1)));
  if (workers == 1) {
    for (Index b = 0; b < batches; ++b) run(b);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (Index b = w; b < batches; b += workers) run(b);
      });
    }
  }
  return out;
}

/// Identifies one reported metric. K is 0 for R-Precision and the NDCG
/// cutoff for NDCG.
struct MetricKey {
  std::string name;
  int k = 0;
  bool operator==(const MetricKey&) const = default;
};

/// Metric layout for a K list: R-Precision, NDCG, then MAP, Precision,
/// Recall and F1 for each K in order.
inline std::vector<MetricKey> metric_keys(std::span<const int> k_list) {
  std::vector<MetricKey> keys{{"R-Precision", 0}, {"NDCG", kNdcgCutoff}};
  for (int k : k_list) {
    keys.push_back({"MAP", k});
    keys.push_back({"Precision", k});
    keys.push_back({"Recall", k});
    keys.push_back({"F1", k});
  }
  return keys;
}

/// Ranking depth that metrics_for_user needs for a user with `relevant`
/// test items.
inline Index required_depth(std::span<const int> k_list, Index relevant) {
  Index depth = std::max<Index>(kNdcgCutoff, relevant);
  for (int k : k_list) depth = std::max<Index>(depth, k);
  return depth;
}

/// All metrics for one user, ordered as metric_keys(k_list). `relevant` is
/// the sorted test row. Positions past the end of `ranked` count as misses.
inline std::vector<double> metrics_for_user(std::span<const std::int32_t> ranked,
                                            std::span<const std::int32_t> relevant,
                                            std::span<const int> k_list) {
  if (relevant.empty()) throw UsageError("metrics_for_user: empty test row");
  for (int k : k_list) {
    if (k < 1) throw UsageError("metric cutoffs must be positive");
  }
  const Index total_relevant = static_cast<Index>(relevant.size());
  const Index depth = std::min<Index>(static_cast<Index>(ranked.size()),
                                      required_depth(k_list, total_relevant));
  // hits[k] = relevant items among the first k positions.
  std::vector<Index> hits(static_cast<std::size_t>(required_depth(k_list, total_relevant)) + 1, 0);
  std::vector<char> rel(hits.size(), 0);
  for (Index p = 0; p < static_cast<Index>(hits.size()) - 1; ++p) {
    const bool r = p < depth && std::binary_search(relevant.begin(), relevant.end(), ranked[static_cast<std::size_t>(p)]);
    rel[static_cast<std::size_t>(p) + 1] = r;
    hits[static_cast<std::size_t>(p) + 1] = hits[static_cast<std::size_t>(p)] + (r ? 1 : 0);
  }
  const double R = static_cast<double>(total_relevant);
  std::vector<double> out;
  out.reserve(2 + 4 * k_list.size());
  out.push_back(static_cast<double>(hits[static_cast<std::size_t>(total_relevant)]) / R);

  double dcg = 0.0, idcg = 0.0;
  for (Index k = 1; k <= kNdcgCutoff; ++k) {
    const double discount = 1.0 / std::log2(static_cast<double>(k) + 1.0);
    if (rel[static_cast<std::size_t>(k)]) dcg += discount;
    if (k <= total_relevant) idcg += discount;
  }
  out.push_back(dcg / idcg);

  for (int k : k_list) {
    const auto kk = static_cast<std::size_t>(k);
    double ap = 0.0;
    for (std::size_t p = 1; p <= kk; ++p) {
      if (rel[p]) ap += static_cast<double>(hits[p]) / static_cast<double>(p);
    }
    ap /= static_cast<double>(std::min<Index>(total_relevant, k));
    const double precision = static_cast<double>(hits[kk]) / k;
    const double recall = static_cast<double>(hits[kk]) / R;
    const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    out.push_back(ap);
    out.push_back(precision);
    out.push_back(recall);
    out.push_back(f1);
  }
  return out;
}

struct MetricReport {
  std::vector<MetricKey> keys;
  std::vector<double> mean;
  std::vector<double> half_width;  // 1.96 * sample std / sqrt(users)
  Index users = 0;

  double value(std::string_view name, int k) const {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (keys[i].name == name && keys[i].k == k) return mean[i];
    }
    throw UsageError("metric not in report: " + std::string(name));
  }
};

/// Mean and 95% normal-approximation half-width per metric column.
inline MetricReport aggregate(const std::vector<std::vector<double>>& per_user,
                              std::vector<MetricKey> keys) {
  if (per_user.size() < 2) throw DataError("aggregate needs at least two users");
  const std::size_t cols = keys.size();
  MetricReport rep{std::move(keys), std::vector<double>(cols, 0.0), std::vector<double>(cols, 0.0),
                   static_cast<Index>(per_user.size())};
  const double count = static_cast<double>(per_user.size());
  for (const auto& row : per_user) {
    if (row.size() != cols) throw DataError("aggregate: ragged metric rows");
    for (std::size_t c = 0; c < cols; ++c) rep.mean[c] += row[c];
  }
  for (auto& m : rep.mean) m /= count;
  for (std::size_t c = 0; c < cols; ++c) {
    double ss = 0.0;
    for (const auto& row : per_user) ss += (row[c] - rep.mean[c]) * (row[c] - rep.mean[c]);
    const double sd = std::sqrt(ss / (count - 1.0));
    rep.half_width[c] = 1.96 * sd / std::sqrt(count);
  }
  return rep;
}

/// Users evaluated against `target`: nonempty target row and nonempty input.
inline std::vector<Index> evaluable_users(const InteractionMatrix& input, const InteractionMatrix& target) {
  std::vector<Index> users;
  for (Index i = 0; i < target.users(); ++i) {
    if (target.row_size(i) > 0 && input.row_size(i) > 0) users.push_back(i);
  }
  return users;
}

struct Evaluation {
  MetricReport report;
  std::vector<Index> users;
  std::vector<std::vector<double>> per_user;
};

/// Ranks with `input` as the observed rows and scores against `target`.
inline Evaluation evaluate(const TwoHeadedModel& model, const InteractionMatrix& input,
                           const InteractionMatrix& target, std::span<const int> k_list,
                           std::span<const Index> users, int threads = 1) {
  Index depth = 0;
  for (Index u : users) depth = std::max(depth, required_depth(k_list, target.row_size(u)));
  const auto lists = recommend_users(model, input, users, depth, threads);
  Evaluation ev;
  ev.users.assign(users.begin(), users.end());
  ev.per_user.reserve(users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    ev.per_user.push_back(metrics_for_user(lists[i].items, target.row(users[i]), k_list));
  }
  ev.report = aggregate(ev.per_user, metric_keys(k_list));
  return ev;
}

/// Mean NDCG only; cheaper than the full report, used for model selection.
inline double mean_ndcg(const TwoHeadedModel& model, const InteractionMatrix& input,
                        const InteractionMatrix& target, std::span<const Index> users,
                        std::optional<Head> head = std::nullopt, int threads = 1) {
  if (users.empty()) return 0.0;
  TwoHeadedModel view;
  const TwoHeadedModel* m = &model;
  if (head == Head::kContrast && model.mse_head) {
    // Rank with the contrastive head by presenting it as the serving head.
    view.kind = ModelKind::kOhns;
    view.items = model.items;
    view.latent_dim = model.latent_dim;
    view.encoder = model.encoder;
    view.contrast_head = model.contrast_head;
    m = &view;
  }
  const auto lists = recommend_users(*m, input, users, kNdcgCutoff, threads);
  const int no_k[1] = {1};
  double total = 0.0;
  for (std::size_t i = 0; i < users.size(); ++i) {
    total += metrics_for_user(lists[i].items, target.row(users[i]), std::span<const int>(no_k, 0))[1];
  }
  return total / static_cast<double>(users.size());
}

struct PopularityReport {
  std::string model;
  Index users = 0;
  Index k = 0;
  std::map<std::int64_t, std::int64_t> histogram;  // train count -> recommendations
  double mean_popularity = 0.0;
};

struct NamedModel {
  std::string name;
  const TwoHeadedModel* model = nullptr;
};

/// Train-popularity of every recommended item in each user's top-K list.
inline std::vector<PopularityReport> popularity_report(std::span<const NamedModel> models,
                                                       const InteractionMatrix& train,
                                                       const PopularityProfile& profile,
                                                       std::span<const Index> users, Index k,
                                                       int threads = 1) {
  std::vector<PopularityReport> out;
  for (const auto& nm : models) {
    PopularityReport rep{nm.name, static_cast<Index>(users.size()), k, {}, 0.0};
    const auto lists = recommend_users(*nm.model, train, users, k, threads);
    double sum = 0.0;
    Index total = 0;
    for (const auto& l : lists) {
      for (auto j : l.items) {
        const auto c = profile.counts.at(static_cast<std::size_t>(j));
        ++rep.histogram[c];
        sum += static_cast<double>(c);
        ++total;
      }
    }
    rep.mean_popularity = total > 0 ? sum / static_cast<double>(total) : 0.0;
    out.push_back(std::move(rep));
  }
  return out;
}

struct ColdStartReport {
  std::vector<std::string> models;
  std::vector<Index> users;
  std::vector<std::vector<double>> ndcg;  // ndcg[user row][model]
  Index skipped_empty_foldin = 0;

  double mean(std::size_t model) const {
    double s = 0.0;
    for (const auto& row : ndcg) s += row.at(model);
    return ndcg.empty() ? 0.0 : s / static_cast<double>(ndcg.size());
  }
};

/// NDCG of held-out users, whose fold-in rows pass through each frozen model.
inline ColdStartReport cold_start_eval(std::span<const NamedModel> models,
                                       std::span<const Index> heldout_users,
                                       const InteractionMatrix& foldin, const InteractionMatrix& test,
                                       int threads = 1) {
  ColdStartReport rep;
  for (const auto& m : models) rep.models.push_back(m.name);
  for (Index u : heldout_users) {
    if (test.row_size(u) == 0) continue;
    if (foldin.row_size(u) == 0) {
      ++rep.skipped_empty_foldin;
      continue;
    }
    rep.users.push_back(u);
  }
  rep.ndcg.assign(rep.users.size(), std::vector<double>(models.size(), 0.0));
  const int no_k[1] = {1};
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const auto lists = recommend_users(*models[mi].model, foldin, rep.users, kNdcgCutoff, threads);
    for (std::size_t i = 0; i < rep.users.size(); ++i) {
      rep.ndcg[i][mi] =
          metrics_for_user(lists[i].items, test.row(rep.users[i]), std::span<const int>(no_k, 0))[1];
    }
  }
  return rep;
}

namespace detail {

inline std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, static_cast<std::size_t>(end - buf));
}

}  // namespace detail

struct NamedReport {
  std::string model;
  MetricReport report;
};

inline void write_metrics_table(std::ostream& out, std::span<const NamedReport> reports) {
  out << "# ndcg_cutoff=" << kNdcgCutoff << " relevance=binary ci=95%\n";
  out << "model\tmetric\tK\tmean\tci\tusers\n";
  for (const auto& nr : reports) {
    for (std::size_t i = 0; i < nr.report.keys.size(); ++i) {
      const auto& key = nr.report.keys[i];
      out << nr.model << '\t' << key.name << '\t'
          << (key.name == "R-Precision" ? std::string("R") : std::to_string(key.k)) << '\t'
          << detail::format_real(nr.report.mean[i]) << '\t'
          << detail::format_real(nr.report.half_width[i]) << '\t' << nr.report.users << '\n';
    }
  }
}

inline void write_popularity_table(std::ostream& out, std::span<const PopularityReport> reports) {
  out << "model\tpopularity_bin\tcount\n";
  for (const auto& r : reports) {
    for (const auto& [bin, count] : r.histogram) out << r.model << '\t' << bin << '\t' << count << '\n';
  }
}

inline void write_popularity_summary(std::ostream& out, std::span<const PopularityReport> reports) {
  out << "model\tK\tusers\tmean_popularity\n";
  for (const auto& r : reports) {
    out << r.model << '\t' << r.k << '\t' << r.users << '\t' << detail::format_real(r.mean_popularity)
        << '\n';
  }
}

inline void write_cold_start_table(std::ostream& out, const ColdStartReport& rep) {
  out << "# ndcg_cutoff=" << kNdcgCutoff << " skipped_empty_foldin=" << rep.skipped_empty_foldin << '\n';
  out << "user";
  for (const auto& m : rep.models) out << '\t' << m << "_ndcg";
  out << '\n';
  for (std::size_t i = 0; i < rep.users.size(); ++i) {
    out << rep.users[i];
    for (double v : rep.ndcg[i]) out << '\t' << detail::format_real(v);
    out << '\n';
  }
}

}  // namespace ocf
