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

#include <charconv>
#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ocf/common.hpp"
#include "ocf/interaction_store.hpp"

namespace ocf {

/// Scalar loss over a batch (summed over rows) and its gradient with respect
/// to the scores, same shape as the scores.
struct LossValue {
  double value = 0.0;
  Matrix gradient;
};

namespace detail {

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DataError(std::string(what) + ": length mismatch");
  }
}

inline LossValue squared_error(const Matrix& target, const Matrix& scores, const char* what) {
  require_same_shape(target, scores, what);
  const Matrix diff = scores - target;
  return {diff.squaredNorm(), 2.0 * diff};
}

}  // namespace detail

/// Sum over all entries of (r - r_hat)^2; unobserved entries are targets of 0.
inline LossValue mse_loss(const Matrix& observed, const Matrix& scores) {
  return detail::squared_error(observed, scores, "mse_loss");
}

inline LossValue mse_loss(const RowVector& observed, const RowVector& scores) {
  return mse_loss(Matrix(observed), Matrix(scores));
}

/// Aggregated negative-sampling loss, per user
///   -( r.x - (|r|_1 / |s|_1) * s.x ),
/// i.e. the negated positives-minus-negatives objective, so that lower is
/// better. Users without positives contribute nothing.
inline LossValue ns_loss(const Matrix& observed, const Matrix& sample_counts, const Matrix& scores) {
  detail::require_same_shape(observed, scores, "ns_loss");
  detail::require_same_shape(sample_counts, scores, "ns_loss");
  LossValue out{0.0, Matrix::Zero(scores.rows(), scores.cols())};
  for (Index i = 0; i < scores.rows(); ++i) {
    const double positives = observed.row(i).sum();
    if (positives == 0.0) continue;
    const double negatives = sample_counts.row(i).sum();
    if (negatives <= 0.0) {
      throw DataError("ns_loss: user with positives has no negative samples");
    }
    const double balance = positives / negatives;
    out.gradient.row(i) = balance * sample_counts.row(i) - observed.row(i);
    out.value += out.gradient.row(i).dot(scores.row(i));
  }
  return out;
}

inline LossValue ns_loss(const RowVector& observed, const RowVector& sample_counts,
                         const RowVector& scores) {
  return ns_loss(Matrix(observed), Matrix(sample_counts), Matrix(scores));
}

/// Regression of the contrastive head onto the closed-form targets, over the
/// full row (implicit zeros included).
inline LossValue nce_loss(const Matrix& targets, const Matrix& scores) {
  return detail::squared_error(targets, scores, "nce_loss");
}

inline LossValue nce_loss(const RowVector& targets, const RowVector& scores) {
  return nce_loss(Matrix(targets), Matrix(scores));
}

struct NceConfig {
  double beta = 1.0;
};

/// Closed-form targets on the train sparsity pattern. The value of a stored
/// entry depends only on its item, so one value per item is kept.
class NceTargetMatrix {
 public:
  NceTargetMatrix() = default;
  NceTargetMatrix(InteractionMatrix pattern, std::vector<double> item_targets)
      : pattern_(std::move(pattern)), item_targets_(std::move(item_targets)) {}

  const InteractionMatrix& pattern() const { return pattern_; }
  std::span<const double> item_targets() const { return item_targets_; }
  double target(Index j) const { return item_targets_.at(static_cast<std::size_t>(j)); }

  /// Dense target rows for a batch of users.
  Matrix dense_rows(std::span<const Index> users) const {
    Matrix out = Matrix::Zero(static_cast<Index>(users.size()), pattern_.items());
    for (std::size_t b = 0; b < users.size(); ++b) {
      for (auto j : pattern_.row(users[b])) {
        out(static_cast<Index>(b), j) = item_targets_[static_cast<std::size_t>(j)];
      }
    }
    return out;
  }

 private:
  InteractionMatrix pattern_;
  std::vector<double> item_targets_;
};

/// r*_j = max(log T - beta * log count_j, 0) for every observed entry.
/// Items that never occur in `train` get a target of 0 (never materialised).
inline NceTargetMatrix nce_targets(const PopularityProfile& profile, const NceConfig& config,
                                   const InteractionMatrix& train) {
  if (!(config.beta > 0.0) || !std::isfinite(config.beta)) {
    throw UsageError("nce beta must be positive");
  }
  if (profile.items() != train.items()) {
    throw DataError("nce_targets: profile and train matrix disagree on item count");
  }
  if (profile.total <= 0) throw DataError("nce_targets: empty popularity profile");
  const auto train_counts = train.column_counts();
  const double log_total = std::log(static_cast<double>(profile.total));
  std::vector<double> targets(profile.counts.size(), 0.0);
  for (std::size_t j = 0; j < targets.size(); ++j) {
    if (train_counts[j] == 0) continue;
    if (profile.counts[j] <= 0) {
      throw DataError("nce_targets: item " + std::to_string(j) +
                      " is observed in train but has zero popularity");
    }
    const double t = log_total - config.beta * std::log(static_cast<double>(profile.counts[j]));
    targets[j] = t > 0.0 ? t : 0.0;
  }
  return {train, std::move(targets)};
}

inline void write_nce_targets(std::ostream& out, const NceTargetMatrix& targets) {
  out << "item\ttarget\n";
  char buf[64];
  const auto values = targets.item_targets();
  for (std::size_t j = 0; j < values.size(); ++j) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, values[j]);
    (void)ec;
    out << j << '\t' << std::string_view(buf, static_cast<std::size_t>(end - buf)) << '\n';
  }
}

namespace detail {

inline double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

}  // namespace detail

/// Numerically maximises log sigma(x) + p * log sigma(-x) by golden-section
/// search on [-30, 30]. Independent check on the closed-form target log(1/p).
inline double nce_scalar_oracle(double p, double tolerance = 1e-8) {
  if (!(p > 0.0 && p < 1.0)) throw UsageError("nce_scalar_oracle: p must lie in (0, 1)");
  auto g = [p](double x) { return detail::log_sigmoid(x) + p * detail::log_sigmoid(-x); };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = -30.0, hi = 30.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double ga = g(a), gb = g(b);
  while (hi - lo > tolerance) {
    if (ga < gb) {
      lo = a;
      a = b;
      ga = gb;
      b = lo + inv_phi * (hi - lo);
      gb = g(b);
    } else {
      hi = b;
      b = a;
      gb = ga;
      a = hi - inv_phi * (hi - lo);
      ga = g(a);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace ocf
