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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ocf/common.hpp"
#include "ocf/evaluator.hpp"
#include "ocf/interaction_store.hpp"
#include "ocf/network.hpp"
#include "ocf/objectives.hpp"
#include "ocf/sampler.hpp"

namespace ocf {

enum class TrainMode { kJoint, kAlternating, kLimitedFineTune, kFullFineTune };

inline std::string_view to_string(TrainMode m) {
  switch (m) {
    case TrainMode::kJoint: return "JOINT";
    case TrainMode::kAlternating: return "ALTERNATING";
    case TrainMode::kLimitedFineTune: return "LIMITED_FINE_TUNE";
    case TrainMode::kFullFineTune: return "FULL_FINE_TUNE";
  }
  return "?";
}

inline TrainMode parse_train_mode(std::string_view s) {
  if (s == "JOINT") return TrainMode::kJoint;
  if (s == "ALTERNATING") return TrainMode::kAlternating;
  if (s == "LIMITED_FINE_TUNE") return TrainMode::kLimitedFineTune;
  if (s == "FULL_FINE_TUNE") return TrainMode::kFullFineTune;
  throw UsageError("unknown training mode '" + std::string(s) + "'");
}

inline bool is_two_phase(TrainMode m) {
  return m == TrainMode::kLimitedFineTune || m == TrainMode::kFullFineTune;
}

struct TrainConfig {
  ModelKind kind = ModelKind::kAutoRec;
  TrainMode mode = TrainMode::kJoint;
  Index latent_dim = 50;
  double lambda = 1e-5;
  double beta = 1.0;
  std::optional<std::int64_t> negatives;  // required for OHNS and NS
  double learning_rate = 1e-3;
  Index batch_size = 256;
  int max_epochs = 300;
  int patience = 5;
  std::uint64_t seed = 0;
  double clip_norm = 5.0;  // <= 0 disables clipping
  bool resample_each_epoch = false;
  Index validation_users = 2000;
  std::optional<double> init_scale;
};

inline void validate(const TrainConfig& c) {
  if (c.latent_dim < 1) throw UsageError("latent_dim must be positive");
  if (!(c.lambda >= 0.0)) throw UsageError("lambda must be nonnegative");
  if (!(c.beta > 0.0)) throw UsageError("beta must be positive");
  if (!(c.learning_rate > 0.0)) throw UsageError("learning_rate must be positive");
  if (c.batch_size < 1) throw UsageError("batch_size must be positive");
  if (c.max_epochs < 1) throw UsageError("max_epochs must be positive");
  if (c.patience < 1) throw UsageError("patience must be positive");
  if (c.validation_users < 1) throw UsageError("validation_users must be positive");
  if ((c.kind == ModelKind::kNs || c.kind == ModelKind::kOhns) && !c.negatives) {
    throw UsageError("model kind " + std::string(to_string(c.kind)) +
                     " requires the number of negative samples N");
  }
  if (c.negatives && *c.negatives < 1) throw UsageError("negatives must be at least 1");
}

struct EpochRecord {
  int epoch = 0;  // strictly increasing across phases
  int phase = 1;
  double mse_loss = std::numeric_limits<double>::quiet_NaN();
  double contrast_loss = std::numeric_limits<double>::quiet_NaN();
  double val_ndcg = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
};

struct PhaseRecord {
  std::string name;
  int epochs = 0;
  double seconds = 0.0;
  Index forward_passes = 0;
  bool converged = false;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::vector<PhaseRecord> phases;
  int stopped_epoch = 0;
  int phase_boundary = -1;  // last epoch of phase 1 for two-phase modes
  bool converged = false;
  double best_val_ndcg = std::numeric_limits<double>::quiet_NaN();

  double total_seconds() const {
    double s = 0.0;
    for (const auto& p : phases) s += p.seconds;
    return s;
  }
  Index forward_passes() const {
    Index f = 0;
    for (const auto& p : phases) f += p.forward_passes;
    return f;
  }
};

struct TrainResult {
  TwoHeadedModel model;
  TrainReport report;
  std::optional<LayerParams> phase1_encoder;  // two-phase modes: encoder entering phase 2
};

/// Adaptive-moment optimizer with one moment pair per parameter tensor.
class Adam {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  explicit Adam(const TwoHeadedModel& model, double learning_rate)
      : lr_(learning_rate), m_(GradientSet::zeros_like(model)), v_(GradientSet::zeros_like(model)) {}

  struct Mask {
    bool encoder = true;
    bool mse = true;
    bool contrast = true;
  };

  /// Updates only the tensors selected by `mask`; the others, and their
  /// moments, are left untouched.
  void step(TwoHeadedModel& model, const GradientSet& g, Mask mask) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    auto update = [&](LayerParams& p, const LayerParams& grad, LayerParams& m, LayerParams& v) {
      m.weights = kBeta1 * m.weights + (1.0 - kBeta1) * grad.weights;
      v.weights = kBeta2 * v.weights + (1.0 - kBeta2) * grad.weights.cwiseAbs2();
      p.weights.array() -= lr_ * (m.weights.array() / c1) /
                           ((v.weights.array() / c2).sqrt() + kEpsilon);
      m.bias = kBeta1 * m.bias + (1.0 - kBeta1) * grad.bias;
      v.bias = kBeta2 * v.bias + (1.0 - kBeta2) * grad.bias.cwiseAbs2();
      p.bias.array() -= lr_ * (m.bias.array() / c1) / ((v.bias.array() / c2).sqrt() + kEpsilon);
    };
    if (mask.encoder) update(model.encoder, g.encoder, m_.encoder, v_.encoder);
    if (mask.mse && model.mse_head) update(*model.mse_head, *g.mse_head, *m_.mse_head, *v_.mse_head);
    if (mask.contrast && model.contrast_head) {
      update(*model.contrast_head, *g.contrast_head, *m_.contrast_head, *v_.contrast_head);
    }
  }

 private:
  double lr_;
  std::int64_t t_ = 0;
  GradientSet m_;
  GradientSet v_;
};

/// What the contrastive head is trained against.
using ContrastData = std::variant<std::monostate, const SampleCountMatrix*, const NceTargetMatrix*>;

namespace detail {

struct PhaseSpec {
  std::string name;
  bool use_mse = false;
  bool use_contrast = false;
  bool alternating = false;  // contrast step then MSE step per batch
  Adam::Mask params;
  Head validation_head = Head::kMse;
};

inline double global_norm(const GradientSet& g, Adam::Mask mask) {
  double s = 0.0;
  if (mask.encoder) s += g.encoder.weights.squaredNorm() + g.encoder.bias.squaredNorm();
  if (mask.mse && g.mse_head) s += g.mse_head->weights.squaredNorm() + g.mse_head->bias.squaredNorm();
  if (mask.contrast && g.contrast_head) {
    s += g.contrast_head->weights.squaredNorm() + g.contrast_head->bias.squaredNorm();
  }
  return std::sqrt(s);
}

inline void scale(GradientSet& g, double factor) {
  g.for_each([factor](LayerParams& p) {
    p.weights *= factor;
    p.bias *= factor;
  });
}

inline bool all_finite(const TwoHeadedModel& m) {
  auto ok = [](const LayerParams& p) { return p.weights.allFinite() && p.bias.allFinite(); };
  return ok(m.encoder) && (!m.mse_head || ok(*m.mse_head)) &&
         (!m.contrast_head || ok(*m.contrast_head));
}

class PhaseRunner {
 public:
  PhaseRunner(const InteractionMatrix& train, const InteractionMatrix& validation,
              const TrainConfig& config, ContrastData contrast)
      : train_(train), validation_(validation), config_(config), contrast_(contrast) {
    active_users_ = train.nonempty_users();
    if (active_users_.empty()) throw DataError("training split is empty");
    auto candidates = evaluable_users(train, validation);
    if (static_cast<Index>(candidates.size()) > config.validation_users) {
      std::mt19937_64 rng(derive_seed(config.seed, 0xE7A1));
      for (std::size_t k = 0; k < static_cast<std::size_t>(config.validation_users); ++k) {
        std::swap(candidates[k], candidates[k + uniform_below(rng, candidates.size() - k)]);
      }
      candidates.resize(static_cast<std::size_t>(config.validation_users));
      std::sort(candidates.begin(), candidates.end());
    }
    validation_users_ = std::move(candidates);
    if (auto s = std::get_if<const SampleCountMatrix*>(&contrast_)) samples_ = *s;
  }

  void run(TwoHeadedModel& model, const PhaseSpec& spec, int phase_index, TrainReport& report) {
    using Clock = std::chrono::steady_clock;
    const auto phase_start = Clock::now();
    PhaseRecord rec{spec.name, 0, 0.0, 0, false};
    adam_.reset();
    double best = -std::numeric_limits<double>::infinity();
    TwoHeadedModel best_model = model;
    int since_best = 0;
    const bool validate = !validation_users_.empty();

    for (int e = 0; e < config_.max_epochs; ++e) {
      const auto epoch_start = Clock::now();
      const int global_epoch = report.epochs.empty() ? 1 : report.epochs.back().epoch + 1;
      if (config_.resample_each_epoch && samples_ != nullptr && global_epoch > 1) {
        const auto profile = popularity(train_);
        resampled_ = draw_counts(build_sampler(profile, derive_seed(config_.seed, 0x5A3B0000ULL + global_epoch)),
                                 samples_->per_user(), train_);
        samples_ = &*resampled_;
      }
      EpochRecord er;
      er.epoch = global_epoch;
      er.phase = phase_index;
      auto [mse, con] = run_epoch(model, spec, global_epoch, rec);
      if (spec.use_mse) er.mse_loss = mse;
      if (spec.use_contrast) er.contrast_loss = con;
      ++rec.epochs;
      if (validate) {
        er.val_ndcg = mean_ndcg(model, train_, validation_, validation_users_, spec.validation_head);
        rec.forward_passes += static_cast<Index>(validation_users_.size());
      }
      er.seconds = std::chrono::duration<double>(Clock::now() - epoch_start).count();
      report.epochs.push_back(er);
      if (validate) {
        if (er.val_ndcg > best) {
          best = er.val_ndcg;
          best_model = model;
          since_best = 0;
        } else if (++since_best >= config_.patience) {
          rec.converged = true;
          break;
        }
      }
    }
    if (validate) {
      model = std::move(best_model);
      report.best_val_ndcg = best;
    }
    rec.seconds = std::chrono::duration<double>(Clock::now() - phase_start).count();
    report.phases.push_back(rec);
    report.stopped_epoch = report.epochs.back().epoch;
  }

 private:
  Matrix contrast_target(std::span<const Index> batch) const {
    if (auto t = std::get_if<const NceTargetMatrix*>(&contrast_)) return (*t)->dense_rows(batch);
    return samples_->dense_rows(batch);
  }

  /// One update over `batch`. Returns (mse loss, contrastive loss) before the step.
  std::pair<double, double> step(TwoHeadedModel& model, const Matrix& x,
                                 std::span<const Index> batch, bool use_mse, bool use_contrast,
                                 Adam::Mask mask, PhaseRecord& rec) {
    const ForwardCache cache = forward(model, x);
    ++rec.forward_passes;
    ScoreGradients upstream;
    double mse_value = 0.0, con_value = 0.0;
    if (use_mse) {
      auto l = mse_loss(x, *cache.mse_scores);
      mse_value = l.value;
      upstream.mse = std::move(l.gradient);
    }
    if (use_contrast) {
      const Matrix target = contrast_target(batch);
      LossValue l = std::holds_alternative<const NceTargetMatrix*>(contrast_)
                        ? nce_loss(target, *cache.contrast_scores)
                        : ns_loss(x, target, *cache.contrast_scores);
      con_value = l.value;
      upstream.contrast = std::move(l.gradient);
    }
    GradientSet g = backward(model, cache, upstream, !mask.encoder);
    if (config_.lambda > 0.0) g += l2_penalty(model, config_.lambda).gradient;
    if (config_.clip_norm > 0.0) {
      const double norm = global_norm(g, mask);
      if (norm > config_.clip_norm) scale(g, config_.clip_norm / norm);
    }
    optimizer(model).step(model, g, mask);
    if (!std::isfinite(mse_value) || !std::isfinite(con_value) || !all_finite(model)) {
      throw DivergenceError("training diverged: non-finite loss or parameters");
    }
    return {mse_value, con_value};
  }

  std::pair<double, double> run_epoch(TwoHeadedModel& model, const PhaseSpec& spec, int epoch,
                                      PhaseRecord& rec) {
    std::vector<Index> order = active_users_;
    std::mt19937_64 rng(derive_seed(config_.seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[uniform_below(rng, k)]);
    double mse_total = 0.0, con_total = 0.0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(config_.batch_size)) {
      const auto end = std::min(order.size(), b + static_cast<std::size_t>(config_.batch_size));
      const std::span<const Index> batch(order.data() + b, end - b);
      const Matrix x = train_.dense_rows(batch);
      if (spec.alternating) {
        Adam::Mask contrast_mask{spec.params.encoder, false, true};
        Adam::Mask mse_mask{spec.params.encoder, true, false};
        con_total += step(model, x, batch, false, true, contrast_mask, rec).second;
        mse_total += step(model, x, batch, true, false, mse_mask, rec).first;
      } else {
        auto [m, c] = step(model, x, batch, spec.use_mse, spec.use_contrast,
                           spec.params, rec);
        mse_total += m;
        con_total += c;
      }
    }
    return {mse_total, con_total};
  }

  Adam& optimizer(const TwoHeadedModel& model) {
    if (!adam_) adam_.emplace(model, config_.learning_rate);
    return *adam_;
  }

  const InteractionMatrix& train_;
  const InteractionMatrix& validation_;
  const TrainConfig& config_;
  ContrastData contrast_;
  const SampleCountMatrix* samples_ = nullptr;
  std::optional<SampleCountMatrix> resampled_;
  std::vector<Index> active_users_;
  std::vector<Index> validation_users_;
  std::optional<Adam> adam_;
};

inline void check_ns_bounded(const TrainConfig& config) {
  if (!(config.lambda > 0.0) || !(config.clip_norm > 0.0)) {
    throw DivergenceError(
        "negative-sampling objective is unbounded below: it needs lambda > 0 and "
        "gradient clipping enabled");
  }
}

inline TwoHeadedModel fresh_model(const InteractionMatrix& train, const TrainConfig& config) {
  return init_model(config.kind, train.items(), config.latent_dim, derive_seed(config.seed, 0x1A17),
                    config.init_scale);
}

}  // namespace detail

/// Plain AutoRec: MSE reconstruction plus L2, early-stopped on validation NDCG.
inline TrainResult train_autorec(const InteractionMatrix& train, const InteractionMatrix& validation,
                                 TrainConfig config) {
  config.kind = ModelKind::kAutoRec;
  validate(config);
  TrainResult out{detail::fresh_model(train, config), {}};
  detail::PhaseRunner runner(train, validation, config, std::monostate{});
  runner.run(out.model, {"mse", true, false, false, {true, true, false}, Head::kMse}, 1, out.report);
  out.report.converged = out.report.phases.back().converged;
  return out;
}

/// One-headed negative-sampling AutoRec; ranks with its only head.
inline TrainResult train_ohns(const InteractionMatrix& train, const InteractionMatrix& validation,
                              const SampleCountMatrix* samples, TrainConfig config) {
  config.kind = ModelKind::kOhns;
  if (samples == nullptr) throw UsageError("OHNS training needs a negative-sample matrix");
  if (!config.negatives) config.negatives = samples->per_user();
  validate(config);
  if (samples->users() != train.users() || samples->items() != train.items()) {
    throw DataError("negative-sample matrix does not match the training split");
  }
  detail::check_ns_bounded(config);
  TrainResult out{detail::fresh_model(train, config), {}};
  detail::PhaseRunner runner(train, validation, config, samples);
  runner.run(out.model, {"ns", false, true, false, {true, false, true}, Head::kContrast}, 1,
             out.report);
  out.report.converged = out.report.phases.back().converged;
  return out;
}

/// NS-AutoRec (contrast = sample counts) or NCE-AutoRec (contrast = closed-
/// form targets) under one of the four schedules. Recommendations are
/// always served from the MSE head.
inline TrainResult train_two_headed(ModelKind kind, const InteractionMatrix& train,
                                    const InteractionMatrix& validation, TrainConfig config,
                                    ContrastData contrast) {
  if (kind != ModelKind::kNs && kind != ModelKind::kNce) {
    throw UsageError("train_two_headed expects kind NS or NCE");
  }
  config.kind = kind;
  if (kind == ModelKind::kNs) {
    auto s = std::get_if<const SampleCountMatrix*>(&contrast);
    if (s == nullptr || *s == nullptr) throw UsageError("NS-AutoRec needs a negative-sample matrix");
    if (!config.negatives) config.negatives = (*s)->per_user();
    if ((*s)->users() != train.users() || (*s)->items() != train.items()) {
      throw DataError("negative-sample matrix does not match the training split");
    }
    detail::check_ns_bounded(config);
  } else {
    auto t = std::get_if<const NceTargetMatrix*>(&contrast);
    if (t == nullptr || *t == nullptr) throw UsageError("NCE-AutoRec needs an NCE target matrix");
    if ((*t)->pattern().users() != train.users() || (*t)->pattern().items() != train.items()) {
      throw DataError("NCE targets do not match the training split");
    }
  }
  validate(config);
  TrainResult out{detail::fresh_model(train, config), {}};
  detail::PhaseRunner runner(train, validation, config, contrast);
  const std::string cname = kind == ModelKind::kNs ? "ns" : "nce";
  switch (config.mode) {
    case TrainMode::kJoint:
      runner.run(out.model, {"joint", true, true, false, {true, true, true}, Head::kMse}, 1, out.report);
      break;
    case TrainMode::kAlternating:
      runner.run(out.model, {"alternating", true, true, true, {true, true, true}, Head::kMse}, 1,
                 out.report);
      break;
    case TrainMode::kLimitedFineTune:
    case TrainMode::kFullFineTune: {
      runner.run(out.model, {cname, false, true, false, {true, false, true}, Head::kContrast}, 1,
                 out.report);
      out.report.phase_boundary = out.report.epochs.back().epoch;
      out.phase1_encoder = out.model.encoder;
      const bool full = config.mode == TrainMode::kFullFineTune;
      runner.run(out.model,
                 {full ? "mse_full" : "mse_limited", true, false, false, {full, true, false}, Head::kMse},
                 2, out.report);
      break;
    }
  }
  out.report.converged = out.report.phases.back().converged;
  return out;
}

/// Builds the popularity-derived artifacts a kind needs and trains it.
inline TrainResult train_model(const InteractionMatrix& train, const InteractionMatrix& validation,
                               const TrainConfig& config, int threads = 1) {
  validate(config);
  switch (config.kind) {
    case ModelKind::kAutoRec:
      return train_autorec(train, validation, config);
    case ModelKind::kOhns:
    case ModelKind::kNs: {
      const auto profile = popularity(train);
      const auto samples = draw_counts(build_sampler(profile, derive_seed(config.seed, 0x5A3B)),
                                       *config.negatives, train, threads);
      return config.kind == ModelKind::kOhns
                 ? train_ohns(train, validation, &samples, config)
                 : train_two_headed(ModelKind::kNs, train, validation, config, &samples);
    }
    case ModelKind::kNce: {
      const auto profile = popularity(train);
      const auto targets = nce_targets(profile, NceConfig{config.beta}, train);
      return train_two_headed(ModelKind::kNce, train, validation, config, &targets);
    }
  }
  throw UsageError("unknown model kind");
}

inline void write_train_report(std::ostream& out, const TrainReport& r) {
  out << "# stopped_epoch=" << r.stopped_epoch << " converged=" << (r.converged ? 1 : 0)
      << " phase_boundary=" << r.phase_boundary;
  for (const auto& p : r.phases) {
    out << " phase_" << p.name << "_seconds=" << detail::format_real(p.seconds) << " phase_" << p.name
        << "_epochs=" << p.epochs << " phase_" << p.name << "_forward_passes=" << p.forward_passes;
  }
  out << '\n';
  out << "epoch\tphase\tmse_loss\tcontrast_loss\tval_ndcg\tseconds\n";
  auto real = [](double v) { return std::isnan(v) ? std::string("NA") : detail::format_real(v); };
  for (const auto& e : r.epochs) {
    out << e.epoch << '\t' << e.phase << '\t' << real(e.mse_loss) << '\t' << real(e.contrast_loss)
        << '\t' << real(e.val_ndcg) << '\t' << real(e.seconds) << '\n';
  }
}

/// Hyperparameter lattice: the cross product of the listed values applied to
/// `base`, enumerated with latent_dim outermost, then lambda, beta,
/// negatives, and mode innermost. Empty lists keep the base value.
struct GridSpace {
  TrainConfig base;
  std::vector<Index> latent_dims;
  std::vector<double> lambdas;
  std::vector<double> betas;
  std::vector<std::int64_t> negatives;
  std::vector<TrainMode> modes;

  std::vector<TrainConfig> enumerate() const {
    auto or_base = [](const auto& v, auto b) {
      using T = std::decay_t<decltype(b)>;
      return v.empty() ? std::vector<T>{b} : std::vector<T>(v.begin(), v.end());
    };
    std::vector<TrainConfig> out;
    for (Index r : or_base(latent_dims, base.latent_dim)) {
      for (double l : or_base(lambdas, base.lambda)) {
        for (double b : or_base(betas, base.beta)) {
          for (auto n : or_base(negatives, base.negatives.value_or(0))) {
            for (TrainMode m : or_base(modes, base.mode)) {
              TrainConfig c = base;
              c.latent_dim = r;
              c.lambda = l;
              c.beta = b;
              if (n > 0) c.negatives = n;
              c.mode = m;
              out.push_back(c);
            }
          }
        }
      }
    }
    return out;
  }
};

struct GridRow {
  std::size_t index = 0;
  TrainConfig config;
  double metric = 0.0;
  double seconds = 0.0;
};

struct GridResult {
  TrainConfig best;
  std::size_t best_index = 0;
  std::vector<GridRow> rows;
};

using GridObjective = std::function<double(const TrainConfig&)>;

/// Exhaustive search maximising `objective`. Ties go to the smaller latent
/// dimension, then the smaller lambda, then the earlier lattice point. Rows
/// already in `completed` (matched by lattice index) are not re-run.
inline GridResult grid_search(const GridSpace& space, const GridObjective& objective,
                              const std::vector<GridRow>& completed = {},
                              const std::function<void(const GridRow&)>& on_row = {}) {
  const auto lattice = space.enumerate();
  if (lattice.empty()) throw UsageError("empty hyperparameter lattice");
  GridResult result;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    auto done = std::find_if(completed.begin(), completed.end(),
                             [i](const GridRow& r) { return r.index == i; });
    if (done != completed.end()) {
      GridRow row = *done;
      row.config = lattice[i];
      result.rows.push_back(row);
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    GridRow row{i, lattice[i], objective(lattice[i]), 0.0};
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_row) on_row(row);
    result.rows.push_back(row);
  }
  const GridRow* best = &result.rows.front();
  for (const auto& row : result.rows) {
    const bool better =
        row.metric > best->metric ||
        (row.metric == best->metric &&
         (row.config.latent_dim < best->config.latent_dim ||
          (row.config.latent_dim == best->config.latent_dim && row.config.lambda < best->config.lambda)));
    if (better) best = &row;
  }
  result.best = best->config;
  result.best_index = best->index;
  return result;
}

/// Default grid objective: train, then NDCG over every validation user.
inline GridObjective validation_ndcg_objective(const InteractionMatrix& train,
                                               const InteractionMatrix& validation, int threads = 1) {
  return [&train, &validation, threads](const TrainConfig& c) {
    const auto result = train_model(train, validation, c, threads);
    const auto users = evaluable_users(train, validation);
    return mean_ndcg(result.model, train, validation, users, std::nullopt, threads);
  };
}

}  // namespace ocf
