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

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>

#include "ocf/common.hpp"

namespace ocf {

enum class ModelKind : std::uint32_t { kAutoRec = 0, kOhns = 1, kNs = 2, kNce = 3 };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kAutoRec: return "AUTOREC";
    case ModelKind::kOhns: return "OHNS";
    case ModelKind::kNs: return "NS";
    case ModelKind::kNce: return "NCE";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "AUTOREC" || s == "autorec") return ModelKind::kAutoRec;
  if (s == "OHNS" || s == "ohns") return ModelKind::kOhns;
  if (s == "NS" || s == "ns") return ModelKind::kNs;
  if (s == "NCE" || s == "nce") return ModelKind::kNce;
  throw UsageError("unknown model kind '" + std::string(s) + "'");
}

inline bool has_contrast_head(ModelKind k) { return k != ModelKind::kAutoRec; }
inline bool has_mse_head(ModelKind k) { return k != ModelKind::kOhns; }

/// Affine layer: y = W x + b, with W stored output_dim x input_dim.
struct LayerParams {
  Matrix weights;
  RowVector bias;

  static LayerParams zeros(Index out, Index in) {
    return {Matrix::Zero(out, in), RowVector::Zero(out)};
  }
  Index output_dim() const { return weights.rows(); }
  Index input_dim() const { return weights.cols(); }
  bool same_shape(const LayerParams& o) const {
    return weights.rows() == o.weights.rows() && weights.cols() == o.weights.cols() &&
           bias.size() == o.bias.size();
  }
  bool operator==(const LayerParams& o) const {
    return same_shape(o) && weights == o.weights && bias == o.bias;
  }
};

/// ReLU encoder (n -> r) feeding an MSE head and/or a contrastive head
/// (both r -> n, linear). AUTOREC has only the MSE head, OHNS only the
/// contrastive head, NS and NCE both.
struct TwoHeadedModel {
  ModelKind kind = ModelKind::kAutoRec;
  Index items = 0;
  Index latent_dim = 0;
  LayerParams encoder;
  std::optional<LayerParams> mse_head;
  std::optional<LayerParams> contrast_head;
  std::uint64_t item_digest = 0;  // 0 when not bound to a vocabulary

  /// The head that serves recommendations.
  const LayerParams& serving_head() const { return mse_head ? *mse_head : *contrast_head; }

  bool operator==(const TwoHeadedModel&) const = default;
};

enum class Head { kMse, kContrast };

inline void validate(const TwoHeadedModel& m) {
  auto fail = [](const char* what) { throw DataError(std::string("inconsistent model: ") + what); };
  if (m.items < 1 || m.latent_dim < 1) fail("nonpositive dimensions");
  if (m.encoder.weights.rows() != m.latent_dim || m.encoder.weights.cols() != m.items ||
      m.encoder.bias.size() != m.latent_dim) {
    fail("encoder shape");
  }
  if (m.mse_head.has_value() != has_mse_head(m.kind)) fail("mse head presence");
  if (m.contrast_head.has_value() != has_contrast_head(m.kind)) fail("contrast head presence");
  for (const auto* h : {m.mse_head ? &*m.mse_head : nullptr, m.contrast_head ? &*m.contrast_head : nullptr}) {
    if (h == nullptr) continue;
    if (h->weights.rows() != m.items || h->weights.cols() != m.latent_dim ||
        h->bias.size() != m.items) {
      fail("head shape");
    }
  }
}

inline double default_init_scale(Index n, Index r) {
  return std::sqrt(6.0 / static_cast<double>(n + r));
}

/// Weights i.i.d. uniform in [-scale, scale], biases zero. Tensors are filled
/// in the order encoder, MSE head, contrastive head from one seeded stream.
inline TwoHeadedModel init_model(ModelKind kind, Index n, Index r, std::uint64_t seed,
                                 std::optional<double> scale = std::nullopt) {
  if (n < 1 || r < 1) throw UsageError("model dimensions must be positive");
  const double s = scale.value_or(default_init_scale(n, r));
  if (!(s >= 0.0) || !std::isfinite(s)) throw UsageError("init scale must be finite and >= 0");
  std::mt19937_64 rng(seed);
  auto fill = [&](Index out, Index in) {
    LayerParams p = LayerParams::zeros(out, in);
    for (Index i = 0; i < out; ++i) {
      for (Index j = 0; j < in; ++j) p.weights(i, j) = (2.0 * uniform_unit(rng) - 1.0) * s;
    }
    return p;
  };
  TwoHeadedModel m;
  m.kind = kind;
  m.items = n;
  m.latent_dim = r;
  m.encoder = fill(r, n);
  if (has_mse_head(kind)) m.mse_head = fill(n, r);
  if (has_contrast_head(kind)) m.contrast_head = fill(n, r);
  return m;
}

/// Activations of one forward pass over a batch (one row per user).
struct ForwardCache {
  Matrix input;
  Matrix pre_activation;
  Matrix latent;
  std::optional<Matrix> mse_scores;
  std::optional<Matrix> contrast_scores;
};

inline Matrix affine(const LayerParams& layer, const Matrix& x) {
  if (x.cols() != layer.input_dim()) throw DataError("dimension mismatch in affine layer");
  Matrix y = x * layer.weights.transpose();
  y.rowwise() += layer.bias;
  return y;
}

/// Latent code h = max(0, W x + b) for every row of `x`.
inline Matrix encode(const TwoHeadedModel& model, const Matrix& x) {
  return affine(model.encoder, x).cwiseMax(0.0);
}

inline RowVector encode(const TwoHeadedModel& model, const RowVector& x) {
  if (x.size() != model.items) throw DataError("encode: input length differs from item count");
  return encode(model, Matrix(x)).row(0);
}

inline Matrix decode(const LayerParams& head, const Matrix& h) { return affine(head, h); }

inline RowVector decode(const LayerParams& head, const RowVector& h) {
  if (h.size() != head.input_dim()) throw DataError("decode: latent length mismatch");
  return affine(head, Matrix(h)).row(0);
}

inline ForwardCache forward(const TwoHeadedModel& model, const Matrix& x) {
  if (x.cols() != model.items) throw DataError("forward: input width differs from item count");
  ForwardCache c;
  c.input = x;
  c.pre_activation = affine(model.encoder, x);
  c.latent = c.pre_activation.cwiseMax(0.0);
  if (model.mse_head) c.mse_scores = decode(*model.mse_head, c.latent);
  if (model.contrast_head) c.contrast_scores = decode(*model.contrast_head, c.latent);
  return c;
}

/// Scores from one head for a batch.
inline Matrix scores(const TwoHeadedModel& model, const Matrix& x, Head head) {
  const auto& h = head == Head::kMse ? model.mse_head : model.contrast_head;
  if (!h) throw UsageError("model has no such head");
  return decode(*h, encode(model, x));
}

/// Same layout as the model's parameters.
struct GradientSet {
  LayerParams encoder;
  std::optional<LayerParams> mse_head;
  std::optional<LayerParams> contrast_head;

  static GradientSet zeros_like(const TwoHeadedModel& m) {
    GradientSet g;
    g.encoder = LayerParams::zeros(m.latent_dim, m.items);
    if (m.mse_head) g.mse_head = LayerParams::zeros(m.items, m.latent_dim);
    if (m.contrast_head) g.contrast_head = LayerParams::zeros(m.items, m.latent_dim);
    return g;
  }

  template <class Fn>
  void for_each(Fn&& fn) {
    fn(encoder);
    if (mse_head) fn(*mse_head);
    if (contrast_head) fn(*contrast_head);
  }

  double squared_norm() const {
    double s = encoder.weights.squaredNorm() + encoder.bias.squaredNorm();
    for (const auto* h : {mse_head ? &*mse_head : nullptr, contrast_head ? &*contrast_head : nullptr}) {
      if (h) s += h->weights.squaredNorm() + h->bias.squaredNorm();
    }
    return s;
  }

  GradientSet& operator+=(const GradientSet& o) {
    auto add = [](LayerParams& a, const LayerParams& b) {
      if (!a.same_shape(b)) throw DataError("gradient shape mismatch");
      a.weights += b.weights;
      a.bias += b.bias;
    };
    add(encoder, o.encoder);
    if (mse_head.has_value() != o.mse_head.has_value() ||
        contrast_head.has_value() != o.contrast_head.has_value()) {
      throw DataError("gradient head layout mismatch");
    }
    if (mse_head) add(*mse_head, *o.mse_head);
    if (contrast_head) add(*contrast_head, *o.contrast_head);
    return *this;
  }
};

/// Upstream gradients d(loss)/d(scores) per head; absent heads contribute 0.
struct ScoreGradients {
  std::optional<Matrix> mse;
  std::optional<Matrix> contrast;
};

/// Chain rule through the linear heads and the ReLU encoder. With
/// `freeze_encoder` the encoder gradient is left at exactly zero.
inline GradientSet backward(const TwoHeadedModel& model, const ForwardCache& cache,
                            const ScoreGradients& upstream, bool freeze_encoder = false) {
  GradientSet g = GradientSet::zeros_like(model);
  const Index batch = cache.latent.rows();
  Matrix d_latent = Matrix::Zero(batch, model.latent_dim);
  auto head_pass = [&](const std::optional<LayerParams>& head, std::optional<LayerParams>& grad,
                       const std::optional<Matrix>& d_scores) {
    if (!d_scores) return;
    if (!head) throw DataError("backward: gradient supplied for a missing head");
    if (d_scores->rows() != batch || d_scores->cols() != model.items) {
      throw DataError("backward: score gradient shape mismatch");
    }
    grad->weights.noalias() = d_scores->transpose() * cache.latent;
    grad->bias = d_scores->colwise().sum();
    if (!freeze_encoder) d_latent.noalias() += *d_scores * head->weights;
  };
  head_pass(model.mse_head, g.mse_head, upstream.mse);
  head_pass(model.contrast_head, g.contrast_head, upstream.contrast);
  if (!freeze_encoder) {
    // ReLU subgradient at exactly 0 is 0.
    const Matrix d_pre = (cache.pre_activation.array() > 0.0).select(d_latent, 0.0);
    g.encoder.weights.noalias() = d_pre.transpose() * cache.input;
    g.encoder.bias = d_pre.colwise().sum();
  }
  return g;
}

struct PenaltyValue {
  double value = 0.0;
  GradientSet gradient;
};

/// lambda * sum of squared weight entries; biases are not penalised.
inline PenaltyValue l2_penalty(const TwoHeadedModel& model, double lambda) {
  if (!(lambda >= 0.0)) throw UsageError("L2 strength must be nonnegative");
  PenaltyValue out{0.0, GradientSet::zeros_like(model)};
  out.value = lambda * model.encoder.weights.squaredNorm();
  out.gradient.encoder.weights = 2.0 * lambda * model.encoder.weights;
  if (model.mse_head) {
    out.value += lambda * model.mse_head->weights.squaredNorm();
    out.gradient.mse_head->weights = 2.0 * lambda * model.mse_head->weights;
  }
  if (model.contrast_head) {
    out.value += lambda * model.contrast_head->weights.squaredNorm();
    out.gradient.contrast_head->weights = 2.0 * lambda * model.contrast_head->weights;
  }
  return out;
}

// Model snapshot, binary, version 1 (little-endian):
//   char[8] "OCFMODEL" | u32 version | u32 kind | i64 items | i64 latent_dim
//   | u64 item_digest | u8 has_mse | u8 has_contrast
//   | f64 tensors: encoder W, encoder b, [mse W, mse b], [contrast W, contrast b]
// Weight matrices are stored row-major.
inline constexpr char kModelMagic[8] = {'O', 'C', 'F', 'M', 'O', 'D', 'E', 'L'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes little-endian");

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw DataError("model snapshot truncated");
  return v;
}

inline void put_layer(std::ostream& out, const LayerParams& p) {
  out.write(reinterpret_cast<const char*>(p.weights.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(p.weights.size())));
  out.write(reinterpret_cast<const char*>(p.bias.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(p.bias.size())));
}

inline LayerParams get_layer(std::istream& in, Index out_dim, Index in_dim) {
  LayerParams p = LayerParams::zeros(out_dim, in_dim);
  auto read = [&](double* dst, Index count) {
    if (!in.read(reinterpret_cast<char*>(dst),
                 static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(count)))) {
      throw DataError("model snapshot truncated");
    }
  };
  read(p.weights.data(), p.weights.size());
  read(p.bias.data(), p.bias.size());
  return p;
}

}  // namespace detail

inline void write_model(std::ostream& out, const TwoHeadedModel& m) {
  validate(m);
  out.write(kModelMagic, sizeof kModelMagic);
  detail::put(out, kModelVersion);
  detail::put(out, static_cast<std::uint32_t>(m.kind));
  detail::put(out, static_cast<std::int64_t>(m.items));
  detail::put(out, static_cast<std::int64_t>(m.latent_dim));
  detail::put(out, m.item_digest);
  detail::put(out, static_cast<std::uint8_t>(m.mse_head.has_value()));
  detail::put(out, static_cast<std::uint8_t>(m.contrast_head.has_value()));
  detail::put_layer(out, m.encoder);
  if (m.mse_head) detail::put_layer(out, *m.mse_head);
  if (m.contrast_head) detail::put_layer(out, *m.contrast_head);
}

inline TwoHeadedModel read_model(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kModelMagic, sizeof magic) != 0) {
    throw DataError("not a model snapshot");
  }
  const auto version = detail::get<std::uint32_t>(in);
  if (version != kModelVersion) {
    throw DataError("unsupported model snapshot version " + std::to_string(version));
  }
  const auto kind = detail::get<std::uint32_t>(in);
  if (kind > static_cast<std::uint32_t>(ModelKind::kNce)) throw DataError("unknown model kind");
  TwoHeadedModel m;
  m.kind = static_cast<ModelKind>(kind);
  m.items = detail::get<std::int64_t>(in);
  m.latent_dim = detail::get<std::int64_t>(in);
  if (m.items < 1 || m.latent_dim < 1 || m.items > (1LL << 31) || m.latent_dim > (1LL << 20)) {
    throw DataError("model snapshot has invalid dimensions");
  }
  m.item_digest = detail::get<std::uint64_t>(in);
  const bool mse = detail::get<std::uint8_t>(in) != 0;
  const bool contrast = detail::get<std::uint8_t>(in) != 0;
  m.encoder = detail::get_layer(in, m.latent_dim, m.items);
  if (mse) m.mse_head = detail::get_layer(in, m.items, m.latent_dim);
  if (contrast) m.contrast_head = detail::get_layer(in, m.items, m.latent_dim);
  validate(m);
  return m;
}

}  // namespace ocf
