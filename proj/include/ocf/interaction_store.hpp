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
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ocf/common.hpp"

namespace ocf {

struct RatingRecord {
  std::string user_key;
  std::string item_key;
  double rating = 0.0;
  std::optional<std::int64_t> timestamp;
};

/// Dense, first-seen-order indices for user and item keys.
class IdVocabulary {
 public:
  Index add_user(const std::string& key) { return add(key, users_, user_index_); }
  Index add_item(const std::string& key) { return add(key, items_, item_index_); }

  std::optional<Index> user(const std::string& key) const { return find(key, user_index_); }
  std::optional<Index> item(const std::string& key) const { return find(key, item_index_); }

  const std::string& user_key(Index i) const { return users_.at(static_cast<std::size_t>(i)); }
  const std::string& item_key(Index j) const { return items_.at(static_cast<std::size_t>(j)); }

  Index user_count() const { return static_cast<Index>(users_.size()); }
  Index item_count() const { return static_cast<Index>(items_.size()); }

  const std::vector<std::string>& user_keys() const { return users_; }
  const std::vector<std::string>& item_keys() const { return items_; }

  /// Digest of the item key sequence; models record it so that a model can
  /// only be evaluated against data sharing its item indexing.
  std::uint64_t item_digest() const {
    Fnv1a h;
    for (const auto& k : items_) {
      h.update(k);
      h.update("\n");
    }
    return h.value();
  }

  bool operator==(const IdVocabulary& other) const {
    return users_ == other.users_ && items_ == other.items_;
  }

 private:
  using Map = std::unordered_map<std::string, Index>;

  static Index add(const std::string& key, std::vector<std::string>& keys, Map& index) {
    auto [it, inserted] = index.try_emplace(key, static_cast<Index>(keys.size()));
    if (inserted) keys.push_back(key);
    return it->second;
  }
  static std::optional<Index> find(const std::string& key, const Map& index) {
    auto it = index.find(key);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }

  std::vector<std::string> users_;
  std::vector<std::string> items_;
  Map user_index_;
  Map item_index_;
};

/// Sparse binary user x item matrix in CSR layout. Every stored entry is a 1.
class InteractionMatrix {
 public:
  using ItemId = std::int32_t;

  InteractionMatrix() = default;

  /// Empty m x n matrix.
  InteractionMatrix(Index m, Index n) : n_(n), offsets_(static_cast<std::size_t>(m) + 1, 0) {
    if (m < 0 || n < 0) throw DataError("negative matrix dimensions");
  }

  /// Builds from per-user item lists; rows are sorted and deduplicated.
  static InteractionMatrix from_rows(Index n, std::vector<std::vector<ItemId>> rows) {
    InteractionMatrix out(static_cast<Index>(rows.size()), n);
    std::size_t nnz = 0;
    for (auto& row : rows) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
      if (!row.empty() && (row.front() < 0 || row.back() >= n)) {
        throw DataError("item index out of range while building interaction matrix");
      }
      nnz += row.size();
    }
    out.items_.reserve(nnz);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.items_.insert(out.items_.end(), rows[i].begin(), rows[i].end());
      out.offsets_[i + 1] = static_cast<Index>(out.items_.size());
    }
    return out;
  }

  Index users() const { return offsets_.empty() ? 0 : static_cast<Index>(offsets_.size()) - 1; }
  Index items() const { return n_; }
  Index nnz() const { return static_cast<Index>(items_.size()); }

  std::span<const ItemId> row(Index i) const {
    const auto b = static_cast<std::size_t>(offsets_.at(static_cast<std::size_t>(i)));
    const auto e = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(i) + 1]);
    return {items_.data() + b, e - b};
  }
  Index row_size(Index i) const {
    return offsets_.at(static_cast<std::size_t>(i) + 1) - offsets_[static_cast<std::size_t>(i)];
  }
  bool contains(Index i, Index j) const {
    auto r = row(i);
    return std::binary_search(r.begin(), r.end(), static_cast<ItemId>(j));
  }

  /// Row i as a dense 0/1 vector of length n.
  RowVector dense_row(Index i) const {
    RowVector out = RowVector::Zero(n_);
    for (ItemId j : row(i)) out[j] = 1.0;
    return out;
  }

  /// Dense 0/1 block for the given users, one matrix row per user.
  Matrix dense_rows(std::span<const Index> users) const {
    Matrix out = Matrix::Zero(static_cast<Index>(users.size()), n_);
    for (std::size_t b = 0; b < users.size(); ++b) {
      for (ItemId j : row(users[b])) out(static_cast<Index>(b), j) = 1.0;
    }
    return out;
  }

  /// Per-item column sums.
  std::vector<std::int64_t> column_counts() const {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n_), 0);
    for (ItemId j : items_) ++counts[static_cast<std::size_t>(j)];
    return counts;
  }

  std::vector<Index> nonempty_users() const {
    std::vector<Index> out;
    for (Index i = 0; i < users(); ++i) {
      if (row_size(i) > 0) out.push_back(i);
    }
    return out;
  }

  bool operator==(const InteractionMatrix& other) const = default;

 private:
  Index n_ = 0;
  std::vector<Index> offsets_{0};
  std::vector<ItemId> items_;
};

struct DatasetSplit {
  InteractionMatrix train;
  InteractionMatrix validation;
  InteractionMatrix test;
};

struct SplitRatios {
  double train = 0.5;
  double validation = 0.2;
  double test = 0.3;
};

struct PopularityProfile {
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
  std::vector<double> probs;

  Index items() const { return static_cast<Index>(counts.size()); }
};

/// Column layout of a delimited rating file. Column indices are zero-based;
/// a negative timestamp column means the file carries no timestamps.
struct ColumnLayout {
  enum class Header { kAuto, kPresent, kAbsent };

  std::string delimiter;  // empty: detect from the first data line
  int user_column = 0;
  int item_column = 1;
  int rating_column = 2;
  int timestamp_column = 3;
  Header header = Header::kAuto;
};

namespace detail {

inline std::string detect_delimiter(std::string_view line) {
  if (line.find('\t') != std::string_view::npos) return "\t";
  if (line.find("::") != std::string_view::npos) return "::";
  if (line.find(',') != std::string_view::npos) return ",";
  if (line.find(';') != std::string_view::npos) return ";";
  return " ";
}

inline std::vector<std::string_view> split_fields(std::string_view line, std::string_view delim) {
  std::vector<std::string_view> out;
  if (delim == " ") {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ')) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ') ++j;
      out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + delim.size();
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '"' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline Index ceil_share(double ratio, Index k) {
  // The epsilon keeps products such as 0.2 * 15 from rounding up past 3.
  const double raw = std::ceil(ratio * static_cast<double>(k) - 1e-9);
  return std::clamp<Index>(static_cast<Index>(raw), 0, k);
}

}  // namespace detail

/// Parses delimited rating text. Vocabulary indices follow first appearance.
inline std::pair<std::vector<RatingRecord>, IdVocabulary> parse_ratings(std::istream& in,
                                                                       const ColumnLayout& layout) {
  std::vector<RatingRecord> records;
  IdVocabulary vocab;
  std::string delim = layout.delimiter;
  const int needed = std::max({layout.user_column, layout.item_column, layout.rating_column,
                               layout.timestamp_column}) + 1;
  std::string line;
  std::int64_t line_no = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (detail::trim(view).empty()) continue;
    if (delim.empty()) delim = detail::detect_delimiter(view);
    const auto fields = detail::split_fields(view, delim);
    const bool is_first = std::exchange(first_data_line, false);
    if (is_first && layout.header != ColumnLayout::Header::kAbsent) {
      const bool looks_like_header =
          static_cast<int>(fields.size()) > layout.rating_column &&
          !detail::parse_double(fields[static_cast<std::size_t>(layout.rating_column)]);
      if (layout.header == ColumnLayout::Header::kPresent || looks_like_header) continue;
    }
    if (static_cast<int>(fields.size()) < needed) {
      throw DataError("line " + std::to_string(line_no) + ": expected at least " +
                      std::to_string(needed) + " columns, found " + std::to_string(fields.size()));
    }
    RatingRecord rec;
    rec.user_key = std::string(detail::trim(fields[static_cast<std::size_t>(layout.user_column)]));
    rec.item_key = std::string(detail::trim(fields[static_cast<std::size_t>(layout.item_column)]));
    if (rec.user_key.empty() || rec.item_key.empty()) {
      throw DataError("line " + std::to_string(line_no) + ": empty user or item key");
    }
    auto rating = detail::parse_double(fields[static_cast<std::size_t>(layout.rating_column)]);
    if (!rating) {
      throw DataError("line " + std::to_string(line_no) + ": non-numeric rating '" +
                      std::string(fields[static_cast<std::size_t>(layout.rating_column)]) + "'");
    }
    if (!std::isfinite(*rating)) {
      throw DataError("line " + std::to_string(line_no) + ": rating is not finite");
    }
    rec.rating = *rating;
    if (layout.timestamp_column >= 0) {
      auto ts = detail::parse_int(fields[static_cast<std::size_t>(layout.timestamp_column)]);
      if (!ts || *ts < 0) {
        throw DataError("line " + std::to_string(line_no) + ": malformed timestamp");
      }
      rec.timestamp = *ts;
    }
    vocab.add_user(rec.user_key);
    vocab.add_item(rec.item_key);
    records.push_back(std::move(rec));
  }
  return {std::move(records), std::move(vocab)};
}

inline std::pair<std::vector<RatingRecord>, IdVocabulary> load_ratings(const std::string& path,
                                                                      const ColumnLayout& layout) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read rating file '" + path + "'");
  return parse_ratings(in, layout);
}

namespace detail {

/// Index of the record that decides each (user, item) pair: the one with the
/// latest timestamp, later file position winning ties and missing timestamps.
inline std::unordered_map<std::uint64_t, std::size_t> deciding_records(
    const std::vector<RatingRecord>& records, const IdVocabulary& vocab) {
  std::unordered_map<std::uint64_t, std::size_t> decided;
  decided.reserve(records.size());
  const auto n = static_cast<std::uint64_t>(vocab.item_count());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    auto u = vocab.user(rec.user_key);
    auto it = vocab.item(rec.item_key);
    if (!u || !it) throw DataError("record key missing from vocabulary");
    const std::uint64_t key = static_cast<std::uint64_t>(*u) * n + static_cast<std::uint64_t>(*it);
    auto [pos, inserted] = decided.try_emplace(key, r);
    if (!inserted) {
      const auto& prev = records[pos->second];
      const std::int64_t prev_ts = prev.timestamp.value_or(INT64_MIN);
      const std::int64_t cur_ts = rec.timestamp.value_or(INT64_MIN);
      if (cur_ts >= prev_ts) pos->second = r;
    }
  }
  return decided;
}

}  // namespace detail

/// Keeps (user, item) iff its deciding rating is at least eta.
inline InteractionMatrix binarize(const std::vector<RatingRecord>& records,
                                  const IdVocabulary& vocab, double eta) {
  if (!std::isfinite(eta)) throw UsageError("binarization threshold must be finite");
  const auto n = vocab.item_count();
  std::vector<std::vector<InteractionMatrix::ItemId>> rows(static_cast<std::size_t>(vocab.user_count()));
  for (const auto& [key, r] : detail::deciding_records(records, vocab)) {
    if (records[r].rating >= eta) {
      const auto u = static_cast<std::size_t>(key / static_cast<std::uint64_t>(n));
      rows[u].push_back(static_cast<InteractionMatrix::ItemId>(key % static_cast<std::uint64_t>(n)));
    }
  }
  return InteractionMatrix::from_rows(n, std::move(rows));
}

/// Per-user split sizes for k interactions: ceil for train, then ceil for
/// validation capped by what remains, remainder to test.
inline std::array<Index, 3> split_sizes(Index k, const SplitRatios& ratios) {
  const Index train = detail::ceil_share(ratios.train, k);
  const Index validation = std::min(detail::ceil_share(ratios.validation, k), k - train);
  return {train, validation, k - train - validation};
}

namespace detail {

inline void check_ratios(const SplitRatios& r) {
  if (r.train < 0 || r.validation < 0 || r.test < 0 ||
      std::abs(r.train + r.validation + r.test - 1.0) > 1e-9) {
    throw UsageError("split ratios must be nonnegative and sum to 1");
  }
}

/// Distributes each user's ordered row over train/validation/test.
template <class OrderFn>
DatasetSplit split_by_order(const InteractionMatrix& matrix, const SplitRatios& ratios,
                            OrderFn&& order_row) {
  check_ratios(ratios);
  const auto m = static_cast<std::size_t>(matrix.users());
  std::vector<std::vector<InteractionMatrix::ItemId>> tr(m), va(m), te(m);
  for (Index i = 0; i < matrix.users(); ++i) {
    auto row = matrix.row(i);
    std::vector<InteractionMatrix::ItemId> ordered(row.begin(), row.end());
    order_row(i, ordered);
    const auto [a, b, c] = split_sizes(static_cast<Index>(ordered.size()), ratios);
    const auto u = static_cast<std::size_t>(i);
    tr[u].assign(ordered.begin(), ordered.begin() + a);
    va[u].assign(ordered.begin() + a, ordered.begin() + a + b);
    te[u].assign(ordered.begin() + a + b, ordered.end());
    (void)c;
  }
  return {InteractionMatrix::from_rows(matrix.items(), std::move(tr)),
          InteractionMatrix::from_rows(matrix.items(), std::move(va)),
          InteractionMatrix::from_rows(matrix.items(), std::move(te))};
}

}  // namespace detail

/// Orders each user's interactions by the timestamp of their deciding record
/// (ties by ascending item index) and splits by the ceiling rule.
inline DatasetSplit split_temporal(const InteractionMatrix& matrix,
                                   const std::vector<RatingRecord>& records,
                                   const IdVocabulary& vocab, const SplitRatios& ratios = {}) {
  const auto n = static_cast<std::uint64_t>(vocab.item_count());
  if (static_cast<Index>(n) != matrix.items() || vocab.user_count() != matrix.users()) {
    throw DataError("vocabulary does not match interaction matrix shape");
  }
  std::unordered_map<std::uint64_t, std::int64_t> stamp;
  for (const auto& [key, r] : detail::deciding_records(records, vocab)) {
    if (!records[r].timestamp) continue;
    stamp.emplace(key, *records[r].timestamp);
  }
  return detail::split_by_order(matrix, ratios, [&](Index i, auto& row) {
    std::vector<std::pair<std::int64_t, InteractionMatrix::ItemId>> keyed;
    keyed.reserve(row.size());
    for (auto j : row) {
      auto it = stamp.find(static_cast<std::uint64_t>(i) * n + static_cast<std::uint64_t>(j));
      if (it == stamp.end()) {
        throw DataError("temporal split requested but interaction (" + vocab.user_key(i) + ", " +
                        vocab.item_key(j) + ") has no timestamp");
      }
      keyed.emplace_back(it->second, j);
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t k = 0; k < keyed.size(); ++k) row[k] = keyed[k].second;
  });
}

/// Same sizing as the temporal split over a seeded uniform shuffle of each
/// row. User i's shuffle depends only on (seed, i).
inline DatasetSplit split_random(const InteractionMatrix& matrix, const SplitRatios& ratios,
                                 std::uint64_t seed) {
  return detail::split_by_order(matrix, ratios, [&](Index i, auto& row) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    for (std::size_t k = row.size(); k > 1; --k) {
      std::swap(row[k - 1], row[uniform_below(rng, k)]);
    }
  });
}

inline PopularityProfile popularity(const InteractionMatrix& train) {
  PopularityProfile p;
  p.counts = train.column_counts();
  for (auto c : p.counts) p.total += c;
  if (p.total == 0) throw DataError("popularity requires a nonempty training matrix");
  p.probs.resize(p.counts.size());
  const double total = static_cast<double>(p.total);
  for (std::size_t j = 0; j < p.counts.size(); ++j) {
    p.probs[j] = static_cast<double>(p.counts[j]) / total;
  }
  return p;
}

struct UserHoldout {
  InteractionMatrix retained;
  InteractionMatrix heldout;
  std::vector<Index> users;  // ascending
};

/// Moves a seeded uniform sample of ceil(fraction * m) users into `heldout`.
inline UserHoldout holdout_users(const InteractionMatrix& matrix, double fraction,
                                 std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("holdout fraction must be in (0, 1)");
  const Index m = matrix.users();
  const Index count = detail::ceil_share(fraction, m);
  if (count == 0) throw UsageError("holdout fraction selects no users");
  std::vector<Index> order(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 rng(seed);
  for (Index k = 0; k < count; ++k) {
    const auto pick = k + static_cast<Index>(uniform_below(rng, static_cast<std::uint64_t>(m - k)));
    std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick)]);
  }
  UserHoldout out;
  out.users.assign(order.begin(), order.begin() + count);
  std::sort(out.users.begin(), out.users.end());
  std::vector<char> held(static_cast<std::size_t>(m), 0);
  for (Index u : out.users) held[static_cast<std::size_t>(u)] = 1;
  std::vector<std::vector<InteractionMatrix::ItemId>> keep(static_cast<std::size_t>(m)),
      move(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    auto row = matrix.row(i);
    auto& dst = held[static_cast<std::size_t>(i)] ? move : keep;
    dst[static_cast<std::size_t>(i)].assign(row.begin(), row.end());
  }
  out.retained = InteractionMatrix::from_rows(matrix.items(), std::move(keep));
  out.heldout = InteractionMatrix::from_rows(matrix.items(), std::move(move));
  return out;
}

/// Everything `prepare` produces: vocabulary, split, and the fold-in rows of
/// users withheld from training for cold-start evaluation (empty rows when no
/// holdout was requested).
struct PreparedData {
  IdVocabulary vocab;
  DatasetSplit split;
  InteractionMatrix coldstart;
};

// Snapshot format, text, version 1:
//   ocf-split 1
//   users <m>            followed by m lines, one user key each
//   items <n>            followed by n lines, one item key each
//   matrix <name> <nnz>  for train, validation, test, coldstart; followed by
//                        m lines "<row size> <item> <item> ..."
//   end
inline constexpr std::string_view kSplitMagic = "ocf-split";
inline constexpr int kSplitVersion = 1;

namespace detail {

inline void write_matrix(std::ostream& out, std::string_view name, const InteractionMatrix& mat) {
  out << "matrix " << name << ' ' << mat.nnz() << '\n';
  for (Index i = 0; i < mat.users(); ++i) {
    out << mat.row_size(i);
    for (auto j : mat.row(i)) out << ' ' << j;
    out << '\n';
  }
}

inline InteractionMatrix read_matrix(std::istream& in, std::string_view name, Index m, Index n) {
  std::string tag, got;
  Index nnz = 0;
  if (!(in >> tag >> got >> nnz) || tag != "matrix" || got != name) {
    throw DataError("split snapshot: expected matrix section '" + std::string(name) + "'");
  }
  std::vector<std::vector<InteractionMatrix::ItemId>> rows(static_cast<std::size_t>(m));
  Index seen = 0;
  for (auto& row : rows) {
    Index k = 0;
    if (!(in >> k) || k < 0 || k > n) throw DataError("split snapshot: bad row length");
    row.resize(static_cast<std::size_t>(k));
    for (auto& j : row) {
      if (!(in >> j) || j < 0 || j >= n) throw DataError("split snapshot: bad item index");
    }
    if (!std::is_sorted(row.begin(), row.end()) ||
        std::adjacent_find(row.begin(), row.end()) != row.end()) {
      throw DataError("split snapshot: row not strictly increasing");
    }
    seen += k;
  }
  if (seen != nnz) throw DataError("split snapshot: entry count mismatch");
  return InteractionMatrix::from_rows(n, std::move(rows));
}

inline void read_keys(std::istream& in, std::string_view section, Index& count,
                      std::vector<std::string>& keys) {
  std::string tag;
  if (!(in >> tag >> count) || tag != section || count < 0) {
    throw DataError("split snapshot: expected '" + std::string(section) + "' section");
  }
  std::string line;
  std::getline(in, line);
  keys.resize(static_cast<std::size_t>(count));
  for (auto& k : keys) {
    if (!std::getline(in, k)) throw DataError("split snapshot: truncated key list");
  }
}

}  // namespace detail

inline void write_snapshot(std::ostream& out, const PreparedData& data) {
  const Index m = data.vocab.user_count();
  const Index n = data.vocab.item_count();
  out << kSplitMagic << ' ' << kSplitVersion << '\n';
  out << "users " << m << '\n';
  for (const auto& k : data.vocab.user_keys()) out << k << '\n';
  out << "items " << n << '\n';
  for (const auto& k : data.vocab.item_keys()) out << k << '\n';
  detail::write_matrix(out, "train", data.split.train);
  detail::write_matrix(out, "validation", data.split.validation);
  detail::write_matrix(out, "test", data.split.test);
  detail::write_matrix(out, "coldstart", data.coldstart);
  out << "end\n";
}

inline PreparedData read_snapshot(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kSplitMagic) {
    throw DataError("not a split snapshot");
  }
  if (version != kSplitVersion) {
    throw DataError("unsupported split snapshot version " + std::to_string(version));
  }
  Index m = 0, n = 0;
  std::vector<std::string> users, items;
  detail::read_keys(in, "users", m, users);
  detail::read_keys(in, "items", n, items);
  PreparedData data;
  for (const auto& k : users) data.vocab.add_user(k);
  for (const auto& k : items) data.vocab.add_item(k);
  if (data.vocab.user_count() != m || data.vocab.item_count() != n) {
    throw DataError("split snapshot: duplicate keys in vocabulary");
  }
  data.split.train = detail::read_matrix(in, "train", m, n);
  data.split.validation = detail::read_matrix(in, "validation", m, n);
  data.split.test = detail::read_matrix(in, "test", m, n);
  data.coldstart = detail::read_matrix(in, "coldstart", m, n);
  std::string end;
  if (!(in >> end) || end != "end") throw DataError("split snapshot: missing end marker");
  return data;
}

inline void write_popularity(std::ostream& out, const PopularityProfile& p) {
  out << "item\tcount\tprob\n";
  char buf[64];
  for (std::size_t j = 0; j < p.counts.size(); ++j) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p.probs[j]);
    (void)ec;
    out << j << '\t' << p.counts[j] << '\t' << std::string_view(buf, static_cast<std::size_t>(end - buf))
        << '\n';
  }
}

/// m, n, |r >= eta| and density, as reported per dataset.
struct DatasetSummary {
  Index users = 0;
  Index items = 0;
  Index interactions = 0;
  double sparsity = 0.0;
};

inline DatasetSummary summarize(const InteractionMatrix& matrix) {
  DatasetSummary s{matrix.users(), matrix.items(), matrix.nnz(), 0.0};
  if (s.users > 0 && s.items > 0) {
    s.sparsity = static_cast<double>(s.interactions) /
                 (static_cast<double>(s.users) * static_cast<double>(s.items));
  }
  return s;
}

}  // namespace ocf
