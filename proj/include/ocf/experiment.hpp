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

// Experiment orchestration behind the `ocf` command line: configuration
// schema, and the prepare / train / evaluate / grid commands.

#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ocf/common.hpp"
#include "ocf/evaluator.hpp"
#include "ocf/interaction_store.hpp"
#include "ocf/network.hpp"
#include "ocf/objectives.hpp"
#include "ocf/sampler.hpp"
#include "ocf/trainer.hpp"

namespace ocf {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

enum class SplitKind { kTemporal, kRandom };

struct ExperimentConfig {
  std::string dataset_path;
  ColumnLayout format;
  double eta = 3.0;
  SplitKind split_kind = SplitKind::kTemporal;
  std::uint64_t split_seed = 0;
  SplitRatios ratios;
  double holdout_fraction = 0.0;  // 0 disables the cold-start holdout
  std::uint64_t holdout_seed = 1;
  TrainConfig train;
  std::vector<int> k_list{5, 10, 20, 50};
  int popularity_k = 10;
  std::string output_dir = "out";
  std::string run_name;  // defaults to the lowercase model kind
  GridSpace grid;

  std::string resolved_run_name() const {
    if (!run_name.empty()) return run_name;
    std::string s(to_string(train.kind));
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  }
  fs::path snapshot_path() const { return fs::path(output_dir) / "split.snapshot"; }
};

namespace detail {

inline std::string header_name(ColumnLayout::Header h) {
  switch (h) {
    case ColumnLayout::Header::kPresent: return "present";
    case ColumnLayout::Header::kAbsent: return "absent";
    default: return "auto";
  }
}

template <class T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

inline Json train_to_json(const TrainConfig& t) {
  Json j;
  j["mode"] = std::string(to_string(t.mode));
  j["latent_dim"] = t.latent_dim;
  j["lambda"] = t.lambda;
  j["beta"] = t.beta;
  j["negatives"] = t.negatives ? Json(*t.negatives) : Json(nullptr);
  j["learning_rate"] = t.learning_rate;
  j["batch_size"] = t.batch_size;
  j["max_epochs"] = t.max_epochs;
  j["patience"] = t.patience;
  j["seed"] = t.seed;
  j["clip_norm"] = t.clip_norm;
  j["resample_each_epoch"] = t.resample_each_epoch;
  j["validation_users"] = t.validation_users;
  j["init_scale"] = t.init_scale ? Json(*t.init_scale) : Json(nullptr);
  return j;
}

inline void train_from_json(const Json& j, TrainConfig& t) {
  if (j.contains("mode")) t.mode = parse_train_mode(j.at("mode").get<std::string>());
  read_opt(j, "latent_dim", t.latent_dim);
  read_opt(j, "lambda", t.lambda);
  read_opt(j, "beta", t.beta);
  if (j.contains("negatives")) {
    t.negatives = j.at("negatives").is_null() ? std::nullopt
                                              : std::optional<std::int64_t>(j.at("negatives").get<std::int64_t>());
  }
  read_opt(j, "learning_rate", t.learning_rate);
  read_opt(j, "batch_size", t.batch_size);
  read_opt(j, "max_epochs", t.max_epochs);
  read_opt(j, "patience", t.patience);
  read_opt(j, "seed", t.seed);
  read_opt(j, "clip_norm", t.clip_norm);
  read_opt(j, "resample_each_epoch", t.resample_each_epoch);
  read_opt(j, "validation_users", t.validation_users);
  if (j.contains("init_scale")) {
    t.init_scale = j.at("init_scale").is_null() ? std::nullopt
                                                : std::optional<double>(j.at("init_scale").get<double>());
  }
}

}  // namespace detail

inline Json to_json(const ExperimentConfig& c) {
  Json j;
  j["dataset_path"] = c.dataset_path;
  j["format"] = {{"delimiter", c.format.delimiter},
                 {"user_column", c.format.user_column},
                 {"item_column", c.format.item_column},
                 {"rating_column", c.format.rating_column},
                 {"timestamp_column", c.format.timestamp_column},
                 {"header", detail::header_name(c.format.header)}};
  j["eta"] = c.eta;
  j["split_kind"] = c.split_kind == SplitKind::kTemporal ? "temporal" : "random";
  j["split_seed"] = c.split_seed;
  j["split_ratios"] = {c.ratios.train, c.ratios.validation, c.ratios.test};
  j["holdout_fraction"] = c.holdout_fraction;
  j["holdout_seed"] = c.holdout_seed;
  j["model_kind"] = std::string(to_string(c.train.kind));
  j["train"] = detail::train_to_json(c.train);
  j["k_list"] = c.k_list;
  j["popularity_k"] = c.popularity_k;
  j["output_dir"] = c.output_dir;
  j["run_name"] = c.run_name;
  Json g;
  g["latent_dim"] = c.grid.latent_dims;
  g["lambda"] = c.grid.lambdas;
  g["beta"] = c.grid.betas;
  g["negatives"] = c.grid.negatives;
  Json modes = Json::array();
  for (auto m : c.grid.modes) modes.push_back(std::string(to_string(m)));
  g["mode"] = modes;
  j["grid"] = g;
  return j;
}

inline ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  try {
    detail::read_opt(j, "dataset_path", c.dataset_path);
    if (j.contains("format")) {
      const auto& f = j.at("format");
      detail::read_opt(f, "delimiter", c.format.delimiter);
      detail::read_opt(f, "user_column", c.format.user_column);
      detail::read_opt(f, "item_column", c.format.item_column);
      detail::read_opt(f, "rating_column", c.format.rating_column);
      detail::read_opt(f, "timestamp_column", c.format.timestamp_column);
      if (f.contains("header")) {
        const auto h = f.at("header").get<std::string>();
        if (h == "present") c.format.header = ColumnLayout::Header::kPresent;
        else if (h == "absent") c.format.header = ColumnLayout::Header::kAbsent;
        else if (h == "auto") c.format.header = ColumnLayout::Header::kAuto;
        else throw UsageError("format.header must be auto, present or absent");
      }
    }
    detail::read_opt(j, "eta", c.eta);
    if (j.contains("split_kind")) {
      const auto k = j.at("split_kind").get<std::string>();
      if (k == "temporal") c.split_kind = SplitKind::kTemporal;
      else if (k == "random") c.split_kind = SplitKind::kRandom;
      else throw UsageError("split_kind must be temporal or random");
    }
    detail::read_opt(j, "split_seed", c.split_seed);
    if (j.contains("split_ratios")) {
      const auto r = j.at("split_ratios").get<std::vector<double>>();
      if (r.size() != 3) throw UsageError("split_ratios needs three values");
      c.ratios = {r[0], r[1], r[2]};
    }
    detail::read_opt(j, "holdout_fraction", c.holdout_fraction);
    detail::read_opt(j, "holdout_seed", c.holdout_seed);
    if (j.contains("model_kind")) c.train.kind = parse_model_kind(j.at("model_kind").get<std::string>());
    if (j.contains("train")) detail::train_from_json(j.at("train"), c.train);
    detail::read_opt(j, "k_list", c.k_list);
    detail::read_opt(j, "popularity_k", c.popularity_k);
    detail::read_opt(j, "output_dir", c.output_dir);
    detail::read_opt(j, "run_name", c.run_name);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      detail::read_opt(g, "latent_dim", c.grid.latent_dims);
      detail::read_opt(g, "lambda", c.grid.lambdas);
      detail::read_opt(g, "beta", c.grid.betas);
      detail::read_opt(g, "negatives", c.grid.negatives);
      if (g.contains("mode")) {
        for (const auto& m : g.at("mode")) c.grid.modes.push_back(parse_train_mode(m.get<std::string>()));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed configuration: ") + e.what());
  }
  if (c.k_list.empty()) throw UsageError("k_list must not be empty");
  for (int k : c.k_list) {
    if (k < 1) throw UsageError("k_list entries must be positive");
  }
  if (c.popularity_k < 1) throw UsageError("popularity_k must be positive");
  if (c.holdout_fraction < 0.0 || c.holdout_fraction >= 1.0) {
    throw UsageError("holdout_fraction must be in [0, 1)");
  }
  c.grid.base = c.train;
  return c;
}

/// Applies "dotted.key=value" overrides; values are parsed as JSON when
/// possible and taken as strings otherwise.
inline void apply_overrides(Json& j, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("override must look like key=value: " + o);
    const std::string path = o.substr(0, eq);
    const std::string raw = o.substr(eq + 1);
    Json value = Json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    Json* node = &j;
    std::size_t start = 0;
    for (;;) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (dot == std::string::npos) {
        (*node)[key] = value;
        break;
      }
      node = &(*node)[key];
      start = dot + 1;
    }
  }
}

inline Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read configuration '" + path.string() + "'");
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw UsageError("configuration is not valid JSON: " + path.string());
  return j;
}

namespace detail {

inline std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  Fnv1a h;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) h.update(buf, static_cast<std::size_t>(in.gcount()));
  return hex64(h.value());
}

/// Writes through a temporary file and renames into place.
template <class WriteFn>
void write_file(const fs::path& path, WriteFn&& fn, bool binary = false) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, binary ? std::ios::binary : std::ios::out);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    fn(out);
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

inline void write_resolved_config(const fs::path& dir, const ExperimentConfig& c, int threads) {
  Json j = to_json(c);
  j["threads"] = threads;
  j["deterministic"] = threads == 1;
  write_file(dir / "resolved_config.json", [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

inline PreparedData load_prepared(const ExperimentConfig& c) {
  std::ifstream in(c.snapshot_path());
  if (!in) throw DataError("no prepared split at '" + c.snapshot_path().string() + "'; run prepare first");
  return read_snapshot(in);
}

inline TwoHeadedModel load_model(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read model snapshot '" + path.string() + "'");
  return read_model(in);
}

}  // namespace detail

struct PrepareOutcome {
  DatasetSummary summary;
  std::string snapshot_digest;
};

/// Ingest, binarize, split, optionally withhold cold-start users, and write
/// the split snapshot with its popularity profile.
inline PrepareOutcome cmd_prepare(const ExperimentConfig& c, std::ostream& log, int threads = 1) {
  if (c.dataset_path.empty()) throw UsageError("dataset_path is required");
  const auto [records, vocab] = load_ratings(c.dataset_path, c.format);
  const auto matrix = binarize(records, vocab, c.eta);
  PreparedData data;
  data.vocab = vocab;
  data.split = c.split_kind == SplitKind::kTemporal ? split_temporal(matrix, records, vocab, c.ratios)
                                                    : split_random(matrix, c.ratios, c.split_seed);
  data.coldstart = InteractionMatrix(matrix.users(), matrix.items());
  if (c.holdout_fraction > 0.0) {
    auto held = holdout_users(data.split.train, c.holdout_fraction, c.holdout_seed);
    data.split.train = std::move(held.retained);
    data.coldstart = std::move(held.heldout);
  }
  const fs::path dir(c.output_dir);
  detail::write_file(c.snapshot_path(), [&](std::ostream& out) { write_snapshot(out, data); });
  detail::write_file(dir / "popularity.tsv",
                     [&](std::ostream& out) { write_popularity(out, popularity(data.split.train)); });
  PrepareOutcome outcome{summarize(matrix), detail::file_digest(c.snapshot_path())};
  detail::write_file(dir / "summary.tsv", [&](std::ostream& out) {
    out << "users\titems\tinteractions\tsparsity\ttrain\tvalidation\ttest\tcoldstart\tsnapshot_digest\n";
    out << outcome.summary.users << '\t' << outcome.summary.items << '\t' << outcome.summary.interactions
        << '\t' << detail::format_real(outcome.summary.sparsity) << '\t' << data.split.train.nnz() << '\t'
        << data.split.validation.nnz() << '\t' << data.split.test.nnz() << '\t' << data.coldstart.nnz()
        << '\t' << outcome.snapshot_digest << '\n';
  });
  detail::write_resolved_config(dir, c, threads);
  log << "m=" << outcome.summary.users << " n=" << outcome.summary.items
      << " |r>=eta|=" << outcome.summary.interactions << " sparsity=" << outcome.summary.sparsity
      << " snapshot_digest=" << outcome.snapshot_digest << '\n';
  return outcome;
}

struct TrainOutcome {
  fs::path model_path;
  std::string model_digest;
  TrainReport report;
};

inline TrainOutcome cmd_train(const ExperimentConfig& c, std::ostream& log, int threads = 1) {
  validate(c.train);
  const auto data = detail::load_prepared(c);
  auto result = train_model(data.split.train, data.split.validation, c.train, threads);
  result.model.item_digest = data.vocab.item_digest();
  const fs::path dir = fs::path(c.output_dir) / c.resolved_run_name();
  TrainOutcome out{dir / "model.bin", {}, std::move(result.report)};
  detail::write_file(out.model_path, [&](std::ostream& o) { write_model(o, result.model); }, true);
  detail::write_file(dir / "train_report.tsv", [&](std::ostream& o) { write_train_report(o, out.report); });
  detail::write_resolved_config(dir, c, threads);
  out.model_digest = detail::file_digest(out.model_path);
  log << "trained " << to_string(c.train.kind) << " mode=" << to_string(c.train.mode)
      << " epochs=" << out.report.stopped_epoch << " phase_boundary=" << out.report.phase_boundary
      << " best_val_ndcg=" << out.report.best_val_ndcg << " model_digest=" << out.model_digest << '\n';
  return out;
}

/// Metrics, popularity histograms and cold-start pairs for the given model
/// snapshots. Nothing is written unless every snapshot loads and matches.
inline fs::path cmd_evaluate(const ExperimentConfig& c, const std::vector<fs::path>& models,
                             std::ostream& log, int threads = 1) {
  if (models.empty()) throw UsageError("evaluate needs at least one model snapshot");
  const auto data = detail::load_prepared(c);
  std::vector<TwoHeadedModel> loaded;
  std::vector<std::string> names;
  for (const auto& p : models) {
    loaded.push_back(detail::load_model(p));
    if (loaded.back().items != data.vocab.item_count() ||
        (loaded.back().item_digest != 0 && loaded.back().item_digest != data.vocab.item_digest())) {
      throw DataError("model '" + p.string() + "' was trained on a different item vocabulary");
    }
    std::string name = p.parent_path().filename().string();
    if (name.empty() || name == "." ) name = std::string(to_string(loaded.back().kind));
    names.push_back(name);
  }
  std::vector<NamedModel> named;
  for (std::size_t i = 0; i < loaded.size(); ++i) named.push_back({names[i], &loaded[i]});

  const auto& train = data.split.train;
  const auto users = evaluable_users(train, data.split.test);
  std::vector<NamedReport> reports;
  for (const auto& nm : named) {
    reports.push_back({nm.name, evaluate(*nm.model, train, data.split.test, c.k_list, users, threads).report});
  }
  const auto profile = popularity(train);
  const auto pop = popularity_report(named, train, profile, users, c.popularity_k, threads);

  std::vector<Index> heldout = data.coldstart.nonempty_users();
  const auto cold = cold_start_eval(named, heldout, data.coldstart, data.split.test, threads);

  const fs::path dir = fs::path(c.output_dir) / "eval";
  detail::write_file(dir / "metrics.tsv", [&](std::ostream& o) { write_metrics_table(o, reports); });
  detail::write_file(dir / "popularity.tsv", [&](std::ostream& o) { write_popularity_table(o, pop); });
  detail::write_file(dir / "popularity_summary.tsv", [&](std::ostream& o) { write_popularity_summary(o, pop); });
  detail::write_file(dir / "cold_start.tsv", [&](std::ostream& o) { write_cold_start_table(o, cold); });
  detail::write_resolved_config(dir, c, threads);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    log << reports[i].model << " NDCG=" << reports[i].report.value("NDCG", kNdcgCutoff)
        << " users=" << reports[i].report.users << " mean_popularity@" << c.popularity_k << '='
        << pop[i].mean_popularity;
    if (!cold.users.empty()) log << " coldstart_ndcg=" << cold.mean(i);
    log << '\n';
  }
  return dir;
}

namespace detail {

inline std::string journal_line(const GridRow& row) {
  return std::to_string(row.index) + '\t' + format_real(row.metric) + '\t' + format_real(row.seconds) + '\t' +
         train_to_json(row.config).dump();
}

inline std::vector<GridRow> read_journal(const fs::path& path) {
  std::vector<GridRow> rows;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    GridRow r;
    std::string metric, seconds;
    if (!(ls >> r.index >> metric >> seconds)) continue;
    auto m = parse_double(metric);
    auto s = parse_double(seconds);
    if (!m || !s) continue;
    r.metric = *m;
    r.seconds = *s;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace detail

struct GridOutcome {
  GridResult result;
  fs::path best_config_path;
  std::size_t resumed_rows = 0;
};

/// Exhaustive validation-NDCG search. Each finished lattice point is appended
/// to a journal so an interrupted run resumes where it stopped.
inline GridOutcome cmd_grid(const ExperimentConfig& c, std::ostream& log, int threads = 1,
                            GridObjective objective = {}) {
  const auto data = detail::load_prepared(c);
  const fs::path dir = fs::path(c.output_dir) / "grid";
  fs::create_directories(dir);
  const fs::path journal = dir / "grid_journal.tsv";
  const auto completed = detail::read_journal(journal);
  if (!objective) objective = validation_ndcg_objective(data.split.train, data.split.validation, threads);
  std::ofstream jout(journal, std::ios::app);
  if (!jout) throw DataError("cannot open grid journal");
  GridOutcome out;
  out.resumed_rows = completed.size();
  out.result = grid_search(c.grid, objective, completed, [&](const GridRow& row) {
    jout << detail::journal_line(row) << '\n';
    jout.flush();
    log << "grid[" << row.index << "] val_ndcg=" << row.metric << '\n';
  });
  detail::write_file(dir / "grid_results.tsv", [&](std::ostream& o) {
    o << "index\tmodel_kind\tmode\tlatent_dim\tlambda\tbeta\tnegatives\tval_ndcg\tseconds\n";
    for (const auto& r : out.result.rows) {
      o << r.index << '\t' << to_string(r.config.kind) << '\t' << to_string(r.config.mode) << '\t'
        << r.config.latent_dim << '\t' << detail::format_real(r.config.lambda) << '\t'
        << detail::format_real(r.config.beta) << '\t'
        << (r.config.negatives ? std::to_string(*r.config.negatives) : std::string("NA")) << '\t'
        << detail::format_real(r.metric) << '\t' << detail::format_real(r.seconds) << '\n';
    }
  });
  ExperimentConfig best = c;
  best.train = out.result.best;
  best.grid = GridSpace{};
  best.grid.base = best.train;
  out.best_config_path = dir / "best_config.json";
  detail::write_file(out.best_config_path, [&](std::ostream& o) { o << to_json(best).dump(2) << '\n'; });
  detail::write_resolved_config(dir, c, threads);
  return out;
}

}  // namespace ocf
