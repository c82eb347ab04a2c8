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

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "ocf/experiment.hpp"
#include "ocf/synthetic.hpp"

namespace ocf {
namespace {

class Workspace : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("ocf_test_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    SyntheticSpec spec;
    spec.users = 80;
    spec.items = 120;
    spec.min_ratings = 12;
    spec.mean_ratings = 30;
    spec.seed = 3;
    std::ofstream out(dir_ / "ratings.tsv");
    write_ratings(out, generate_ratings(spec));
  }
  void TearDown() override { fs::remove_all(dir_); }

  ExperimentConfig config(ModelKind kind = ModelKind::kAutoRec) const {
    Json j = Json::object();
    j["dataset_path"] = (dir_ / "ratings.tsv").string();
    j["output_dir"] = (dir_ / "out").string();
    j["holdout_fraction"] = 0.1;
    j["model_kind"] = std::string(to_string(kind));
    j["train"] = {{"latent_dim", 6}, {"max_epochs", 3}, {"learning_rate", 0.01}, {"lambda", 1e-3}};
    if (kind == ModelKind::kNs || kind == ModelKind::kOhns) j["train"]["negatives"] = 40;
    return config_from_json(j);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  int cli(const std::string& args) const {
    const std::string cmd = std::string(OCF_CLI_PATH) + " " + args + " > " + (dir_ / "cli.log").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

TEST_F(Workspace, PrepareIsDeterministic) {
  std::ostringstream log;
  const auto a = cmd_prepare(config(), log);
  const auto b = cmd_prepare(config(), log);
  EXPECT_EQ(a.snapshot_digest, b.snapshot_digest);
  EXPECT_EQ(a.summary.users, 80);
  EXPECT_NE(log.str().find("snapshot_digest="), std::string::npos);
  for (auto f : {"split.snapshot", "popularity.tsv", "summary.tsv", "resolved_config.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
  std::ifstream in(dir_ / "out" / "split.snapshot");
  const auto data = read_snapshot(in);
  // ceil(0.1 * 80) users are withheld; a withheld user may have an empty train row.
  const auto held = data.coldstart.nonempty_users().size();
  EXPECT_GT(held, 0u);
  EXPECT_LE(held, 8u);
  for (Index u : data.coldstart.nonempty_users()) EXPECT_EQ(data.split.train.row_size(u), 0);
}

TEST_F(Workspace, TrainEvaluateRoundTrip) {
  std::ostringstream log;
  cmd_prepare(config(), log);
  const auto autorec = cmd_train(config(ModelKind::kAutoRec), log);
  const auto nce = cmd_train(config(ModelKind::kNce), log);
  EXPECT_EQ(cmd_train(config(ModelKind::kAutoRec), log).model_digest, autorec.model_digest);
  const auto dir = cmd_evaluate(config(), {autorec.model_path, nce.model_path}, log);
  const auto metrics = slurp(dir / "metrics.tsv");
  EXPECT_EQ(metrics.rfind("# ndcg_cutoff=50", 0), 0u);
  EXPECT_NE(metrics.find("autorec\tNDCG\t50"), std::string::npos);
  EXPECT_NE(metrics.find("nce\tMAP\t5"), std::string::npos);
  EXPECT_NE(slurp(dir / "popularity_summary.tsv").find("nce\t10\t"), std::string::npos);
  EXPECT_NE(slurp(dir / "cold_start.tsv").find("autorec_ndcg\tnce_ndcg"), std::string::npos);
}

TEST_F(Workspace, EvaluateWritesNothingOnBadSnapshot) {
  std::ostringstream log;
  cmd_prepare(config(), log);
  const auto good = cmd_train(config(), log);
  const fs::path bad = dir_ / "bad.bin";
  std::ofstream(bad) << "garbage";
  EXPECT_THROW(cmd_evaluate(config(), {good.model_path, bad}, log), DataError);
  EXPECT_FALSE(fs::exists(dir_ / "out" / "eval" / "metrics.tsv"));
}

TEST_F(Workspace, RejectsModelFromAnotherVocabulary) {
  std::ostringstream log;
  cmd_prepare(config(), log);
  std::ifstream in(config().snapshot_path());
  const auto data = read_snapshot(in);
  auto m = init_model(ModelKind::kAutoRec, data.vocab.item_count(), 2, 1);
  m.item_digest = data.vocab.item_digest() ^ 1;
  const fs::path p = dir_ / "other" / "model.bin";
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  write_model(out, m);
  out.close();
  EXPECT_THROW(cmd_evaluate(config(), {p}, log), DataError);
}

TEST_F(Workspace, GridResumesAndWritesBestConfig) {
  std::ostringstream log;
  cmd_prepare(config(), log);
  auto c = config();
  c.grid.latent_dims = {4, 8};
  c.grid.lambdas = {0.1, 0.01};
  int calls = 0;
  auto objective = [&](const TrainConfig& t) {
    ++calls;
    return t.latent_dim == 8 && t.lambda == 0.01 ? 0.5 : 0.1;
  };
  const auto first = cmd_grid(c, log, 1, objective);
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(first.result.best.latent_dim, 8);
  const auto second = cmd_grid(c, log, 1, objective);
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(second.resumed_rows, 4u);
  EXPECT_EQ(second.result.best_index, first.result.best_index);

  const auto best = config_from_json(read_json_file(first.best_config_path));
  EXPECT_EQ(best.train.latent_dim, 8);
  EXPECT_EQ(best.train.lambda, 0.01);
  EXPECT_EQ(best.dataset_path, c.dataset_path);
}

TEST(Config, JsonRoundTripAndOverrides) {
  Json j = Json::object();
  apply_overrides(j, {"model_kind=NS", "train.negatives=500", "train.mode=FULL_FINE_TUNE", "eta=4",
                      "grid.lambda=[0.1,1]", "format.delimiter=::"});
  const auto c = config_from_json(j);
  EXPECT_EQ(c.train.kind, ModelKind::kNs);
  EXPECT_EQ(*c.train.negatives, 500);
  EXPECT_EQ(c.train.mode, TrainMode::kFullFineTune);
  EXPECT_EQ(c.eta, 4.0);
  EXPECT_EQ(c.grid.lambdas, (std::vector<double>{0.1, 1.0}));
  EXPECT_EQ(c.format.delimiter, "::");
  EXPECT_EQ(to_json(config_from_json(to_json(c))), to_json(c));
  Json bad = Json::object();
  EXPECT_THROW(apply_overrides(bad, {"novalue"}), UsageError);
  bad["train"] = {{"mode", "SIDEWAYS"}};
  EXPECT_THROW(config_from_json(bad), UsageError);
  bad = {{"k_list", Json::array()}};
  EXPECT_THROW(config_from_json(bad), UsageError);
  bad = {{"eta", "three"}};
  EXPECT_THROW(config_from_json(bad), UsageError);
}

TEST_F(Workspace, CliExitCodes) {
  const std::string data = (dir_ / "ratings.tsv").string();
  const std::string out = (dir_ / "cli_out").string();
  EXPECT_EQ(cli(""), kExitUsage);
  EXPECT_EQ(cli("evaluate"), kExitUsage);
  EXPECT_EQ(cli("prepare -s dataset_path=" + (dir_ / "missing.tsv").string() + " -s output_dir=" + out),
            kExitData);
  EXPECT_EQ(cli("prepare -s train.mode=SIDEWAYS"), kExitUsage);
  EXPECT_EQ(cli("prepare -s dataset_path=" + data + " -s output_dir=" + out), kExitOk);
  EXPECT_EQ(cli("train -s output_dir=" + out + " -s model_kind=NS -s train.negatives=20 -s train.lambda=0"),
            kExitDivergence);
  EXPECT_EQ(cli("train -s output_dir=" + out + " -s train.max_epochs=2 -s train.latent_dim=4"), kExitOk);
  EXPECT_EQ(cli("evaluate -s output_dir=" + out + " -m " + out + "/autorec/model.bin"), kExitOk);
  EXPECT_EQ(cli("evaluate -s output_dir=" + out + " -m " + out + "/nope/model.bin"), kExitData);
}

}  // namespace
}  // namespace ocf
