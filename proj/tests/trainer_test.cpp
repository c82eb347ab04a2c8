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

#include <sstream>

#include <gtest/gtest.h>

#include "ocf/trainer.hpp"
#include "test_support.hpp"

namespace ocf {
namespace {

struct Fixture {
  DatasetSplit split;
  PopularityProfile profile;
};

Fixture small_data(std::uint64_t seed = 1, Index users = 120, Index items = 40) {
  const auto all = testing::clustered_matrix(users, items, 4, seed);
  Fixture f{split_random(all, {}, seed), {}};
  f.profile = popularity(f.split.train);
  return f;
}

TrainConfig quick(ModelKind kind, TrainMode mode = TrainMode::kJoint) {
  TrainConfig c;
  c.kind = kind;
  c.mode = mode;
  c.latent_dim = 8;
  c.lambda = 1e-3;
  c.learning_rate = 1e-2;
  c.batch_size = 32;
  c.max_epochs = 6;
  c.patience = 3;
  c.seed = 4;
  if (kind == ModelKind::kNs || kind == ModelKind::kOhns) c.negatives = 50;
  return c;
}

TEST(Config, Validation) {
  auto c = quick(ModelKind::kNs);
  c.negatives.reset();
  EXPECT_THROW(validate(c), UsageError);
  c = quick(ModelKind::kAutoRec);
  c.lambda = -1;
  EXPECT_THROW(validate(c), UsageError);
  EXPECT_EQ(parse_train_mode("FULL_FINE_TUNE"), TrainMode::kFullFineTune);
  EXPECT_THROW(parse_train_mode("SOMETIMES"), UsageError);
}

TEST(Adam, MaskedTensorsAreUntouched) {
  auto m = init_model(ModelKind::kNce, 6, 3, 1);
  const auto before = m;
  GradientSet g = GradientSet::zeros_like(m);
  g.for_each([](LayerParams& p) {
    p.weights.setConstant(1.0);
    p.bias.setConstant(1.0);
  });
  Adam adam(m, 0.1);
  adam.step(m, g, {false, true, false});
  EXPECT_EQ(m.encoder, before.encoder);
  EXPECT_EQ(m.contrast_head, before.contrast_head);
  // First Adam step moves every unmasked coordinate by lr (bias-corrected).
  EXPECT_NEAR((*m.mse_head).weights(0, 0), before.mse_head->weights(0, 0) - 0.1, 1e-9);
}

TEST(Training, AutoRecLearnsAndIsDeterministic) {
  const auto f = small_data();
  const auto a = train_model(f.split.train, f.split.validation, quick(ModelKind::kAutoRec));
  const auto b = train_model(f.split.train, f.split.validation, quick(ModelKind::kAutoRec));
  EXPECT_EQ(a.model, b.model);
  EXPECT_FALSE(a.report.epochs.empty());
  const auto users = evaluable_users(f.split.train, f.split.test);
  const auto untrained = init_model(ModelKind::kAutoRec, 40, 8, 0);
  EXPECT_GT(mean_ndcg(a.model, f.split.train, f.split.test, users),
            mean_ndcg(untrained, f.split.train, f.split.test, users));
}

TEST(Training, EveryKindAndModeRuns) {
  const auto f = small_data();
  for (auto kind : {ModelKind::kOhns, ModelKind::kNs, ModelKind::kNce}) {
    for (auto mode : {TrainMode::kJoint, TrainMode::kAlternating, TrainMode::kLimitedFineTune,
                      TrainMode::kFullFineTune}) {
      if (kind == ModelKind::kOhns && mode != TrainMode::kJoint) continue;
      const auto r = train_model(f.split.train, f.split.validation, quick(kind, mode));
      EXPECT_NO_THROW(validate(r.model));
      EXPECT_EQ(r.model.kind, kind);
      EXPECT_EQ(r.report.phases.size(), is_two_phase(mode) && kind != ModelKind::kOhns ? 2u : 1u);
      for (std::size_t e = 1; e < r.report.epochs.size(); ++e) {
        EXPECT_EQ(r.report.epochs[e].epoch, r.report.epochs[e - 1].epoch + 1);
      }
    }
  }
}

TEST(Training, LimitedFineTuneFreezesEncoderBitExactly) {
  const auto f = small_data(3, 200, 30);
  const auto targets = nce_targets(f.profile, {}, f.split.train);
  auto c = quick(ModelKind::kNce, TrainMode::kLimitedFineTune);
  const auto limited = train_two_headed(ModelKind::kNce, f.split.train, f.split.validation, c, &targets);
  ASSERT_GE(limited.report.phase_boundary, 1);
  // Replay phase 1 alone: its encoder is the one the fine-tune phase starts from.
  detail::PhaseRunner runner(f.split.train, f.split.validation, c, &targets);
  TwoHeadedModel model = detail::fresh_model(f.split.train, c);
  TrainReport rep;
  runner.run(model, {"nce", false, true, false, {true, false, true}, Head::kContrast}, 1, rep);
  ASSERT_EQ(rep.epochs.back().epoch, limited.report.phase_boundary);
  EXPECT_TRUE(limited.model.encoder == model.encoder);

  c.mode = TrainMode::kFullFineTune;
  const auto full = train_two_headed(ModelKind::kNce, f.split.train, f.split.validation, c, &targets);
  EXPECT_FALSE(full.model.encoder == model.encoder);
}

TEST(Training, NsWithoutRegularisationIsRejected) {
  const auto f = small_data();
  auto c = quick(ModelKind::kNs);
  c.lambda = 0.0;
  EXPECT_THROW(train_model(f.split.train, f.split.validation, c), DivergenceError);
  c = quick(ModelKind::kOhns);
  c.clip_norm = 0.0;
  EXPECT_THROW(train_model(f.split.train, f.split.validation, c), DivergenceError);
}

TEST(Training, NonFiniteUpdatesRaiseDivergence) {
  const auto f = small_data();
  auto c = quick(ModelKind::kAutoRec);
  c.learning_rate = 1e300;
  c.clip_norm = 0.0;
  c.init_scale = 1e200;
  EXPECT_THROW(train_model(f.split.train, f.split.validation, c), DivergenceError);
}

TEST(Training, ReportWriter) {
  const auto f = small_data();
  const auto r = train_model(f.split.train, f.split.validation, quick(ModelKind::kNce, TrainMode::kFullFineTune));
  std::ostringstream out;
  write_train_report(out, r.report);
  const auto text = out.str();
  EXPECT_EQ(text.rfind("# stopped_epoch=", 0), 0u);
  EXPECT_NE(text.find("phase_boundary=" + std::to_string(r.report.phase_boundary)), std::string::npos);
  EXPECT_NE(text.find("epoch\tphase\tmse_loss\tcontrast_loss\tval_ndcg\tseconds\n"), std::string::npos);
}

TEST(Grid, EnumerationOrder) {
  GridSpace s;
  s.base = quick(ModelKind::kNce);
  s.latent_dims = {10, 20};
  s.lambdas = {0.1, 0.2};
  s.modes = {TrainMode::kJoint, TrainMode::kAlternating};
  const auto lattice = s.enumerate();
  ASSERT_EQ(lattice.size(), 8u);
  EXPECT_EQ(lattice[0].latent_dim, 10);
  EXPECT_EQ(lattice[1].mode, TrainMode::kAlternating);
  EXPECT_EQ(lattice[2].lambda, 0.2);
  EXPECT_EQ(lattice[4].latent_dim, 20);
}

TEST(Grid, TieBreaksTowardsSmallerModels) {
  GridSpace s;
  s.base = quick(ModelKind::kAutoRec);
  s.latent_dims = {50, 10};
  s.lambdas = {1.0, 0.1};
  const auto constant = grid_search(s, [](const TrainConfig&) { return 0.25; });
  EXPECT_EQ(constant.best.latent_dim, 10);
  EXPECT_EQ(constant.best.lambda, 0.1);
  const auto peaked = grid_search(s, [](const TrainConfig& c) { return c.latent_dim == 50 ? 0.3 : 0.2; });
  EXPECT_EQ(peaked.best.latent_dim, 50);
  EXPECT_EQ(peaked.best.lambda, 0.1);
  EXPECT_EQ(peaked.rows.size(), 4u);
}

TEST(Grid, ResumeSkipsCompletedPoints) {
  GridSpace s;
  s.base = quick(ModelKind::kAutoRec);
  s.lambdas = {1.0, 2.0, 3.0};
  int calls = 0;
  auto objective = [&](const TrainConfig& c) {
    ++calls;
    return c.lambda;
  };
  std::vector<GridRow> done{{0, {}, 1.0, 0.0}, {1, {}, 2.0, 0.0}};
  const auto r = grid_search(s, objective, done);
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(r.best_index, 2u);
  EXPECT_EQ(r.rows[0].config.lambda, 1.0);
}

}  // namespace
}  // namespace ocf
