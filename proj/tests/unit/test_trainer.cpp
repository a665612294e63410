// Copyright 2026 The AirComp Toolkit Authors
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

#include "aircomp/trainer.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <gtest/gtest.h>

#include "aircomp/errors.hpp"
#include "test_support.hpp"

namespace aircomp {
namespace {

TrainConfig tiny_config() {
  TrainConfig c;
  c.scenario = ScenarioConfig::uniform(2, 2, 2);
  c.model = UdglConfig::tiny();
  c.epochs = 4;
  c.batch_size = 4;
  c.dataset_size = 8;
  c.heldout_size = 8;
  c.log_every = 0;
  return c;
}

TEST(Schedule, LearningRate) {
  TrainConfig c;
  c.lr0 = 1e-2;
  c.decay = 0.5;
  c.decay_interval = 10;
  EXPECT_DOUBLE_EQ(learning_rate(c, 0), 1e-2);
  EXPECT_DOUBLE_EQ(learning_rate(c, 9), 1e-2);
  EXPECT_DOUBLE_EQ(learning_rate(c, 10), 5e-3);
  EXPECT_DOUBLE_EQ(learning_rate(c, 35), 1.25e-3);
}

TEST(Schedule, Stages) {
  TrainConfig c;
  c.epochs = 10;
  c.stage1_fraction = 0.55;
  EXPECT_EQ(stage_of_epoch(c, 0), 1u);
  EXPECT_EQ(stage_of_epoch(c, 5), 1u);
  EXPECT_EQ(stage_of_epoch(c, 6), 2u);
  EXPECT_EQ(stage_of_epoch(c, 9), 2u);
}

TEST(Config, Validation) {
  TrainConfig c = tiny_config();
  EXPECT_NO_THROW(c.validate());
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = tiny_config();
  c.decay = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
  c = tiny_config();
  c.stage1_fraction = 1.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = tiny_config();
  c.lr0 = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Datasets, SeededAndDisjoint) {
  const TrainConfig c = tiny_config();
  const auto train = make_training_set(c);
  const auto held = make_heldout_set(c);
  ASSERT_EQ(train.size(), 8u);
  ASSERT_EQ(held.size(), 8u);
  EXPECT_EQ(make_training_set(c), train);
  EXPECT_NE(train[0].channels, held[0].channels);
}

TEST(Objective, ClampOnlyInStageTwo) {
  const NetworkRealization r = testing::normalized_instance(2, 2, 2, 1);
  ad::Tape t;
  const std::vector<ad::Var> low{t.constant(ad::Array::scalar(0.5)), t.constant(ad::Array::scalar(0.25))};
  EXPECT_EQ(rate_objective(low, r, 1).value().data[0], rate_objective(low, r, 2).value().data[0]);
  const std::vector<ad::Var> mixed{t.constant(ad::Array::scalar(4.0)), t.constant(ad::Array::scalar(0.25))};
  const double s1 = rate_objective(mixed, r, 1).value().data[0];
  const double s2 = rate_objective(mixed, r, 2).value().data[0];
  EXPECT_DOUBLE_EQ(s2, 2.0 * rate_scale(1, r));
  EXPECT_DOUBLE_EQ(s1, -2.0 * rate_scale(0, r) + 2.0 * rate_scale(1, r));
}

TEST(BatchLoss, SingleSampleIsNegativeRate) {
  const UdglModel m(UdglConfig::tiny(), 2);
  const NetworkRealization r = generate_realization(ScenarioConfig::uniform(2, 2, 2), 3);
  const std::vector<NetworkRealization> batch{r};
  const double rate = weighted_sum_rate(udgl_forward(m, r), r).weighted_sum;
  const BatchResult stage2 = batch_loss(m, batch, 2, false);
  EXPECT_NEAR(stage2.loss, -rate, 1e-12 * std::max(1.0, rate));
  EXPECT_NEAR(stage2.mean_rate, rate, 1e-12 * std::max(1.0, rate));
  EXPECT_TRUE(stage2.grads.empty());
  const BatchResult with_grad = batch_loss(m, batch, 2, true);
  EXPECT_EQ(with_grad.grads.size(), m.parameters().size());
}

TEST(BatchLoss, MeanOverSamples) {
  const UdglModel m(UdglConfig::tiny(), 2);
  const TrainConfig c = tiny_config();
  const auto set = make_training_set(c);
  double sum = 0.0;
  for (const auto& r : set) sum += batch_loss(m, std::span(&r, 1), 1, false).loss;
  EXPECT_NEAR(batch_loss(m, set, 1, false).loss, sum / static_cast<double>(set.size()), 1e-12);
}

TEST(BatchLoss, NonFiniteParameters) {
  UdglModel m(UdglConfig::tiny(), 2);
  m.parameters().back().data[0] = std::numeric_limits<double>::quiet_NaN();
  const auto set = make_training_set(tiny_config());
  try {
    batch_loss(m, set, 1, false, 40);
    FAIL() << "expected NonFiniteError";
  } catch (const NonFiniteError& e) {
    EXPECT_EQ(e.sample_id(), 40);
  }
}

// Overflowing channels in one sample break the beamformer solve there only.
TEST(BatchLoss, NumericalFailureNamesSample) {
  const UdglModel m(UdglConfig::tiny(), 2);
  auto set = make_training_set(tiny_config());
  for (auto& h : set[2].channels[0]) {
    for (auto& z : h) z = 1e200;
  }
  try {
    batch_loss(m, set, 1, false, 10);
    FAIL() << "expected NonFiniteError";
  } catch (const NonFiniteError& e) {
    EXPECT_EQ(e.sample_id(), 12);
  }
}

TEST(Train, ZeroEpochsReturnsInit) {
  TrainConfig c = tiny_config();
  c.epochs = 0;
  const UdglModel init(c.model, 9);
  const TrainResult res = train(c, &init);
  EXPECT_EQ(res.model, init);
  EXPECT_TRUE(res.log.epochs.empty());
  EXPECT_FALSE(res.aborted);
}

TEST(Train, DeterministicAndLogged) {
  TrainConfig c = tiny_config();
  c.optimizer = Optimizer::adam;
  c.lr0 = 1e-3;
  const TrainResult a = train(c);
  const TrainResult b = train(c);
  EXPECT_EQ(a.model, b.model);
  ASSERT_EQ(a.log.epochs.size(), 4u);
  EXPECT_EQ(a.log.epochs[0].stage, 1u);
  EXPECT_EQ(a.log.epochs[3].stage, 2u);
  EXPECT_FALSE(a.model == UdglModel(c.model, split_seed(c.seed, 4)));
}

TEST(Train, ImprovesOverUntrained) {
  TrainConfig c = tiny_config();
  c.optimizer = Optimizer::adam;
  c.lr0 = 3e-3;
  c.epochs = 30;
  c.dataset_size = 32;
  c.batch_size = 8;
  c.heldout_size = 32;
  const auto held = make_heldout_set(c);
  const UdglModel init(c.model, split_seed(c.seed, 4));
  const TrainResult res = train(c);
  ASSERT_FALSE(res.aborted) << res.abort_reason;
  EXPECT_GT(evaluate(res.model, held).mean_rate, evaluate(init, held).mean_rate);
}

TEST(Train, AbortKeepsLastGoodParameters) {
  TrainConfig c = tiny_config();
  c.checkpoint_path = std::filesystem::temp_directory_path() / "aircomp_abort.ckpt";
  UdglModel init(c.model, 1);
  init.parameters()[0].data[0] = std::numeric_limits<double>::infinity();
  const TrainResult res = train(c, &init);
  EXPECT_TRUE(res.aborted);
  EXPECT_FALSE(res.abort_reason.empty());
  EXPECT_EQ(res.model.parameters()[1], init.parameters()[1]);
  EXPECT_EQ(load_checkpoint(c.checkpoint_path).state.epoch, 0u);
  std::filesystem::remove(c.checkpoint_path);
}

TEST(Train, CheckpointAtEnd) {
  TrainConfig c = tiny_config();
  c.epochs = 2;
  c.checkpoint_path = std::filesystem::temp_directory_path() / "aircomp_end.ckpt";
  const TrainResult res = train(c);
  const Checkpoint ck = load_checkpoint(c.checkpoint_path);
  EXPECT_EQ(ck.model, res.model);
  EXPECT_EQ(ck.state.epoch, 2u);
  EXPECT_EQ(ck.state.seed, c.seed);
  std::filesystem::remove(c.checkpoint_path);
}

TEST(Train, LogCsv) {
  TrainLog log;
  log.epochs.push_back({0, 1, 0.01, -0.5, 0.6});
  log.epochs.push_back({1, 2, 0.009, -0.7, 0.7});
  const auto path = std::filesystem::temp_directory_path() / "aircomp_train_log.csv";
  write_train_log_csv(log, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# aircomp-csv v1 kind=train");
  std::getline(in, line);
  EXPECT_EQ(line, "epoch,stage,lr,mean_loss,mean_R");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2);
  std::filesystem::remove(path);
}

RateReport report(double r) { return {{0.5}, {r}, r}; }

TEST(Summary, Singleton) {
  const std::vector<RateReport> reps{report(1.25)};
  const EvalSummary s = summarize_reports(reps);
  EXPECT_EQ(s.count, 1u);
  EXPECT_DOUBLE_EQ(s.mean_rate, 1.25);
  for (double q : s.quantiles) EXPECT_DOUBLE_EQ(q, 1.25);
}

TEST(Summary, DuplicatedSample) {
  const std::vector<RateReport> reps(4, report(0.8));
  const EvalSummary s = summarize_reports(reps);
  for (double q : s.quantiles) EXPECT_DOUBLE_EQ(q, 0.8);
}

TEST(Summary, MeanAndQuantiles) {
  std::vector<RateReport> reps;
  double sum = 0.0;
  for (int i = 0; i < 21; ++i) {
    reps.push_back(report(0.1 * ((i * 8) % 21)));
    sum += 0.1 * ((i * 8) % 21);
  }
  const EvalSummary s = summarize_reports(reps);
  EXPECT_NEAR(s.mean_rate, sum / 21.0, 1e-15);
  EXPECT_NEAR(s.quantiles[0], 0.1, 1e-12);
  EXPECT_NEAR(s.quantiles[2], 1.0, 1e-12);
  EXPECT_NEAR(s.quantiles[4], 1.9, 1e-12);
  EXPECT_THROW(summarize_reports({}), ValidationError);
}

TEST(Summary, EvaluateMatchesHandAverage) {
  const UdglModel m(UdglConfig::tiny(), 4);
  const auto set = make_heldout_set(tiny_config());
  double sum = 0.0;
  for (const auto& r : set) sum += weighted_sum_rate(udgl_forward(m, r), r).weighted_sum;
  EXPECT_NEAR(evaluate(m, set).mean_rate, sum / static_cast<double>(set.size()), 1e-12);
}

}  // namespace
}  // namespace aircomp
