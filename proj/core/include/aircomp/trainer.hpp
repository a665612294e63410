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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aircomp/autodiff.hpp"
#include "aircomp/metrics.hpp"
#include "aircomp/scenario.hpp"
#include "aircomp/udgl.hpp"

namespace aircomp {

enum class Optimizer { sgd, adam };

struct TrainConfig {
  std::size_t epochs = 3000;
  std::size_t batch_size = 64;
  std::size_t dataset_size = 5000;
  std::size_t heldout_size = 500;
  double lr0 = 5e-5;
  double decay = 0.9;
  std::size_t decay_interval = 100;
  double stage1_fraction = 0.6;
  std::uint64_t seed = 1;
  Optimizer optimizer = Optimizer::sgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double max_grad_norm = 0.0;  // 0 disables clipping
  std::size_t log_every = 10;
  std::filesystem::path checkpoint_path;  // written on abort and at the end when set
  ScenarioConfig scenario = ScenarioConfig::defaults();
  UdglConfig model;

  void validate() const;
};

// lr0 * decay^floor(epoch / decay_interval).
double learning_rate(const TrainConfig& cfg, std::size_t epoch);
// 1 for the first ceil(stage1_fraction * epochs) epochs, then 2.
std::uint32_t stage_of_epoch(const TrainConfig& cfg, std::size_t epoch);

// Training realizations are regenerated from (seed, stream 1, index); the
// held-out set uses stream 2.
std::vector<NetworkRealization> make_training_set(const TrainConfig& cfg);
std::vector<NetworkRealization> make_heldout_set(const TrainConfig& cfg);

// Per-sample rate objective on the tape: sum_k c_k log2(1/MSE_k), clamped
// at zero per cluster in stage 2.
ad::Var rate_objective(const std::vector<ad::Var>& mse, const NetworkRealization& r, std::uint32_t stage);

struct BatchResult {
  double loss = 0.0;       // -mean R under the stage's objective
  double mean_rate = 0.0;  // mean clamped R
  std::vector<ad::Array> grads;  // aligned with model.parameters(); empty for forward-only
};

// Throws NonFiniteError naming the sample when a forward value is not finite.
BatchResult batch_loss(const UdglModel& model, std::span<const NetworkRealization> batch, std::uint32_t stage,
                       bool with_grad, std::size_t first_sample_id = 0);

struct EpochRecord {
  std::size_t epoch = 0;
  std::uint32_t stage = 1;
  double lr = 0.0;
  double mean_loss = 0.0;
  double mean_rate = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  UdglModel model;
  TrainLog log;
  bool aborted = false;
  std::string abort_reason;
};

// Trains from init (fine-tuning) or a fresh model seeded from cfg.seed; zero
// epochs return the starting model unchanged. On a
// non-finite loss or gradient the run stops and returns the last good
// parameters with aborted set.
TrainResult train(const TrainConfig& cfg, const UdglModel* init = nullptr);

// Columns: epoch, stage, lr, mean_loss, mean_R.
void write_train_log_csv(const TrainLog& log, const std::filesystem::path& path);

struct EvalSummary {
  std::size_t count = 0;
  double mean_rate = 0.0;
  std::vector<double> mean_cluster_rates;
  std::array<double, 5> quantiles{};  // 5%, 25%, 50%, 75%, 95% of R
};

inline constexpr std::array<double, 5> kSummaryQuantiles{0.05, 0.25, 0.5, 0.75, 0.95};

// Aggregates rate reports; throws ValidationError on an empty set.
EvalSummary summarize_reports(std::span<const RateReport> reports);
EvalSummary evaluate(const UdglModel& model, std::span<const NetworkRealization> set);

}  // namespace aircomp
