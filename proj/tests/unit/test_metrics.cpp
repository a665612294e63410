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

#include "aircomp/metrics.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <spdlog/spdlog.h>

#include "aircomp/errors.hpp"
#include "test_support.hpp"

namespace aircomp {
namespace {

using testing::normalized_instance;
using testing::random_beamformers;
using testing::random_scalars;
using testing::reference_mse;
using testing::reference_rate;

TEST(AnalyticMse, ZeroBeamformerLeavesDeviceCount) {
  ScenarioConfig cfg = ScenarioConfig::uniform(2, 3, 2);
  cfg.devices_per_cluster = {3, 4};
  const NetworkRealization r = generate_realization(cfg, 1);
  std::mt19937_64 rng(2);
  TransceiverStrategy s{random_scalars(r, rng), {CVec(2), CVec(2)}};
  EXPECT_DOUBLE_EQ(analytic_mse(0, s, r), 3.0);
  EXPECT_DOUBLE_EQ(analytic_mse(1, s, r), 4.0);
}

TEST(AnalyticMse, ScalarLink) {
  const NetworkRealization r = testing::single_link(1.0, 1.0, 1.0);
  const TransceiverStrategy s{{1.0}, {CVec{0.5}}};
  EXPECT_DOUBLE_EQ(analytic_mse(0, s, r), 0.5);
}

TEST(AnalyticMse, MatchesReferenceAndQuadraticForm) {
  std::mt19937_64 rng(4);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const NetworkRealization r = normalized_instance(3, 3, 4, seed);
    const TransceiverStrategy s{random_scalars(r, rng), random_beamformers(r, rng, 0.3)};
    for (std::size_t k = 0; k < 3; ++k) {
      const double ref = reference_mse(k, s.u, s.v, r);
      EXPECT_NEAR(analytic_mse(k, s, r), ref, 1e-12 * ref);
      EXPECT_NEAR(analytic_mse_quadratic(k, s, r), ref, 1e-10 * ref);
    }
  }
}

TEST(AnalyticMse, DimensionMismatch) {
  const NetworkRealization r = normalized_instance(2, 2, 2, 1);
  TransceiverStrategy s{{1.0, 1.0, 1.0}, {CVec(2), CVec(2)}};
  EXPECT_THROW(analytic_mse(0, s, r), ValidationError);
  s.u.push_back(1.0);
  s.v[1] = CVec(3);
  EXPECT_THROW(analytic_mse(0, s, r), ValidationError);
}

TEST(EmpiricalMse, PerfectAlignmentNoNoise) {
  const NetworkRealization r = testing::single_link(2.0, 0.0 + 1e-300, 1.0);
  const TransceiverStrategy s{{1.0}, {CVec{0.5}}};
  EXPECT_NEAR(empirical_mse(0, s, r, 1000, 3), 0.0, 1e-12);
}

TEST(EmpiricalMse, SilentNetworkEqualsDeviceCount) {
  const NetworkRealization r = normalized_instance(2, 4, 3, 5);
  const TransceiverStrategy s{std::vector<Complex>(8), {CVec(3), CVec(3)}};
  EXPECT_NEAR(empirical_mse(0, s, r, 200000, 9), 4.0, 0.05);
}

TEST(EmpiricalMse, ConvergesToAnalytic) {
  std::mt19937_64 rng(6);
  const NetworkRealization r = normalized_instance(2, 3, 3, 12);
  const TransceiverStrategy s{random_scalars(r, rng), random_beamformers(r, rng, 0.4)};
  const double exact = analytic_mse(1, s, r);
  const double coarse = std::abs(empirical_mse(1, s, r, 1000, 1) - exact);
  const double fine = std::abs(empirical_mse(1, s, r, 400000, 1) - exact);
  EXPECT_LT(fine, 0.01 * exact);
  EXPECT_LT(fine, coarse + 1e-3 * exact);
}

TEST(AircompRate, UnitMseIsZero) { EXPECT_EQ(aircomp_rate(1.0, 2, 5), 0.0); }

TEST(AircompRate, ClampedAboveOne) { EXPECT_EQ(aircomp_rate(2.0, 2, 5), 0.0); }

TEST(AircompRate, Arithmetic) { EXPECT_DOUBLE_EQ(aircomp_rate(0.25, 2, 4), 0.5); }

TEST(AircompRate, ZeroMseIsCapped) {
  spdlog::set_level(spdlog::level::off);
  const double r = aircomp_rate(0.0, 2, 1);
  spdlog::set_level(spdlog::level::info);
  EXPECT_TRUE(std::isfinite(r));
  EXPECT_DOUBLE_EQ(r, std::log2(1.0 / kMinReportedMse) / 2.0);
}

TEST(AircompRate, RejectsNegativeAndNan) {
  EXPECT_THROW(aircomp_rate(-1e-3, 2, 1), ValidationError);
  EXPECT_THROW(aircomp_rate(std::nan(""), 2, 1), ValidationError);
}

TEST(AircompRate, NeverNegative) {
  std::mt19937_64 rng(1);
  std::lognormal_distribution<double> mse(0.0, 4.0);
  for (int i = 0; i < 10000; ++i) EXPECT_GE(aircomp_rate(mse(rng), 1 + i % 4, 1 + i % 9), 0.0);
}

TEST(WeightedSumRate, ZeroWeights) {
  ScenarioConfig cfg = ScenarioConfig::uniform(2, 2, 2);
  cfg.weights = {0.0, 0.0};
  const NetworkRealization base = normalized_instance(2, 2, 2, 3);
  const NetworkRealization r = testing::with_channels(cfg, base.channels);
  std::mt19937_64 rng(3);
  const TransceiverStrategy s{random_scalars(r, rng), random_beamformers(r, rng, 0.3)};
  EXPECT_EQ(weighted_sum_rate(s, r).weighted_sum, 0.0);
}

TEST(WeightedSumRate, SingleCluster) {
  ScenarioConfig cfg = ScenarioConfig::uniform(1, 2, 2);
  cfg.weights = {1.7};
  cfg.noise_power = {0.05};
  const NetworkRealization base = normalized_instance(1, 2, 2, 8);
  const NetworkRealization r = testing::with_channels(cfg, base.channels);
  std::mt19937_64 rng(8);
  const TransceiverStrategy s{random_scalars(r, rng), random_beamformers(r, rng, 0.3)};
  const RateReport rep = weighted_sum_rate(s, r);
  EXPECT_DOUBLE_EQ(rep.weighted_sum, 1.7 * rep.rate[0]);
}

TEST(WeightedSumRate, Compositional) {
  std::mt19937_64 rng(10);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const NetworkRealization r = normalized_instance(5, 5, 8, seed, 0.01, 0.1);
    const TransceiverStrategy s{random_scalars(r, rng), random_beamformers(r, rng, 0.05)};
    const RateReport rep = weighted_sum_rate(s, r);
    double hand = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
      hand += r.config.weights[k] * aircomp_rate(analytic_mse(k, s, r), r.config.quant_bits[k], r.cluster_size(k));
      EXPECT_GE(rep.rate[k], 0.0);
    }
    EXPECT_NEAR(rep.weighted_sum, hand, 1e-12);
    EXPECT_NEAR(rep.weighted_sum, reference_rate(s.u, s.v, r), 1e-9);
  }
}

TEST(UnclampedObjective, MatchesRateWhenAllMseBelowOne) {
  const NetworkRealization r = normalized_instance(2, 2, 2, 1);
  const std::vector<double> mse{0.5, 0.125};
  const double expect = rate_scale(0, r) * 1.0 + rate_scale(1, r) * 3.0;
  EXPECT_NEAR(unclamped_objective(mse, r), expect, 1e-15);
  EXPECT_LT(unclamped_objective({4.0, 0.5}, r), 0.0);
}

TEST(Strategy, PowerCheck) {
  const NetworkRealization r = normalized_instance(1, 2, 1, 1);
  TransceiverStrategy s{{1.0, Complex(0.6, 0.8)}, {CVec(1)}};
  EXPECT_TRUE(s.satisfies_power(r));
  s.u[0] = 1.001;
  EXPECT_FALSE(s.satisfies_power(r));
}

}  // namespace
}  // namespace aircomp
