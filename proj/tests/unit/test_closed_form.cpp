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

#include "aircomp/closed_form.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "aircomp/errors.hpp"
#include "aircomp/metrics.hpp"
#include "test_support.hpp"

namespace aircomp {
namespace {

using namespace std::complex_literals;
using testing::normalized_instance;
using testing::random_scalars;

// Central-difference gradient of MSE_k over (Re v, Im v).
std::vector<double> mse_gradient(std::size_t k, const TransceiverStrategy& s, const NetworkRealization& r) {
  std::vector<double> x(s.v[k].reals().begin(), s.v[k].reals().end());
  auto f = [&](const std::vector<double>& xs) {
    TransceiverStrategy t = s;
    std::copy(xs.begin(), xs.end(), t.v[k].reals().begin());
    return analytic_mse(k, t, r);
  };
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = testing::central_difference(f, x, i, 1e-5);
  return g;
}

TEST(ReceiveBeamformer, ScalarLink) {
  const NetworkRealization r = testing::single_link(1.0, 1.0, 1.0);
  const CVec v = optimal_receive_beamformer(0, {1.0}, r);
  EXPECT_NEAR(std::abs(v[0] - 0.5), 0.0, 1e-15);
}

TEST(ReceiveBeamformer, SilentDevicesGiveZero) {
  const NetworkRealization r = normalized_instance(3, 2, 4, 2);
  for (const CVec& v : optimal_receive_beamformers(std::vector<Complex>(6), r)) {
    EXPECT_EQ(v.squared_norm(), 0.0);
  }
}

TEST(ReceiveBeamformer, Stationary) {
  std::mt19937_64 rng(1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const NetworkRealization r = normalized_instance(3, 3, 4, seed);
    const TransceiverStrategy s{random_scalars(r, rng), optimal_receive_beamformers(random_scalars(r, rng), r)};
    TransceiverStrategy opt{s.u, optimal_receive_beamformers(s.u, r)};
    for (std::size_t k = 0; k < 3; ++k) {
      double norm = 0.0;
      for (double gi : mse_gradient(k, opt, r)) norm += gi * gi;
      EXPECT_LE(std::sqrt(norm), 1e-6 * (1.0 + opt.v[k].norm()));
    }
  }
}

TEST(ReceiveBeamformer, DominatesPerturbations) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  const NetworkRealization r = normalized_instance(2, 3, 3, 5);
  const TransceiverStrategy s{random_scalars(r, rng), optimal_receive_beamformers(random_scalars(r, rng), r)};
  TransceiverStrategy opt{s.u, optimal_receive_beamformers(s.u, r)};
  for (std::size_t k = 0; k < 2; ++k) {
    const double best = analytic_mse(k, opt, r);
    for (int trial = 0; trial < 100; ++trial) {
      TransceiverStrategy p = opt;
      const double scale = std::pow(10.0, -4.0 + 4.0 * trial / 100.0);
      for (auto& z : p.v[k]) z += scale * Complex(g(rng), g(rng));
      EXPECT_GE(analytic_mse(k, p, r), best - 1e-12);
    }
  }
}

TEST(ReceiveBeamformer, RejectsBadInput) {
  const NetworkRealization r = normalized_instance(1, 2, 2, 1);
  EXPECT_THROW(optimal_receive_beamformer(0, {1.0}, r), ValidationError);
}

TEST(Phase, AlreadyAligned) {
  const PhaseAlignment p = optimal_phase(CVec{2.0, 0.0}, CVec{3.0, 0.0});
  EXPECT_FALSE(p.degenerate);
  EXPECT_NEAR(std::abs(p.phase - 1.0), 0.0, 1e-15);
}

TEST(Phase, QuarterTurn) {
  const CVec v{1.0i};
  const CVec h{1.0};
  const PhaseAlignment p = optimal_phase(v, h);
  EXPECT_NEAR(std::abs(p.phase - 1.0i), 0.0, 1e-15);
  const Complex eff = linalg::inner(v, h) * p.phase;
  EXPECT_NEAR(eff.imag(), 0.0, 1e-15);
  EXPECT_NEAR(eff.real(), 1.0, 1e-15);
}

TEST(Phase, Degenerate) {
  const PhaseAlignment p = optimal_phase(CVec{0.0, 0.0}, CVec{1.0, 1.0});
  EXPECT_TRUE(p.degenerate);
  EXPECT_EQ(p.phase, Complex(1.0));
}

TEST(Phase, GridNeverImproves) {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const NetworkRealization r = normalized_instance(2, 3, 3, seed);
    TransceiverStrategy s{random_scalars(r, rng), optimal_receive_beamformers(random_scalars(r, rng), r)};
    s.u = align_phases(s.u, s.v, r);
    for (std::size_t d = 0; d < r.num_devices(); ++d) {
      const std::size_t k = r.cluster_of[d];
      const double base = analytic_mse(k, s, r);
      for (int i = 0; i < 1024; ++i) {
        TransceiverStrategy t = s;
        t.u[d] = std::polar(std::abs(s.u[d]), 2.0 * std::numbers::pi * i / 1024.0);
        EXPECT_GE(analytic_mse(k, t, r), base - 1e-9);
      }
    }
  }
}

TEST(Phase, AlignKeepsModuli) {
  std::mt19937_64 rng(4);
  const NetworkRealization r = normalized_instance(2, 2, 2, 3);
  const std::vector<Complex> u = random_scalars(r, rng);
  const std::vector<Complex> a = align_phases(u, optimal_receive_beamformers(u, r), r);
  for (std::size_t d = 0; d < u.size(); ++d) EXPECT_NEAR(std::abs(a[d]), std::abs(u[d]), 1e-15);
}

TEST(FullPower, Moduli) {
  ScenarioConfig cfg = ScenarioConfig::uniform(2, 2, 1);
  cfg.max_power = {4.0, 0.25};
  const NetworkRealization r = sample_topology(cfg, 1);
  EXPECT_EQ(full_power_scalars(r), (std::vector<Complex>{2.0, 2.0, 0.5, 0.5}));
}

}  // namespace
}  // namespace aircomp
