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

#include <cstdint>
#include <vector>

#include "aircomp/metrics.hpp"
#include "aircomp/sca.hpp"
#include "aircomp/scenario.hpp"

namespace aircomp {

struct AoOptions {
  double epsilon = 1e-4;  // convergence threshold on R, both loops
  int max_outer = 200;
  int max_inner = 50;
  BarrierOptions barrier;
};

struct AoTrace {
  std::vector<double> outer_rates;       // clamped weighted-sum rate, start + after each outer pass
  std::vector<double> inner_objectives;  // convex subproblem optimum per SCA pass
  int outer_iterations = 0;
  int inner_iterations = 0;
  int rejected_inner_steps = 0;  // SCA steps that would have lowered the clamped rate
  bool converged = false;
  bool hit_iteration_cap = false;
  double beamforming_seconds = 0.0;
  double transmit_seconds = 0.0;
};

struct AoResult {
  TransceiverStrategy strategy;
  AoTrace trace;
};

// u_d = sqrt(P_d) e^{j theta_d} with theta_d uniform, v from the MMSE beamformer.
TransceiverStrategy random_initial_strategy(const NetworkRealization& r, std::uint64_t seed);

// Alternating optimization: MMSE receive beamforming, then the SCA loop over
// the transmit scalars, until both the weighted-sum rate and its unclamped
// counterpart move by less than epsilon. An SCA pass that would reduce the
// clamped rate is rolled back and ends the inner loop, so outer_rates is
// non-decreasing. Returns the best strategy found, with hit_iteration_cap set
// when max_outer was exhausted.
AoResult alternating_optimize(const NetworkRealization& r, const TransceiverStrategy& init,
                              const AoOptions& opts = {});

}  // namespace aircomp
