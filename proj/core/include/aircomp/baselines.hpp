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

#include <vector>

#include "aircomp/metrics.hpp"
#include "aircomp/scenario.hpp"

namespace aircomp {

struct BaselineOptions {
  double tolerance = 1e-6;
  int max_rounds = 50;
};

struct BaselineResult {
  TransceiverStrategy strategy;
  std::vector<double> rates;  // weighted-sum rate after each round
  int rounds = 0;
  int degenerate_devices = 0;  // APT devices with zero effective channel
};

// Full-power transmission: |u| = sqrt(P) everywhere; phases and MMSE
// beamformers alternated until R settles.
BaselineResult fpt_strategy(const NetworkRealization& r, const BaselineOptions& opts = {});

// APT transmit scalars for fixed beamformers:
// u = sqrt(P) min_m |h_m^H v| h^H v / |h^H v|^2 within each cluster.
std::vector<Complex> apt_scalars(const std::vector<CVec>& v, const NetworkRealization& r,
                                 int* degenerate = nullptr);

// Adaptive-power transmission alternated with the MMSE beamformer, starting
// from the FPT phases. The returned v is the beamformer the scalars were
// computed against, so effective amplitudes are equal within each cluster.
BaselineResult apt_strategy(const NetworkRealization& r, const BaselineOptions& opts = {});

}  // namespace aircomp
