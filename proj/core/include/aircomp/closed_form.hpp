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

#include <cstddef>
#include <vector>

#include "aircomp/metrics.hpp"
#include "aircomp/scenario.hpp"

namespace aircomp {

// MMSE receive beamformer for cluster k given every transmit scalar:
// v_k = [sum_{l, n_l} |u|^2 h h^H + sigma_k^2 I]^{-1} sum_{n_k} u h_{n_k,k}.
CVec optimal_receive_beamformer(std::size_t k, const std::vector<Complex>& u,
                                const NetworkRealization& r);
std::vector<CVec> optimal_receive_beamformers(const std::vector<Complex>& u,
                                              const NetworkRealization& r);

struct PhaseAlignment {
  Complex phase{1.0, 0.0};
  bool degenerate = false;
};

// Unit-modulus rotation h^H v / |h^H v| that makes v^H h u real positive.
// Returns phase 1 with degenerate = true when |h^H v| < 1e-12.
PhaseAlignment optimal_phase(const CVec& v, const CVec& h);

// Keeps |u_d| and replaces every phase with the aligned one for its own
// cluster's beamformer.
std::vector<Complex> align_phases(const std::vector<Complex>& u, const std::vector<CVec>& v,
                                  const NetworkRealization& r);

// u_d = sqrt(P_d), zero phase.
std::vector<Complex> full_power_scalars(const NetworkRealization& r);

}  // namespace aircomp
