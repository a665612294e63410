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
#include <cstdint>
#include <vector>

#include "aircomp/complex_linalg.hpp"
#include "aircomp/scenario.hpp"

namespace aircomp {

// Per-device complex transmit scalars (global device index) and per-cluster
// receive beamformers.
struct TransceiverStrategy {
  std::vector<Complex> u;
  std::vector<CVec> v;

  // |u_d|^2 <= P_d + slack for every device.
  bool satisfies_power(const NetworkRealization& r, double slack = 1e-9) const;
  void check_dimensions(const NetworkRealization& r) const;

  friend bool operator==(const TransceiverStrategy&, const TransceiverStrategy&) = default;
};

struct RateReport {
  std::vector<double> mse;
  std::vector<double> rate;
  double weighted_sum = 0.0;
};

// MSE_k = sum_{n in k} |v^H h u - 1|^2 + sum_{l != k} sum_{n_l} |v^H h u|^2 + sigma^2 |v|^2.
double analytic_mse(std::size_t k, const TransceiverStrategy& s, const NetworkRealization& r);

// Same quantity through the quadratic form
// v^H [sum |u|^2 h h^H + sigma^2 I] v - 2 Re(v^H sum_{n in k} u h) + N_k.
double analytic_mse_quadratic(std::size_t k, const TransceiverStrategy& s,
                              const NetworkRealization& r);

// Monte-Carlo estimate of E|s_k - v^H y_k|^2 with x ~ CN(0, 1) per device and
// z ~ CN(0, sigma^2 I).
double empirical_mse(std::size_t k, const TransceiverStrategy& s, const NetworkRealization& r,
                     std::size_t num_samples, std::uint64_t seed);

// log2+(1/mse) / (Q + log2 N). mse == 0 yields the capped value at
// kMinReportedMse with a warning.
inline constexpr double kMinReportedMse = 1e-300;
double aircomp_rate(double mse, std::uint32_t quant_bits, std::size_t devices);

// w_k / (Q_k + log2 N_k).
double rate_scale(std::size_t k, const NetworkRealization& r);

RateReport weighted_sum_rate(const TransceiverStrategy& s, const NetworkRealization& r);

// Sum of rate_scale(k) * log2(1/MSE_k) without the positive-part clamp.
double unclamped_objective(const std::vector<double>& mse, const NetworkRealization& r);

}  // namespace aircomp
