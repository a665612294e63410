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
#include <string>

#include <spdlog/spdlog.h>

#include "aircomp/errors.hpp"

namespace aircomp {

using linalg::inner;

bool TransceiverStrategy::satisfies_power(const NetworkRealization& r, double slack) const {
  if (u.size() != r.num_devices()) return false;
  for (std::size_t d = 0; d < u.size(); ++d) {
    if (std::norm(u[d]) > r.max_power(d) + slack) return false;
  }
  return true;
}

void TransceiverStrategy::check_dimensions(const NetworkRealization& r) const {
  if (u.size() != r.num_devices()) {
    throw ValidationError("strategy has " + std::to_string(u.size()) + " transmit scalars, network has " +
                          std::to_string(r.num_devices()) + " devices");
  }
  if (v.size() != r.num_clusters()) {
    throw ValidationError("strategy has " + std::to_string(v.size()) + " beamformers, network has " +
                          std::to_string(r.num_clusters()) + " clusters");
  }
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k].size() != r.antennas(k)) throw ValidationError("beamformer length mismatch in cluster " + std::to_string(k));
  }
  if (!r.has_channels()) throw ValidationError("realization has no channels");
}

double analytic_mse(std::size_t k, const TransceiverStrategy& s, const NetworkRealization& r) {
  s.check_dimensions(r);
  const CVec& v = s.v[k];
  double mse = r.noise(k) * v.squared_norm();
  for (std::size_t d = 0; d < r.num_devices(); ++d) {
    const Complex eff = inner(v, r.channel(d, k)) * s.u[d];
    mse += r.cluster_of[d] == k ? std::norm(eff - 1.0) : std::norm(eff);
  }
  return mse;
}

double analytic_mse_quadratic(std::size_t k, const TransceiverStrategy& s,
                              const NetworkRealization& r) {
  s.check_dimensions(r);
  const std::size_t m = r.antennas(k);
  linalg::CMat a = linalg::CMat::identity(m, r.noise(k));
  CVec b(m);
  for (std::size_t d = 0; d < r.num_devices(); ++d) {
    const CVec& h = r.channel(d, k);
    linalg::outer_accum_into(h, std::norm(s.u[d]), a);
    if (r.cluster_of[d] == k) {
      for (std::size_t i = 0; i < m; ++i) b[i] += s.u[d] * h[i];
    }
  }
  const CVec& v = s.v[k];
  const double quad = inner(v, linalg::matvec(a, v)).real();
  const double cross = inner(v, b).real();
  return quad - 2.0 * cross + static_cast<double>(r.cluster_size(k));
}

double empirical_mse(std::size_t k, const TransceiverStrategy& s, const NetworkRealization& r,
                     std::size_t num_samples, std::uint64_t seed) {
  s.check_dimensions(r);
  if (num_samples < 1) throw ValidationError("empirical_mse: num_samples must be >= 1");
  const std::size_t dev_count = r.num_devices();
  const std::size_t m = r.antennas(k);
  const CVec& v = s.v[k];

  // y_k = sum_d h_{d,k} u_d x_d + z_k, so v^H y_k = sum_d (v^H h u)_d x_d + v^H z_k.
  std::vector<Complex> gain(dev_count);
  for (std::size_t d = 0; d < dev_count; ++d) gain[d] = inner(v, r.channel(d, k)) * s.u[d];

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, std::sqrt(0.5));
  const double noise_amp = std::sqrt(r.noise(k));
  double acc = 0.0;
  for (std::size_t t = 0; t < num_samples; ++t) {
    Complex target{};
    Complex estimate{};
    for (std::size_t d = 0; d < dev_count; ++d) {
      const Complex x(unit(rng), unit(rng));
      if (r.cluster_of[d] == k) target += x;
      estimate += gain[d] * x;
    }
    for (std::size_t i = 0; i < m; ++i) {
      const Complex z = noise_amp * Complex(unit(rng), unit(rng));
      estimate += std::conj(v[i]) * z;
    }
    acc += std::norm(target - estimate);
  }
  return acc / static_cast<double>(num_samples);
}

double aircomp_rate(double mse, std::uint32_t quant_bits, std::size_t devices) {
  if (!(mse >= 0.0)) throw ValidationError("aircomp_rate: mse must be non-negative");
  if (mse < kMinReportedMse) {
    spdlog::warn("aircomp_rate: mse {} below {}; reporting capped rate", mse, kMinReportedMse);
    mse = kMinReportedMse;
  }
  const double denom = static_cast<double>(quant_bits) + std::log2(static_cast<double>(devices));
  return std::max(0.0, std::log2(1.0 / mse)) / denom;
}

double rate_scale(std::size_t k, const NetworkRealization& r) {
  const auto& cfg = r.config;
  return cfg.weights[k] /
         (static_cast<double>(cfg.quant_bits[k]) + std::log2(static_cast<double>(r.cluster_size(k))));
}

RateReport weighted_sum_rate(const TransceiverStrategy& s, const NetworkRealization& r) {
  RateReport rep;
  const std::size_t k_count = r.num_clusters();
  rep.mse.resize(k_count);
  rep.rate.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    rep.mse[k] = analytic_mse(k, s, r);
    rep.rate[k] = aircomp_rate(rep.mse[k], r.config.quant_bits[k], r.cluster_size(k));
    rep.weighted_sum += r.config.weights[k] * rep.rate[k];
  }
  return rep;
}

double unclamped_objective(const std::vector<double>& mse, const NetworkRealization& r) {
  double obj = 0.0;
  for (std::size_t k = 0; k < mse.size(); ++k) obj += rate_scale(k, r) * std::log2(1.0 / mse[k]);
  return obj;
}

}  // namespace aircomp
