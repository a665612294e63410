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

#include "aircomp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "aircomp/closed_form.hpp"

namespace aircomp {

BaselineResult fpt_strategy(const NetworkRealization& r, const BaselineOptions& opts) {
  BaselineResult out;
  std::vector<Complex> u = full_power_scalars(r);
  std::vector<CVec> v = optimal_receive_beamformers(u, r);
  double prev = weighted_sum_rate({u, v}, r).weighted_sum;
  out.rates.push_back(prev);
  for (int round = 0; round < opts.max_rounds; ++round) {
    u = align_phases(u, v, r);
    v = optimal_receive_beamformers(u, r);
    const double cur = weighted_sum_rate({u, v}, r).weighted_sum;
    out.rates.push_back(cur);
    ++out.rounds;
    const bool done = std::abs(cur - prev) < opts.tolerance;
    prev = cur;
    if (done) break;
  }
  out.strategy = {std::move(u), std::move(v)};
  return out;
}

std::vector<Complex> apt_scalars(const std::vector<CVec>& v, const NetworkRealization& r,
                                 int* degenerate) {
  std::vector<Complex> u(r.num_devices());
  int bad = 0;
  for (std::size_t k = 0; k < r.num_clusters(); ++k) {
    const std::size_t begin = r.cluster_offset[k];
    const std::size_t end = r.cluster_offset[k + 1];
    std::vector<Complex> hv(end - begin);
    double min_mag = std::numeric_limits<double>::infinity();
    for (std::size_t d = begin; d < end; ++d) {
      hv[d - begin] = linalg::inner(r.channel(d, k), v[k]);
      const double mag = std::abs(hv[d - begin]);
      if (mag > 0.0) min_mag = std::min(min_mag, mag);
    }
    for (std::size_t d = begin; d < end; ++d) {
      const double mag2 = std::norm(hv[d - begin]);
      if (!(mag2 > 0.0)) {
        ++bad;
        spdlog::warn("APT: zero effective channel for device {}; power set to 0", d);
        u[d] = 0.0;
        continue;
      }
      u[d] = std::sqrt(r.max_power(d)) * min_mag * hv[d - begin] / mag2;
    }
  }
  if (degenerate) *degenerate = bad;
  return u;
}

BaselineResult apt_strategy(const NetworkRealization& r, const BaselineOptions& opts) {
  BaselineResult out;
  std::vector<Complex> u = fpt_strategy(r, {opts.tolerance, 1}).strategy.u;
  std::vector<CVec> v = optimal_receive_beamformers(u, r);
  double best = -1.0;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int round = 0; round < opts.max_rounds; ++round) {
    int bad = 0;
    std::vector<Complex> u_next = apt_scalars(v, r, &bad);
    const double cur = weighted_sum_rate({u_next, v}, r).weighted_sum;
    out.rates.push_back(cur);
    ++out.rounds;
    if (cur > best) {
      best = cur;
      out.strategy = {u_next, v};
      out.degenerate_devices = bad;
    }
    const bool done = std::abs(cur - prev) < opts.tolerance;
    prev = cur;
    if (done) break;
    u = std::move(u_next);
    v = optimal_receive_beamformers(u, r);
  }
  return out;
}

}  // namespace aircomp
