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

#include "aircomp/errors.hpp"

namespace aircomp {

CVec optimal_receive_beamformer(std::size_t k, const std::vector<Complex>& u,
                                const NetworkRealization& r) {
  if (u.size() != r.num_devices()) throw ValidationError("beamformer: transmit scalar count mismatch");
  if (!(r.noise(k) > 0.0)) throw ValidationError("beamformer: noise power must be positive");
  const std::size_t m = r.antennas(k);
  linalg::CMat a = linalg::CMat::identity(m, r.noise(k));
  CVec b(m);
  for (std::size_t d = 0; d < r.num_devices(); ++d) {
    const CVec& h = r.channel(d, k);
    linalg::outer_accum_into(h, std::norm(u[d]), a);
    if (r.cluster_of[d] == k) {
      for (std::size_t i = 0; i < m; ++i) b[i] += u[d] * h[i];
    }
  }
  return linalg::Cholesky(a).solve(b);
}

std::vector<CVec> optimal_receive_beamformers(const std::vector<Complex>& u,
                                              const NetworkRealization& r) {
  std::vector<CVec> v;
  v.reserve(r.num_clusters());
  for (std::size_t k = 0; k < r.num_clusters(); ++k) v.push_back(optimal_receive_beamformer(k, u, r));
  return v;
}

PhaseAlignment optimal_phase(const CVec& v, const CVec& h) {
  const Complex hv = linalg::inner(h, v);
  const double mag = std::abs(hv);
  if (mag < 1e-12) return {Complex(1.0, 0.0), true};
  return {hv / mag, false};
}

std::vector<Complex> align_phases(const std::vector<Complex>& u, const std::vector<CVec>& v,
                                  const NetworkRealization& r) {
  std::vector<Complex> out(u.size());
  for (std::size_t d = 0; d < u.size(); ++d) {
    const std::size_t k = r.cluster_of[d];
    out[d] = std::abs(u[d]) * optimal_phase(v[k], r.channel(d, k)).phase;
  }
  return out;
}

std::vector<Complex> full_power_scalars(const NetworkRealization& r) {
  std::vector<Complex> u(r.num_devices());
  for (std::size_t d = 0; d < u.size(); ++d) u[d] = std::sqrt(r.max_power(d));
  return u;
}

}  // namespace aircomp
