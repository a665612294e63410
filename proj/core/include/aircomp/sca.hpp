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

// Log-barrier interior-point settings for the convexified transmit problem.
struct BarrierOptions {
  double gap_tolerance = 1e-8;     // stop once (#barrier terms) / tau falls below
  double tau_growth = 10.0;
  double initial_tau = 1.0;
  double newton_tolerance = 1e-10; // on lambda^2 / 2
  int max_newton_per_center = 200;
  double armijo_slope = 0.25;
  double backtrack = 0.5;
  double start_shrink = 0.999;
};

struct ScaResult {
  std::vector<Complex> u;
  std::vector<double> t;
  double objective = 0.0;
  int newton_iterations = 0;
  int centering_steps = 0;
};

// Transmit-scalar subproblem with every beamformer held fixed. Solves
//
//   max  sum_k c_k log2 t_k
//   s.t. |u_d|^2 <= P_d,  t_k > 0,
//        || [g_kd u_d - delta_kd]_d ; (s_k - 1)/2 || <= (s_k + 1)/2,
//        s_k = 2/t_k° - t_k/(t_k°)^2 - sigma_k^2 |v_k|^2,
//
// where g_kd = v_k^H h_{d,k} and c_k = w_k / (Q_k + log2 N_k). The cone is
// the hyperbolic form of sum_d |g_kd u_d - delta_kd|^2 <= s_k over the real
// and imaginary parts of u, so its log barrier is -ln(s_k - sum_d |.|^2).
class TransmitSubproblem {
 public:
  TransmitSubproblem(const NetworkRealization& r, const std::vector<CVec>& v);

  // One convex solve at approximation point t_approx starting from u0.
  // Throws FeasibilityError if no strictly feasible start exists near u0 and
  // IterationLimitError if the first Newton centering does not converge.
  ScaResult solve(const std::vector<Complex>& u0, const std::vector<double>& t_approx,
                  const BarrierOptions& opts = {}) const;

  // MSE_k(u) with the fixed beamformers.
  std::vector<double> mse(const std::vector<Complex>& u) const;

  double objective(const std::vector<double>& t) const;

  std::size_t num_clusters() const noexcept { return k_count_; }
  std::size_t num_devices() const noexcept { return d_count_; }

 private:
  bool strictly_feasible(const std::vector<double>& x, const std::vector<double>& t_approx) const;
  double barrier_value(const std::vector<double>& x, const std::vector<double>& t_approx,
                       double tau) const;

  std::size_t k_count_ = 0;
  std::size_t d_count_ = 0;
  std::vector<std::vector<Complex>> gain_;  // gain_[k][d] = v_k^H h_{d,k}
  std::vector<double> noise_term_;          // sigma_k^2 |v_k|^2
  std::vector<double> coef_;                // c_k
  std::vector<double> pmax_;
  std::vector<std::size_t> cluster_of_;
};

struct ScaLoopResult {
  std::vector<Complex> u;
  std::vector<double> t;
  std::vector<double> objectives;  // subproblem optimum after each pass
  int passes = 0;
};

// Repeats the convex solve with t_approx <- t* and u <- u* until the
// objective gain drops below tol (or max_passes). The first approximation
// point is t_k° = 1 / MSE_k(u0).
ScaLoopResult run_sca(const TransmitSubproblem& sub, const std::vector<Complex>& u0, double tol,
                      int max_passes, const BarrierOptions& opts = {});

}  // namespace aircomp
