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

#include "aircomp/ao_solver.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include <spdlog/spdlog.h>

#include "aircomp/closed_form.hpp"
#include "aircomp/errors.hpp"

namespace aircomp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double clamped_rate(const std::vector<double>& mse, const NetworkRealization& r) {
  double total = 0.0;
  for (std::size_t k = 0; k < mse.size(); ++k) {
    total += r.config.weights[k] * aircomp_rate(mse[k], r.config.quant_bits[k], r.cluster_size(k));
  }
  return total;
}

}  // namespace

TransceiverStrategy random_initial_strategy(const NetworkRealization& r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  TransceiverStrategy s;
  s.u.resize(r.num_devices());
  for (std::size_t d = 0; d < s.u.size(); ++d) s.u[d] = std::polar(std::sqrt(r.max_power(d)), angle(rng));
  s.v = optimal_receive_beamformers(s.u, r);
  return s;
}

AoResult alternating_optimize(const NetworkRealization& r, const TransceiverStrategy& init,
                              const AoOptions& opts) {
  init.check_dimensions(r);
  if (!init.satisfies_power(r)) throw ValidationError("alternating_optimize: initial strategy violates power limits");

  AoResult out;
  AoTrace& trace = out.trace;
  std::vector<Complex> u = init.u;
  for (std::size_t d = 0; d < u.size(); ++d) {
    if (std::norm(u[d]) > r.max_power(d)) u[d] *= std::sqrt(r.max_power(d)) / std::abs(u[d]);
  }

  const RateReport init_report = weighted_sum_rate(init, r);
  double r_prev = init_report.weighted_sum;
  double obj_outer_prev = unclamped_objective(init_report.mse, r);
  trace.outer_rates.push_back(r_prev);
  std::vector<CVec> v;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    auto t0 = Clock::now();
    v = optimal_receive_beamformers(u, r);
    trace.beamforming_seconds += seconds_since(t0);

    t0 = Clock::now();
    const TransmitSubproblem sub(r, v);
    const auto mse0 = sub.mse(u);
    double r_cur = clamped_rate(mse0, r);
    std::vector<double> t_approx(mse0.size());
    for (std::size_t k = 0; k < mse0.size(); ++k) t_approx[k] = 1.0 / mse0[k];
    double obj_prev = sub.objective(t_approx);

    for (int inner = 0; inner < opts.max_inner; ++inner) {
      ScaResult res;
      try {
        res = sub.solve(u, t_approx, opts.barrier);
      } catch (const SolverError& e) {
        spdlog::debug("AO: transmit step stopped early: {}", e.what());
        break;
      }
      ++trace.inner_iterations;
      const double r_new = clamped_rate(sub.mse(res.u), r);
      if (r_new < r_cur) {
        ++trace.rejected_inner_steps;
        break;
      }
      u = std::move(res.u);
      t_approx = res.t;
      r_cur = r_new;
      trace.inner_objectives.push_back(res.objective);
      const bool done = std::abs(res.objective - obj_prev) < opts.epsilon;
      obj_prev = res.objective;
      if (done) break;
    }
    trace.transmit_seconds += seconds_since(t0);

    ++trace.outer_iterations;
    trace.outer_rates.push_back(r_cur);
    // The clamped rate alone stalls at zero while every MSE exceeds 1, so the
    // unclamped objective has to settle as well.
    const double obj_outer = unclamped_objective(sub.mse(u), r);
    const bool settled = std::abs(obj_outer - obj_outer_prev) < opts.epsilon;
    obj_outer_prev = obj_outer;
    if (settled && std::abs(r_cur - r_prev) < opts.epsilon) {
      trace.converged = true;
      break;
    }
    r_prev = r_cur;
  }
  if (!trace.converged) trace.hit_iteration_cap = true;

  out.strategy.u = u;
  out.strategy.v = optimal_receive_beamformers(u, r);
  const double r_final = weighted_sum_rate(out.strategy, r).weighted_sum;
  // The closing beamformer update can only lower each MSE.
  trace.outer_rates.push_back(r_final);
  return out;
}

}  // namespace aircomp
