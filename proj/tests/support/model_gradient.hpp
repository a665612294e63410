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

#include <algorithm>
#include <cmath>
#include <string>

#include "aircomp/trainer.hpp"
#include "aircomp/udgl.hpp"
#include "gradient_check.hpp"

namespace aircomp::testing {

inline double model_objective(const UdglModel& model, const NetworkRealization& r, std::uint32_t stage) {
  ad::Tape tape;
  const auto params = bind_parameters(tape, model, false);
  const UdglGraph g = build_udgl_graph(tape, model, params, r, udgl_initial_scalars(r));
  return rate_objective(g.mse, r, stage).value().data[0];
}

// Compares tape gradients of the per-sample objective with central
// differences for every stride-th parameter entry. Needs
// detach_coefficients = false so the tape sees the same function as the
// finite differences.
inline GradientCheck model_gradient_check(const UdglModel& model, const NetworkRealization& r,
                                          std::uint32_t stage, std::size_t stride = 1,
                                          double rel_step = 1e-5) {
  ad::Tape tape;
  const auto params = bind_parameters(tape, model, true);
  const UdglGraph g = build_udgl_graph(tape, model, params, r, udgl_initial_scalars(r));
  tape.backward(rate_objective(g.mse, r, stage));

  GradientCheck res;
  UdglModel probe = model;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const ad::Array& adj = params[p].grad();
    auto& values = probe.parameters()[p].data;
    std::vector<std::size_t> picked;
    std::vector<double> fd;
    for (std::size_t i = p % stride; i < values.size(); i += stride) {
      const double x0 = values[i];
      const double h = rel_step * std::max(1.0, std::abs(x0));
      values[i] = x0 + h;
      const double fp = model_objective(probe, r, stage);
      values[i] = x0 - h;
      const double fm = model_objective(probe, r, stage);
      values[i] = x0;
      picked.push_back(i);
      fd.push_back((fp - fm) / (2.0 * h));
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < adj.size(); ++i) scale = std::max(scale, std::abs(adj.data[i]));
    for (double x : fd) scale = std::max(scale, std::abs(x));
    for (std::size_t j = 0; j < picked.size(); ++j) {
      const double a = adj.data[picked[j]];
      const double err = std::abs(a - fd[j]) / std::max({std::abs(fd[j]), 1e-3 * scale, 1e-12});
      ++res.entries;
      if (err > res.max_error) {
        res.max_error = err;
        res.worst = "parameter " + std::to_string(p) + " entry " + std::to_string(picked[j]) + ": adjoint " +
                    std::to_string(a) + " fd " + std::to_string(fd[j]);
      }
    }
  }
  return res;
}

}  // namespace aircomp::testing
