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

#include "aircomp/sca.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "aircomp/errors.hpp"

namespace aircomp {

namespace {

// In-place dense Cholesky (lower) for a symmetric n x n row-major matrix.
// Returns false if a pivot is not positive.
bool cholesky_factor(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
  }
  return true;
}

void cholesky_solve(const std::vector<double>& l, std::size_t n, std::vector<double>& b) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * b[k];
    b[i] = s / l[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l[k * n + ii] * b[k];
    b[ii] = s / l[ii * n + ii];
  }
}

constexpr double kLn2 = std::numbers::ln2;

}  // namespace

TransmitSubproblem::TransmitSubproblem(const NetworkRealization& r, const std::vector<CVec>& v)
    : k_count_(r.num_clusters()), d_count_(r.num_devices()), cluster_of_(r.cluster_of) {
  if (v.size() != k_count_) throw ValidationError("TransmitSubproblem: beamformer count mismatch");
  gain_.assign(k_count_, std::vector<Complex>(d_count_));
  noise_term_.resize(k_count_);
  coef_.resize(k_count_);
  pmax_.resize(d_count_);
  for (std::size_t k = 0; k < k_count_; ++k) {
    if (v[k].size() != r.antennas(k)) throw ValidationError("TransmitSubproblem: beamformer length mismatch");
    for (std::size_t d = 0; d < d_count_; ++d) gain_[k][d] = linalg::inner(v[k], r.channel(d, k));
    noise_term_[k] = r.noise(k) * v[k].squared_norm();
    coef_[k] = rate_scale(k, r);
  }
  for (std::size_t d = 0; d < d_count_; ++d) pmax_[d] = r.max_power(d);
}

std::vector<double> TransmitSubproblem::mse(const std::vector<Complex>& u) const {
  std::vector<double> out(k_count_);
  for (std::size_t k = 0; k < k_count_; ++k) {
    double m = noise_term_[k];
    for (std::size_t d = 0; d < d_count_; ++d) {
      const Complex e = gain_[k][d] * u[d] - (cluster_of_[d] == k ? 1.0 : 0.0);
      m += std::norm(e);
    }
    out[k] = m;
  }
  return out;
}

double TransmitSubproblem::objective(const std::vector<double>& t) const {
  double obj = 0.0;
  for (std::size_t k = 0; k < k_count_; ++k) obj += coef_[k] * std::log2(t[k]);
  return obj;
}

bool TransmitSubproblem::strictly_feasible(const std::vector<double>& x,
                                           const std::vector<double>& t_approx) const {
  const std::size_t toff = 2 * d_count_;
  for (std::size_t d = 0; d < d_count_; ++d) {
    const double p = pmax_[d] - x[2 * d] * x[2 * d] - x[2 * d + 1] * x[2 * d + 1];
    if (!(p > 0.0)) return false;
  }
  for (std::size_t k = 0; k < k_count_; ++k) {
    const double t = x[toff + k];
    if (!(t > 0.0)) return false;
    const double t0 = t_approx[k];
    double f = 2.0 / t0 - t / (t0 * t0) - noise_term_[k];
    for (std::size_t d = 0; d < d_count_; ++d) {
      const Complex e = gain_[k][d] * Complex(x[2 * d], x[2 * d + 1]) - (cluster_of_[d] == k ? 1.0 : 0.0);
      f -= std::norm(e);
    }
    if (!(f > 0.0)) return false;
  }
  return true;
}

double TransmitSubproblem::barrier_value(const std::vector<double>& x,
                                         const std::vector<double>& t_approx, double tau) const {
  const std::size_t toff = 2 * d_count_;
  double val = 0.0;
  for (std::size_t d = 0; d < d_count_; ++d) {
    val -= std::log(pmax_[d] - x[2 * d] * x[2 * d] - x[2 * d + 1] * x[2 * d + 1]);
  }
  for (std::size_t k = 0; k < k_count_; ++k) {
    const double t = x[toff + k];
    const double t0 = t_approx[k];
    double f = 2.0 / t0 - t / (t0 * t0) - noise_term_[k];
    for (std::size_t d = 0; d < d_count_; ++d) {
      const Complex e = gain_[k][d] * Complex(x[2 * d], x[2 * d + 1]) - (cluster_of_[d] == k ? 1.0 : 0.0);
      f -= std::norm(e);
    }
    val -= std::log(f) + std::log(t);
    val -= tau * coef_[k] * std::log(t) / kLn2;
  }
  return val;
}

ScaResult TransmitSubproblem::solve(const std::vector<Complex>& u0,
                                    const std::vector<double>& t_approx,
                                    const BarrierOptions& opts) const {
  if (u0.size() != d_count_ || t_approx.size() != k_count_) {
    throw ValidationError("TransmitSubproblem::solve: dimension mismatch");
  }
  for (double t0 : t_approx) {
    if (!(t0 > 0.0) || !std::isfinite(t0)) throw FeasibilityError("approximation point must be positive");
  }
  const std::size_t n = 2 * d_count_ + k_count_;
  const std::size_t toff = 2 * d_count_;
  std::vector<double> x(n);

  // Strictly feasible start: pull devices at the power limit slightly inside,
  // then place each t_k just below the largest value the cone admits.
  for (std::size_t d = 0; d < d_count_; ++d) {
    Complex u = u0[d];
    if (std::norm(u) >= pmax_[d] * (1.0 - 1e-6)) u *= opts.start_shrink * std::sqrt(pmax_[d]) / std::max(std::abs(u), 1e-300);
    x[2 * d] = u.real();
    x[2 * d + 1] = u.imag();
  }
  {
    std::vector<Complex> u(d_count_);
    for (std::size_t d = 0; d < d_count_; ++d) u[d] = {x[2 * d], x[2 * d + 1]};
    const auto m = mse(u);
    for (std::size_t k = 0; k < k_count_; ++k) {
      const double t0 = t_approx[k];
      // sum_d |.|^2 = m_k - noise_term, so s_k(t) - sum = (t_max - t) / t0^2.
      const double t_max = t0 * t0 * (2.0 / t0 - m[k]);
      if (!(t_max > 0.0)) {
        std::ostringstream os;
        os << "no strictly feasible start in cluster " << k << " (t_max = " << t_max << ")";
        throw FeasibilityError(os.str());
      }
      x[toff + k] = opts.start_shrink * t_max;
    }
  }
  if (!strictly_feasible(x, t_approx)) throw FeasibilityError("constructed start is not strictly feasible");

  const double barrier_terms = static_cast<double>(d_count_ + 2 * k_count_);
  double tau = opts.initial_tau;
  ScaResult res;
  std::vector<double> grad(n), hess(n * n), step(n), trial(n), cone_grad(n);

  bool limit_hit = false;
  for (;;) {
    int newton = 0;
    for (;; ++newton) {
      if (newton >= opts.max_newton_per_center) {
        // An earlier centered point already exists; keep the current iterate.
        if (res.centering_steps > 0) {
          limit_hit = true;
          break;
        }
        std::ostringstream os;
        os << "Newton centering did not converge in " << opts.max_newton_per_center
           << " iterations (tau = " << tau << ", clusters = " << k_count_ << ", devices = " << d_count_ << ")";
        throw IterationLimitError(os.str());
      }
      std::fill(grad.begin(), grad.end(), 0.0);
      std::fill(hess.begin(), hess.end(), 0.0);

      for (std::size_t d = 0; d < d_count_; ++d) {
        const double a = x[2 * d], b = x[2 * d + 1];
        const double p = pmax_[d] - a * a - b * b;
        grad[2 * d] += 2.0 * a / p;
        grad[2 * d + 1] += 2.0 * b / p;
        const double c2 = 4.0 / (p * p);
        hess[(2 * d) * n + 2 * d] += 2.0 / p + c2 * a * a;
        hess[(2 * d + 1) * n + 2 * d + 1] += 2.0 / p + c2 * b * b;
        hess[(2 * d) * n + 2 * d + 1] += c2 * a * b;
        hess[(2 * d + 1) * n + 2 * d] += c2 * a * b;
      }
      for (std::size_t k = 0; k < k_count_; ++k) {
        const double t = x[toff + k];
        const double t0 = t_approx[k];
        // -tau c log2 t - ln t
        const double ct = tau * coef_[k] / kLn2 + 1.0;
        grad[toff + k] += -ct / t;
        hess[(toff + k) * n + toff + k] += ct / (t * t);

        double f = 2.0 / t0 - t / (t0 * t0) - noise_term_[k];
        std::fill(cone_grad.begin(), cone_grad.end(), 0.0);
        for (std::size_t d = 0; d < d_count_; ++d) {
          const Complex g = gain_[k][d];
          const Complex e = g * Complex(x[2 * d], x[2 * d + 1]) - (cluster_of_[d] == k ? 1.0 : 0.0);
          f -= std::norm(e);
          const Complex w = std::conj(g) * e;
          cone_grad[2 * d] = -2.0 * w.real();
          cone_grad[2 * d + 1] = -2.0 * w.imag();
        }
        cone_grad[toff + k] = -1.0 / (t0 * t0);
        const double inv_f = 1.0 / f;
        const double inv_f2 = inv_f * inv_f;
        for (std::size_t i = 0; i < n; ++i) {
          const double gi = cone_grad[i];
          if (gi == 0.0) continue;
          grad[i] -= gi * inv_f;
          for (std::size_t j = 0; j < n; ++j) hess[i * n + j] += gi * cone_grad[j] * inv_f2;
        }
        for (std::size_t d = 0; d < d_count_; ++d) {
          const double curv = 2.0 * std::norm(gain_[k][d]) * inv_f;
          hess[(2 * d) * n + 2 * d] += curv;
          hess[(2 * d + 1) * n + 2 * d + 1] += curv;
        }
      }

      std::vector<double> factor = hess;
      if (!cholesky_factor(factor, n)) {
        double max_diag = 0.0;
        for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, hess[i * n + i]);
        factor = hess;
        for (std::size_t i = 0; i < n; ++i) factor[i * n + i] += 1e-12 * max_diag;
        if (!cholesky_factor(factor, n)) throw SolverError("barrier Hessian is not positive definite");
      }
      for (std::size_t i = 0; i < n; ++i) step[i] = -grad[i];
      cholesky_solve(factor, n, step);
      double slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) slope += grad[i] * step[i];
      if (-slope / 2.0 <= opts.newton_tolerance) break;

      const double f_now = barrier_value(x, t_approx, tau);
      double alpha = 1.0;
      double f_trial = f_now;
      bool moved = false;
      while (alpha > 1e-14) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + alpha * step[i];
        if (strictly_feasible(trial, t_approx)) {
          f_trial = barrier_value(trial, t_approx, tau);
          if (f_trial <= f_now + opts.armijo_slope * alpha * slope) {
            moved = true;
            break;
          }
        }
        alpha *= opts.backtrack;
      }
      ++res.newton_iterations;
      if (!moved) break;  // no further progress at working precision
      x.swap(trial);
      // Decrease below the rounding level of the barrier value: centered.
      if (f_now - f_trial <= 1e-15 * std::max(1.0, std::abs(f_now))) break;
    }
    ++res.centering_steps;
    if (limit_hit || barrier_terms / tau < opts.gap_tolerance) break;
    tau *= opts.tau_growth;
  }

  res.u.resize(d_count_);
  for (std::size_t d = 0; d < d_count_; ++d) {
    Complex u(x[2 * d], x[2 * d + 1]);
    if (std::norm(u) > pmax_[d]) u *= std::sqrt(pmax_[d]) / std::abs(u);
    res.u[d] = u;
  }
  res.t.assign(x.begin() + static_cast<std::ptrdiff_t>(toff), x.end());
  res.objective = objective(res.t);
  return res;
}

ScaLoopResult run_sca(const TransmitSubproblem& sub, const std::vector<Complex>& u0, double tol,
                      int max_passes, const BarrierOptions& opts) {
  ScaLoopResult out;
  out.u = u0;
  const auto m0 = sub.mse(u0);
  std::vector<double> t_approx(m0.size());
  for (std::size_t k = 0; k < m0.size(); ++k) t_approx[k] = 1.0 / m0[k];
  out.t = t_approx;
  double prev = sub.objective(t_approx);
  for (int pass = 0; pass < max_passes; ++pass) {
    ScaResult res = sub.solve(out.u, t_approx, opts);
    out.u = std::move(res.u);
    out.t = res.t;
    t_approx = res.t;
    out.objectives.push_back(res.objective);
    ++out.passes;
    const double gain = res.objective - prev;
    prev = res.objective;
    if (std::abs(gain) < tol) break;
  }
  return out;
}

}  // namespace aircomp
