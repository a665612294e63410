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

#include "aircomp/complex_linalg.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <string>

#include "aircomp/errors.hpp"

namespace aircomp::linalg {

double CVec::squared_norm() const noexcept {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return s;
}

double CVec::norm() const noexcept { return std::sqrt(squared_norm()); }

CMat CMat::identity(std::size_t n, double diag) {
  CMat m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = diag;
  return m;
}

double CMat::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& z : data_) m = std::max(m, std::abs(z));
  return m;
}

double CMat::frobenius_norm() const noexcept {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

Complex inner(const CVec& a, const CVec& b) {
  if (a.size() != b.size()) {
    throw ValidationError("inner: length mismatch " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
  Complex s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

void outer_accum_into(const CVec& h, double scale, CMat& acc) {
  const std::size_t n = h.size();
  if (acc.dim() != n) throw ValidationError("outer_accum: dimension mismatch");
  if (scale == 0.0) return;
  for (std::size_t i = 0; i < n; ++i) {
    acc(i, i) += scale * std::norm(h[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex z = scale * h[i] * std::conj(h[j]);
      acc(i, j) += z;
      acc(j, i) += std::conj(z);
    }
  }
}

CMat outer_accum(const CVec& h, double scale, CMat acc) {
  outer_accum_into(h, scale, acc);
  return acc;
}

CVec matvec(const CMat& a, const CVec& x) {
  const std::size_t n = a.dim();
  if (x.size() != n) throw ValidationError("matvec: dimension mismatch");
  CVec y(n);
  for (std::size_t i = 0; i < n; ++i) {
    Complex s{};
    for (std::size_t j = 0; j < n; ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

bool is_hermitian(const CMat& a, double rel_tol) {
  const std::size_t n = a.dim();
  const double tol = rel_tol * std::max(a.max_abs(), std::numeric_limits<double>::min());
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(a(i, i).imag()) > tol) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(a(i, j) - std::conj(a(j, i))) > tol) return false;
    }
  }
  return true;
}

Cholesky::Cholesky(const CMat& a) : l_(a.dim()) {
  const std::size_t n = a.dim();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i).real());
  const double pivot_floor = 1e-14 * max_diag;

  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l_(j, k));
    if (!(d > pivot_floor) || max_diag <= 0.0) {
      throw SingularMatrixError("cholesky: pivot " + std::to_string(j) + " = " +
                                std::to_string(d) + " below threshold");
    }
    const double ljj = std::sqrt(d);
    l_(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      Complex s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * std::conj(l_(j, k));
      l_(i, j) = s / ljj;
    }
  }
}

void Cholesky::solve_in_place(std::span<Complex> b) const {
  const std::size_t n = l_.dim();
  if (b.size() != n) throw ValidationError("cholesky solve: dimension mismatch");
  // L y = b
  for (std::size_t i = 0; i < n; ++i) {
    Complex s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * b[k];
    b[i] = s / l_(i, i).real();
  }
  // L^H x = y
  for (std::size_t ii = n; ii-- > 0;) {
    Complex s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= std::conj(l_(k, ii)) * b[k];
    b[ii] = s / l_(ii, ii).real();
  }
}

CVec Cholesky::solve(const CVec& b) const {
  CVec x = b;
  solve_in_place({x.data(), x.size()});
  return x;
}

CVec hermitian_solve(const CMat& a, const CVec& b) {
  if (a.dim() != b.size()) throw ValidationError("hermitian_solve: dimension mismatch");
  if (!is_hermitian(a)) throw ValidationError("hermitian_solve: matrix is not Hermitian");
  return Cholesky(a).solve(b);
}

}  // namespace aircomp::linalg
