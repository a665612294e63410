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

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace aircomp::linalg {

using Complex = std::complex<double>;

// Fixed-length complex vector. std::complex<double> is layout-compatible with
// double[2], so the storage is an interleaved (re, im) real array.
class CVec {
 public:
  CVec() = default;
  explicit CVec(std::size_t n) : data_(n) {}
  CVec(std::initializer_list<Complex> values) : data_(values) {}
  explicit CVec(std::vector<Complex> values) : data_(std::move(values)) {}

  std::size_t size() const noexcept { return data_.size(); }
  Complex& operator[](std::size_t i) { return data_[i]; }
  const Complex& operator[](std::size_t i) const { return data_[i]; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  const Complex* data() const noexcept { return data_.data(); }
  Complex* data() noexcept { return data_.data(); }

  // Interleaved real view, length 2 * size().
  std::span<const double> reals() const noexcept {
    return {reinterpret_cast<const double*>(data_.data()), 2 * data_.size()};
  }
  std::span<double> reals() noexcept {
    return {reinterpret_cast<double*>(data_.data()), 2 * data_.size()};
  }

  double squared_norm() const noexcept;
  double norm() const noexcept;

  friend bool operator==(const CVec&, const CVec&) = default;

 private:
  std::vector<Complex> data_;
};

// Square, row-major complex matrix.
class CMat {
 public:
  CMat() = default;
  explicit CMat(std::size_t n) : n_(n), data_(n * n) {}

  static CMat identity(std::size_t n, double diag = 1.0);

  std::size_t dim() const noexcept { return n_; }
  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  const Complex* data() const noexcept { return data_.data(); }
  Complex* data() noexcept { return data_.data(); }

  double max_abs() const noexcept;
  double frobenius_norm() const noexcept;

  friend bool operator==(const CMat&, const CMat&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Complex> data_;
};

// a^H b, conjugate-linear in the first argument.
Complex inner(const CVec& a, const CVec& b);

// acc + scale * h h^H.
CMat outer_accum(const CVec& h, double scale, CMat acc);
void outer_accum_into(const CVec& h, double scale, CMat& acc);

CVec matvec(const CMat& a, const CVec& x);

// Lower-triangular Cholesky factor L with A = L L^H.
class Cholesky {
 public:
  explicit Cholesky(const CMat& a);

  CVec solve(const CVec& b) const;
  void solve_in_place(std::span<Complex> b) const;
  std::size_t dim() const noexcept { return l_.dim(); }

 private:
  CMat l_;
};

// Solves A x = b for Hermitian positive-definite A.
// Throws ValidationError when A is not Hermitian (entrywise, relative to
// max |A_ij|, tolerance 1e-10) or dimensions disagree, and
// SingularMatrixError when a pivot falls below 1e-14 * max diagonal.
CVec hermitian_solve(const CMat& a, const CVec& b);

bool is_hermitian(const CMat& a, double rel_tol = 1e-10);

}  // namespace aircomp::linalg
