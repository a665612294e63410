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
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "aircomp/complex_linalg.hpp"

// Reverse-mode automatic differentiation over dense 2-D real arrays.
//
// Complex quantities use the interleaved real-pair layout: an n-vector is an
// (n, 2) array of (re, im) rows and an m x m matrix is an (m, 2m) array. The
// gradient of a complex entry z = x + iy is stored as (dL/dx, dL/dy).
namespace aircomp::ad {

struct Array {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Array() = default;
  Array(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  Array(std::size_t r, std::size_t c, std::vector<double> values);

  static Array scalar(double x) { return Array(1, 1, x); }
  // (n, 2) interleaved layout of a complex vector.
  static Array from_complex(std::span<const linalg::Complex> z);

  std::size_t size() const noexcept { return data.size(); }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  bool same_shape(const Array& o) const noexcept { return rows == o.rows && cols == o.cols; }

  friend bool operator==(const Array&, const Array&) = default;
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives and
// has not been cleared.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Array& value() const;
  const Array& grad() const;
  std::size_t rows() const { return value().rows; }
  std::size_t cols() const { return value().cols; }
  bool requires_grad() const;
  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&)>;

  // Leaf whose gradient is accumulated by backward().
  Var variable(Array value);
  // Leaf treated as a constant.
  Var constant(Array value);

  // Records an op result. backward is stored only if some parent needs a
  // gradient; it reads grad(out) and accumulates into the parents.
  Var record(Array value, std::initializer_list<Var> parents, Backward backward);

  // Reverse sweep from a 1x1 loss; grads of every node are reset first.
  void backward(Var loss);

  const Array& value(std::size_t id) const { return nodes_[id].value; }
  const Array& grad(std::size_t id) const;
  Array& grad_mut(std::size_t id) { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Array value;
    Array grad;
    Backward backward;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
  bool has_grads_ = false;
};

// ---- real element-wise and structural ops ----
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // element-wise
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var matmul(Var a, Var b);     // a b
Var matmul_nt(Var a, Var b);  // a b^T
Var transpose(Var a);
Var add_row(Var a, Var row);  // a + 1 row, row is (1, cols)
Var sum(Var a);               // (1, 1)
Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice_rows(Var a, std::size_t begin, std::size_t end);
Var gather_rows(Var a, std::vector<std::size_t> index);
Var log(Var a);
Var log2(Var a);
Var sqrt(Var a);
Var tanh(Var a);
Var selu(Var a);
Var sigmoid(Var a);
// max(a, 0) with subgradient 0 at and below zero.
Var positive_part(Var a);
// Row-wise normalization over columns with per-column gain and bias (1, cols).
Var layer_norm(Var a, Var gain, Var bias, double eps = 1e-5);
// Same value, no gradient flow.
Var detach(Var a);

inline constexpr double kSeluLambda = 1.0507009873554805;
inline constexpr double kSeluAlpha = 1.6732632423543772;
inline constexpr double kMagnitudeFloor = 1e-12;

// ---- complex ops on (n, 2) arrays ----
Var magnitude(Var z);  // (n, 1), gradient uses max(|z|, 1e-12)
Var abs2(Var z);       // (n, 1)
Var complex_mul(Var a, Var b);
Var complex_conj(Var z);
Var complex_scale(Var s, Var z);  // real (n, 1) times complex (n, 2)
Var phase_normalize(Var z);       // z / max(|z|, 1e-12)

// ---- complex linear algebra ----
// A = sum_d w_d h_d h_d^H + sigma2 I as an (M, 2M) array; w is (D, 1).
Var weighted_gram(Var w, const std::vector<linalg::CVec>& h, double sigma2);
// [h_1 ... h_D] u as (M, 2); u is (D, 2).
Var cmatvec(const std::vector<linalg::CVec>& h, Var u);
// g_d = h_d^H v as (D, 2); v is (M, 2).
Var cmatvec_adjoint(const std::vector<linalg::CVec>& h, Var v);
// x = A^{-1} b for Hermitian positive-definite A (Cholesky). Adjoint:
// b_bar = A^{-1} x_bar, A_bar = -b_bar x^H.
Var hermitian_solve(Var a, Var b);

linalg::CMat to_cmat(const Array& a);
std::vector<linalg::Complex> to_complex(const Array& a);

}  // namespace aircomp::ad
