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

#include <random>

#include <gtest/gtest.h>

#include "aircomp/errors.hpp"

namespace aircomp::linalg {
namespace {

using namespace std::complex_literals;

CVec random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVec v(n);
  for (auto& z : v) z = {g(rng), g(rng)};
  return v;
}

// B B^H + I for a random complex B.
CMat random_hpd(std::size_t n, std::mt19937_64& rng) {
  CMat a = CMat::identity(n);
  for (std::size_t j = 0; j < n; ++j) outer_accum_into(random_vec(n, rng), 1.0, a);
  return a;
}

TEST(HermitianSolve, IdentityReturnsRightHandSide) {
  const CVec b{1.0 + 0.0i, 0.0 + 2.0i};
  const CVec x = hermitian_solve(CMat::identity(2), b);
  EXPECT_EQ(x, b);
}

TEST(HermitianSolve, Diagonal) {
  CMat a(2);
  a(0, 0) = 2.0;
  a(1, 1) = 4.0;
  const CVec x = hermitian_solve(a, CVec{2.0, 4.0});
  EXPECT_NEAR(std::abs(x[0] - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(x[1] - 1.0), 0.0, 1e-15);
}

TEST(HermitianSolve, RandomResidual) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const CMat a = random_hpd(8, rng);
    const CVec b = random_vec(8, rng);
    const CVec x = hermitian_solve(a, b);
    const CVec ax = matvec(a, x);
    double res = 0.0;
    for (std::size_t i = 0; i < 8; ++i) res = std::max(res, std::abs(ax[i] - b[i]));
    EXPECT_LE(res, 1e-10);
  }
}

TEST(HermitianSolve, RejectsNonHermitian) {
  CMat a = CMat::identity(2);
  a(0, 1) = 0.5;
  EXPECT_THROW(hermitian_solve(a, CVec{1.0, 1.0}), ValidationError);
}

TEST(HermitianSolve, RejectsDimensionMismatch) {
  EXPECT_THROW(hermitian_solve(CMat::identity(2), CVec{1.0, 1.0, 1.0}), ValidationError);
}

TEST(HermitianSolve, SingularMatrix) {
  CMat a(2);
  a(0, 0) = 1.0;
  EXPECT_THROW(hermitian_solve(a, CVec{1.0, 1.0}), SingularMatrixError);
}

TEST(HermitianSolve, IndefiniteMatrix) {
  CMat a = CMat::identity(2);
  a(1, 1) = -1.0;
  EXPECT_THROW(hermitian_solve(a, CVec{1.0, 1.0}), SingularMatrixError);
}

TEST(OuterAccum, UnitVector) {
  const CMat a = outer_accum(CVec{1.0, 0.0}, 1.0, CMat(2));
  EXPECT_EQ(a(0, 0), Complex(1.0));
  EXPECT_EQ(a(0, 1), Complex(0.0));
  EXPECT_EQ(a(1, 0), Complex(0.0));
  EXPECT_EQ(a(1, 1), Complex(0.0));
}

TEST(OuterAccum, ZeroScaleLeavesAccumulator) {
  std::mt19937_64 rng(3);
  const CMat acc = random_hpd(3, rng);
  EXPECT_EQ(outer_accum(random_vec(3, rng), 0.0, acc), acc);
}

TEST(OuterAccum, TraceIdentity) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const CVec h = random_vec(5, rng);
    const double s = 0.1 + trial;
    const CMat a = outer_accum(h, s, CMat(5));
    Complex tr{};
    for (std::size_t i = 0; i < 5; ++i) tr += a(i, i);
    EXPECT_NEAR(tr.real(), s * h.squared_norm(), 1e-12 * (1.0 + s * h.squared_norm()));
    EXPECT_NEAR(tr.imag(), 0.0, 1e-12);
    EXPECT_TRUE(is_hermitian(a));
  }
}

TEST(Inner, SquaredNorm) { EXPECT_EQ(inner(CVec{1.0, 1.0i}, CVec{1.0, 1.0i}), Complex(2.0)); }

TEST(Inner, Orthogonal) { EXPECT_EQ(inner(CVec{1.0, 0.0}, CVec{0.0, 1.0}), Complex(0.0)); }

TEST(Inner, ConjugateSymmetry) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const CVec a = random_vec(6, rng);
    const CVec b = random_vec(6, rng);
    EXPECT_NEAR(std::abs(inner(a, b) - std::conj(inner(b, a))), 0.0, 1e-13);
  }
}

TEST(Inner, ConjugatesFirstArgument) {
  EXPECT_EQ(inner(CVec{1.0i}, CVec{1.0}), Complex(0.0, -1.0));
}

TEST(CVec, InterleavedView) {
  const CVec v{1.0 + 2.0i, 3.0 - 4.0i};
  const auto r = v.reals();
  ASSERT_EQ(r.size(), 4u);
  EXPECT_EQ(r[0], 1.0);
  EXPECT_EQ(r[1], 2.0);
  EXPECT_EQ(r[2], 3.0);
  EXPECT_EQ(r[3], -4.0);
  EXPECT_DOUBLE_EQ(v.squared_norm(), 30.0);
}

}  // namespace
}  // namespace aircomp::linalg
