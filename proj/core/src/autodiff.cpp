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

#include "aircomp/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "aircomp/errors.hpp"

namespace aircomp::ad {

using linalg::Complex;

namespace {

void require(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw ValidationError(std::string(op) + ": " + detail);
}

std::string shape(const Array& a) {
  return "(" + std::to_string(a.rows) + ", " + std::to_string(a.cols) + ")";
}

void require_same(const Array& a, const Array& b, const char* op) {
  require(a.same_shape(b), op, "shape mismatch " + shape(a) + " vs " + shape(b));
}

void require_complex(const Array& z, const char* op) {
  require(z.cols == 2, op, "expected (n, 2) complex array, got " + shape(z));
}

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<RowMajor> view(Array& a) { return {a.data.data(), static_cast<Eigen::Index>(a.rows), static_cast<Eigen::Index>(a.cols)}; }
Eigen::Map<const RowMajor> view(const Array& a) {
  return {a.data.data(), static_cast<Eigen::Index>(a.rows), static_cast<Eigen::Index>(a.cols)};
}

Tape& tape_of(Var a) {
  require(a.valid(), "autodiff", "invalid Var");
  return *a.tape();
}

Tape& tape_of(Var a, Var b) {
  require(a.valid() && b.valid() && a.tape() == b.tape(), "autodiff", "operands on different tapes");
  return *a.tape();
}

Complex cget(const Array& a, std::size_t i) { return {a.data[2 * i], a.data[2 * i + 1]}; }
void cset(Array& a, std::size_t i, Complex z) {
  a.data[2 * i] = z.real();
  a.data[2 * i + 1] = z.imag();
}
void cacc(Array& a, std::size_t i, Complex z) {
  a.data[2 * i] += z.real();
  a.data[2 * i + 1] += z.imag();
}

}  // namespace

Array::Array(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != r * c) throw ValidationError("Array: value count does not match shape");
}

Array Array::from_complex(std::span<const Complex> z) {
  Array a(z.size(), 2);
  for (std::size_t i = 0; i < z.size(); ++i) cset(a, i, z[i]);
  return a;
}

const Array& Var::value() const { return tape_->value(id_); }
const Array& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::variable(Array value) {
  nodes_.push_back({std::move(value), {}, {}, true});
  return {this, nodes_.size() - 1};
}

Var Tape::constant(Array value) {
  nodes_.push_back({std::move(value), {}, {}, false});
  return {this, nodes_.size() - 1};
}

Var Tape::record(Array value, std::initializer_list<Var> parents, Backward backward) {
  bool needs = false;
  for (const Var& p : parents) {
    if (p.tape() != this) throw ValidationError("autodiff: operand recorded on another tape");
    needs = needs || nodes_[p.id()].requires_grad;
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

const Array& Tape::grad(std::size_t id) const {
  if (!has_grads_) throw ValidationError("autodiff: grad requested before backward");
  return nodes_[id].grad;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw ValidationError("autodiff: loss recorded on another tape");
  const Array& lv = value(loss.id());
  if (lv.rows != 1 || lv.cols != 1) {
    throw ValidationError("autodiff: backward needs a scalar loss, got " + shape(lv));
  }
  for (Node& n : nodes_) {
    if (n.requires_grad) {
      n.grad = Array(n.value.rows, n.value.cols);
    } else {
      n.grad = Array();
    }
  }
  has_grads_ = true;
  if (!nodes_[loss.id()].requires_grad) return;
  nodes_[loss.id()].grad.data[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward(*this);
  }
}

// Backward closures capture operand Vars and the output id, which is
// tape.size() at record time.

namespace {

template <typename Fn>
Var emit(Tape& t, Array value, std::initializer_list<Var> parents, Fn fn) {
  const std::size_t out = t.size();
  return t.record(std::move(value), parents, [out, fn](Tape& tp) { fn(tp, tp.grad_mut(out)); });
}

// Adds g into parent grad if it participates.
void acc(Tape& t, Var p, const Array& g) {
  if (!t.requires_grad(p.id())) return;
  Array& dst = t.grad_mut(p.id());
  for (std::size_t i = 0; i < g.size(); ++i) dst.data[i] += g.data[i];
}

template <typename F, typename D>
Var elementwise(Var a, F f, D df) {
  Tape& t = tape_of(a);
  const Array& x = a.value();
  Array y(x.rows, x.cols);
  for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = f(x.data[i]);
  return emit(t, std::move(y), {a}, [a, df](Tape& tp, const Array& gy) {
    if (!tp.requires_grad(a.id())) return;
    const Array& xv = tp.value(a.id());
    Array& ga = tp.grad_mut(a.id());
    for (std::size_t i = 0; i < xv.size(); ++i) ga.data[i] += gy.data[i] * df(xv.data[i]);
  });
}

}  // namespace

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same(a.value(), b.value(), "add");
  Array y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += b.value().data[i];
  return emit(t, std::move(y), {a, b}, [a, b](Tape& tp, const Array& g) {
    acc(tp, a, g);
    acc(tp, b, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same(a.value(), b.value(), "sub");
  Array y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] -= b.value().data[i];
  return emit(t, std::move(y), {a, b}, [a, b](Tape& tp, const Array& g) {
    acc(tp, a, g);
    if (!tp.requires_grad(b.id())) return;
    Array& gb = tp.grad_mut(b.id());
    for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] -= g.data[i];
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same(a.value(), b.value(), "mul");
  Array y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] *= b.value().data[i];
  return emit(t, std::move(y), {a, b}, [a, b](Tape& tp, const Array& g) {
    const Array& av = tp.value(a.id());
    const Array& bv = tp.value(b.id());
    if (tp.requires_grad(a.id())) {
      Array& ga = tp.grad_mut(a.id());
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * bv.data[i];
    }
    if (tp.requires_grad(b.id())) {
      Array& gb = tp.grad_mut(b.id());
      for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] += g.data[i] * av.data[i];
    }
  });
}

Var scale(Var a, double c) {
  return elementwise(a, [c](double x) { return c * x; }, [c](double) { return c; });
}

Var add_scalar(Var a, double c) {
  return elementwise(a, [c](double x) { return x + c; }, [](double) { return 1.0; });
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Array& av = a.value();
  const Array& bv = b.value();
  require(av.cols == bv.rows, "matmul", "inner dimensions " + shape(av) + " x " + shape(bv));
  Array y(av.rows, bv.cols);
  view(y).noalias() = view(av) * view(bv);
  return emit(t, std::move(y), {a, b}, [a, b](Tape& tp, const Array& g) {
    if (tp.requires_grad(a.id())) view(tp.grad_mut(a.id())).noalias() += view(g) * view(tp.value(b.id())).transpose();
    if (tp.requires_grad(b.id())) view(tp.grad_mut(b.id())).noalias() += view(tp.value(a.id())).transpose() * view(g);
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Array& av = a.value();
  const Array& bv = b.value();
  require(av.cols == bv.cols, "matmul_nt", "inner dimensions " + shape(av) + " x " + shape(bv) + "^T");
  Array y(av.rows, bv.rows);
  view(y).noalias() = view(av) * view(bv).transpose();
  return emit(t, std::move(y), {a, b}, [a, b](Tape& tp, const Array& g) {
    if (tp.requires_grad(a.id())) view(tp.grad_mut(a.id())).noalias() += view(g) * view(tp.value(b.id()));
    if (tp.requires_grad(b.id())) view(tp.grad_mut(b.id())).noalias() += view(g).transpose() * view(tp.value(a.id()));
  });
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  const Array& av = a.value();
  Array y(av.cols, av.rows);
  for (std::size_t i = 0; i < av.rows; ++i) {
    for (std::size_t j = 0; j < av.cols; ++j) y(j, i) = av(i, j);
  }
  return emit(t, std::move(y), {a}, [a](Tape& tp, const Array& g) {
    if (!tp.requires_grad(a.id())) return;
    Array& ga = tp.grad_mut(a.id());
    for (std::size_t i = 0; i < ga.rows; ++i) {
      for (std::size_t j = 0; j < ga.cols; ++j) ga(i, j) += g(j, i);
    }
  });
}

Var add_row(Var a, Var row) {
  Tape& t = tape_of(a, row);
  const Array& av = a.value();
  const Array& rv = row.value();
  require(rv.rows == 1 && rv.cols == av.cols, "add_row", "row " + shape(rv) + " for " + shape(av));
  Array y = av;
  for (std::size_t i = 0; i < y.rows; ++i) {
    for (std::size_t j = 0; j < y.cols; ++j) y(i, j) += rv.data[j];
  }
  return emit(t, std::move(y), {a, row}, [a, row](Tape& tp, const Array& g) {
    acc(tp, a, g);
    if (!tp.requires_grad(row.id())) return;
    Array& gr = tp.grad_mut(row.id());
    for (std::size_t i = 0; i < g.rows; ++i) {
      for (std::size_t j = 0; j < g.cols; ++j) gr.data[j] += g(i, j);
    }
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double x : a.value().data) s += x;
  return emit(t, Array::scalar(s), {a}, [a](Tape& tp, const Array& g) {
    if (!tp.requires_grad(a.id())) return;
    for (double& x : tp.grad_mut(a.id()).data) x += g.data[0];
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols", "no operands");
  Tape& t = tape_of(parts.front());
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    require(p.tape() == &t, "concat_cols", "operands on different tapes");
    require(p.rows() == rows, "concat_cols", "row count mismatch");
    cols += p.cols();
  }
  Array y(rows, cols);
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Array& pv = p.value();
    for (std::size_t i = 0; i < rows; ++i) {
      std::copy_n(&pv.data[i * pv.cols], pv.cols, &y.data[i * cols + off]);
    }
    off += pv.cols;
  }
  // Record with the first operand as nominal parent, then fix requires_grad.
  const std::size_t out = t.size();
  bool needs = false;
  for (const Var& p : parts) needs = needs || p.requires_grad();
  Tape::Backward bw = [parts, out](Tape& tp) {
    const Array& g = tp.grad_mut(out);
    std::size_t o = 0;
    for (const Var& p : parts) {
      const std::size_t pc = tp.value(p.id()).cols;
      if (tp.requires_grad(p.id())) {
        Array& gp = tp.grad_mut(p.id());
        for (std::size_t i = 0; i < g.rows; ++i) {
          for (std::size_t j = 0; j < pc; ++j) gp.data[i * pc + j] += g.data[i * g.cols + o + j];
        }
      }
      o += pc;
    }
  };
  if (needs) {
    for (const Var& p : parts) {
      if (p.requires_grad()) return t.record(std::move(y), {p}, std::move(bw));
    }
  }
  return t.record(std::move(y), {parts.front()}, std::move(bw));
}

Var concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows", "no operands");
  Tape& t = tape_of(parts.front());
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  bool needs = false;
  for (const Var& p : parts) {
    require(p.tape() == &t, "concat_rows", "operands on different tapes");
    require(p.cols() == cols, "concat_rows", "column count mismatch");
    rows += p.rows();
    needs = needs || p.requires_grad();
  }
  Array y(rows, cols);
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Array& pv = p.value();
    std::copy(pv.data.begin(), pv.data.end(), y.data.begin() + static_cast<std::ptrdiff_t>(off));
    off += pv.size();
  }
  const std::size_t out = t.size();
  Tape::Backward bw = [parts, out](Tape& tp) {
    const Array& g = tp.grad_mut(out);
    std::size_t o = 0;
    for (const Var& p : parts) {
      const std::size_t n = tp.value(p.id()).size();
      if (tp.requires_grad(p.id())) {
        Array& gp = tp.grad_mut(p.id());
        for (std::size_t i = 0; i < n; ++i) gp.data[i] += g.data[o + i];
      }
      o += n;
    }
  };
  if (needs) {
    for (const Var& p : parts) {
      if (p.requires_grad()) return t.record(std::move(y), {p}, std::move(bw));
    }
  }
  return t.record(std::move(y), {parts.front()}, std::move(bw));
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  Tape& t = tape_of(a);
  const Array& av = a.value();
  require(begin <= end && end <= av.rows, "slice_rows", "range out of bounds for " + shape(av));
  Array y(end - begin, av.cols);
  std::copy(av.data.begin() + static_cast<std::ptrdiff_t>(begin * av.cols),
            av.data.begin() + static_cast<std::ptrdiff_t>(end * av.cols), y.data.begin());
  return emit(t, std::move(y), {a}, [a, begin](Tape& tp, const Array& g) {
    if (!tp.requires_grad(a.id())) return;
    Array& ga = tp.grad_mut(a.id());
    const std::size_t off = begin * ga.cols;
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[off + i] += g.data[i];
  });
}

Var gather_rows(Var a, std::vector<std::size_t> index) {
  Tape& t = tape_of(a);
  const Array& av = a.value();
  Array y(index.size(), av.cols);
  for (std::size_t r = 0; r < index.size(); ++r) {
    require(index[r] < av.rows, "gather_rows", "row index out of bounds");
    std::copy_n(&av.data[index[r] * av.cols], av.cols, &y.data[r * av.cols]);
  }
  return emit(t, std::move(y), {a}, [a, index = std::move(index)](Tape& tp, const Array& g) {
    if (!tp.requires_grad(a.id())) return;
    Array& ga = tp.grad_mut(a.id());
    for (std::size_t r = 0; r < index.size(); ++r) {
      for (std::size_t j = 0; j < g.cols; ++j) ga.data[index[r] * g.cols + j] += g.data[r * g.cols + j];
    }
  });
}

Var log(Var a) {
  return elementwise(a, [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Var log2(Var a) {
  return elementwise(a, [](double x) { return std::log2(x); },
                     [](double x) { return 1.0 / (x * std::numbers::ln2); });
}

Var sqrt(Var a) {
  return elementwise(a, [](double x) { return std::sqrt(x); },
                     [](double x) { return 0.5 / std::sqrt(x); });
}

Var tanh(Var a) {
  return elementwise(a, [](double x) { return std::tanh(x); },
                     [](double x) {
                       const double y = std::tanh(x);
                       return 1.0 - y * y;
                     });
}

Var selu(Var a) {
  return elementwise(
      a,
      [](double x) { return x > 0.0 ? kSeluLambda * x : kSeluLambda * kSeluAlpha * std::expm1(x); },
      [](double x) { return x > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(x); });
}

Var sigmoid(Var a) {
  auto f = [](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  };
  return elementwise(a, f, [f](double x) {
    const double s = f(x);
    return s * (1.0 - s);
  });
}

Var positive_part(Var a) {
  return elementwise(a, [](double x) { return x > 0.0 ? x : 0.0; },
                     [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var layer_norm(Var a, Var gain, Var bias, double eps) {
  Tape& t = tape_of(a, gain);
  tape_of(a, bias);
  const Array& x = a.value();
  const std::size_t n = x.rows, c = x.cols;
  require(c > 0, "layer_norm", "empty feature dimension");
  require(gain.rows() == 1 && gain.cols() == c, "layer_norm", "gain shape " + shape(gain.value()));
  require(bias.rows() == 1 && bias.cols() == c, "layer_norm", "bias shape " + shape(bias.value()));
  Array xhat(n, c);
  std::vector<double> inv_std(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < c; ++j) mean += x(i, j);
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (x(i, j) - mean) * (x(i, j) - mean);
    var /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) xhat(i, j) = (x(i, j) - mean) * inv_std[i];
  }
  Array y(n, c);
  const Array& gv = gain.value();
  const Array& bv = bias.value();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) y(i, j) = xhat(i, j) * gv.data[j] + bv.data[j];
  }
  return emit(t, std::move(y), {a, gain, bias},
              [a, gain, bias, xhat = std::move(xhat), inv_std = std::move(inv_std), n, c](
                  Tape& tp, const Array& g) {
                const Array& gv2 = tp.value(gain.id());
                if (tp.requires_grad(gain.id()) || tp.requires_grad(bias.id())) {
                  for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < c; ++j) {
                      if (tp.requires_grad(gain.id())) tp.grad_mut(gain.id()).data[j] += g(i, j) * xhat(i, j);
                      if (tp.requires_grad(bias.id())) tp.grad_mut(bias.id()).data[j] += g(i, j);
                    }
                  }
                }
                if (!tp.requires_grad(a.id())) return;
                Array& ga = tp.grad_mut(a.id());
                const double inv_c = 1.0 / static_cast<double>(c);
                for (std::size_t i = 0; i < n; ++i) {
                  double m1 = 0.0, m2 = 0.0;
                  for (std::size_t j = 0; j < c; ++j) {
                    const double dxh = g(i, j) * gv2.data[j];
                    m1 += dxh;
                    m2 += dxh * xhat(i, j);
                  }
                  m1 *= inv_c;
                  m2 *= inv_c;
                  for (std::size_t j = 0; j < c; ++j) {
                    const double dxh = g(i, j) * gv2.data[j];
                    ga(i, j) += inv_std[i] * (dxh - m1 - xhat(i, j) * m2);
                  }
                }
              });
}

Var detach(Var a) { return tape_of(a).constant(a.value()); }

Var magnitude(Var z) {
  Tape& t = tape_of(z);
  const Array& zv = z.value();
  require_complex(zv, "magnitude");
  Array y(zv.rows, 1);
  for (std::size_t i = 0; i < zv.rows; ++i) y.data[i] = std::abs(cget(zv, i));
  return emit(t, std::move(y), {z}, [z](Tape& tp, const Array& g) {
    if (!tp.requires_grad(z.id())) return;
    const Array& zv2 = tp.value(z.id());
    Array& gz = tp.grad_mut(z.id());
    for (std::size_t i = 0; i < zv2.rows; ++i) {
      const Complex zi = cget(zv2, i);
      cacc(gz, i, g.data[i] * zi / std::max(std::abs(zi), kMagnitudeFloor));
    }
  });
}

Var abs2(Var z) {
  Tape& t = tape_of(z);
  const Array& zv = z.value();
  require_complex(zv, "abs2");
  Array y(zv.rows, 1);
  for (std::size_t i = 0; i < zv.rows; ++i) y.data[i] = std::norm(cget(zv, i));
  return emit(t, std::move(y), {z}, [z](Tape& tp, const Array& g) {
    if (!tp.requires_grad(z.id())) return;
    const Array& zv2 = tp.value(z.id());
    Array& gz = tp.grad_mut(z.id());
    for (std::size_t i = 0; i < zv2.rows; ++i) cacc(gz, i, 2.0 * g.data[i] * cget(zv2, i));
  });
}

Var complex_mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_complex(a.value(), "complex_mul");
  require_same(a.value(), b.value(), "complex_mul");
  Array y(a.rows(), 2);
  for (std::size_t i = 0; i < y.rows; ++i) cset(y, i, cget(a.value(), i) * cget(b.value(), i));
  return emit(t, std::move(y), {a, b}, [a, b](Tape& tp, const Array& g) {
    const Array& av = tp.value(a.id());
    const Array& bv = tp.value(b.id());
    const bool ga_on = tp.requires_grad(a.id());
    const bool gb_on = tp.requires_grad(b.id());
    for (std::size_t i = 0; i < g.rows; ++i) {
      const Complex gi = cget(g, i);
      if (ga_on) cacc(tp.grad_mut(a.id()), i, gi * std::conj(cget(bv, i)));
      if (gb_on) cacc(tp.grad_mut(b.id()), i, gi * std::conj(cget(av, i)));
    }
  });
}

Var complex_conj(Var z) {
  Tape& t = tape_of(z);
  require_complex(z.value(), "complex_conj");
  Array y = z.value();
  for (std::size_t i = 0; i < y.rows; ++i) y.data[2 * i + 1] = -y.data[2 * i + 1];
  return emit(t, std::move(y), {z}, [z](Tape& tp, const Array& g) {
    if (!tp.requires_grad(z.id())) return;
    Array& gz = tp.grad_mut(z.id());
    for (std::size_t i = 0; i < g.rows; ++i) {
      gz.data[2 * i] += g.data[2 * i];
      gz.data[2 * i + 1] -= g.data[2 * i + 1];
    }
  });
}

Var complex_scale(Var s, Var z) {
  Tape& t = tape_of(s, z);
  require_complex(z.value(), "complex_scale");
  require(s.cols() == 1 && s.rows() == z.rows(), "complex_scale",
          "scale " + shape(s.value()) + " for " + shape(z.value()));
  Array y = z.value();
  for (std::size_t i = 0; i < y.rows; ++i) {
    y.data[2 * i] *= s.value().data[i];
    y.data[2 * i + 1] *= s.value().data[i];
  }
  return emit(t, std::move(y), {s, z}, [s, z](Tape& tp, const Array& g) {
    const Array& sv = tp.value(s.id());
    const Array& zv = tp.value(z.id());
    if (tp.requires_grad(s.id())) {
      Array& gs = tp.grad_mut(s.id());
      for (std::size_t i = 0; i < g.rows; ++i) {
        gs.data[i] += g.data[2 * i] * zv.data[2 * i] + g.data[2 * i + 1] * zv.data[2 * i + 1];
      }
    }
    if (tp.requires_grad(z.id())) {
      Array& gz = tp.grad_mut(z.id());
      for (std::size_t i = 0; i < g.rows; ++i) {
        gz.data[2 * i] += sv.data[i] * g.data[2 * i];
        gz.data[2 * i + 1] += sv.data[i] * g.data[2 * i + 1];
      }
    }
  });
}

Var phase_normalize(Var z) {
  Tape& t = tape_of(z);
  const Array& zv = z.value();
  require_complex(zv, "phase_normalize");
  Array y(zv.rows, 2);
  for (std::size_t i = 0; i < zv.rows; ++i) {
    const Complex zi = cget(zv, i);
    cset(y, i, zi / std::max(std::abs(zi), kMagnitudeFloor));
  }
  return emit(t, std::move(y), {z}, [z](Tape& tp, const Array& g) {
    if (!tp.requires_grad(z.id())) return;
    const Array& zv2 = tp.value(z.id());
    Array& gz = tp.grad_mut(z.id());
    for (std::size_t i = 0; i < zv2.rows; ++i) {
      const Complex zi = cget(zv2, i);
      const double r = std::abs(zi);
      const Complex gi = cget(g, i);
      if (r < kMagnitudeFloor) {
        cacc(gz, i, gi / kMagnitudeFloor);
        continue;
      }
      const Complex p = zi / r;
      cacc(gz, i, (gi - (std::conj(gi) * p).real() * p) / r);
    }
  });
}

linalg::CMat to_cmat(const Array& a) {
  require(a.cols == 2 * a.rows, "to_cmat", "expected (m, 2m) array, got " + shape(a));
  linalg::CMat m(a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.rows; ++j) m(i, j) = {a(i, 2 * j), a(i, 2 * j + 1)};
  }
  return m;
}

std::vector<Complex> to_complex(const Array& a) {
  require_complex(a, "to_complex");
  std::vector<Complex> z(a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) z[i] = cget(a, i);
  return z;
}

Var weighted_gram(Var w, const std::vector<linalg::CVec>& h, double sigma2) {
  Tape& t = tape_of(w);
  const Array& wv = w.value();
  require(wv.cols == 1 && wv.rows == h.size(), "weighted_gram", "weights " + shape(wv) + " for " +
                                                                    std::to_string(h.size()) + " vectors");
  require(!h.empty(), "weighted_gram", "no vectors");
  const std::size_t m = h.front().size();
  linalg::CMat a = linalg::CMat::identity(m, sigma2);
  for (std::size_t d = 0; d < h.size(); ++d) {
    require(h[d].size() == m, "weighted_gram", "vector length mismatch");
    linalg::outer_accum_into(h[d], wv.data[d], a);
  }
  Array y(m, 2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      y(i, 2 * j) = a(i, j).real();
      y(i, 2 * j + 1) = a(i, j).imag();
    }
  }
  return emit(t, std::move(y), {w}, [w, h, m](Tape& tp, const Array& g) {
    if (!tp.requires_grad(w.id())) return;
    Array& gw = tp.grad_mut(w.id());
    // w_bar_d = sum_ij Re(conj(G_ij) h_i conj(h_j))
    for (std::size_t d = 0; d < h.size(); ++d) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          const Complex gij{g(i, 2 * j), g(i, 2 * j + 1)};
          s += (std::conj(gij) * h[d][i] * std::conj(h[d][j])).real();
        }
      }
      gw.data[d] += s;
    }
  });
}

Var cmatvec(const std::vector<linalg::CVec>& h, Var u) {
  Tape& t = tape_of(u);
  const Array& uv = u.value();
  require_complex(uv, "cmatvec");
  require(uv.rows == h.size() && !h.empty(), "cmatvec", "operand " + shape(uv) + " for " +
                                                            std::to_string(h.size()) + " columns");
  const std::size_t m = h.front().size();
  Array y(m, 2);
  for (std::size_t d = 0; d < h.size(); ++d) {
    require(h[d].size() == m, "cmatvec", "column length mismatch");
    const Complex ud = cget(uv, d);
    for (std::size_t i = 0; i < m; ++i) cacc(y, i, h[d][i] * ud);
  }
  return emit(t, std::move(y), {u}, [u, h, m](Tape& tp, const Array& g) {
    if (!tp.requires_grad(u.id())) return;
    Array& gu = tp.grad_mut(u.id());
    for (std::size_t d = 0; d < h.size(); ++d) {
      Complex s{};
      for (std::size_t i = 0; i < m; ++i) s += std::conj(h[d][i]) * cget(g, i);
      cacc(gu, d, s);
    }
  });
}

Var cmatvec_adjoint(const std::vector<linalg::CVec>& h, Var v) {
  Tape& t = tape_of(v);
  const Array& vv = v.value();
  require_complex(vv, "cmatvec_adjoint");
  Array y(h.size(), 2);
  for (std::size_t d = 0; d < h.size(); ++d) {
    require(h[d].size() == vv.rows, "cmatvec_adjoint", "vector length mismatch");
    Complex s{};
    for (std::size_t i = 0; i < vv.rows; ++i) s += std::conj(h[d][i]) * cget(vv, i);
    cset(y, d, s);
  }
  return emit(t, std::move(y), {v}, [v, h](Tape& tp, const Array& g) {
    if (!tp.requires_grad(v.id())) return;
    Array& gv = tp.grad_mut(v.id());
    for (std::size_t d = 0; d < h.size(); ++d) {
      const Complex gd = cget(g, d);
      for (std::size_t i = 0; i < h[d].size(); ++i) cacc(gv, i, h[d][i] * gd);
    }
  });
}

Var hermitian_solve(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Array& bv = b.value();
  require_complex(bv, "hermitian_solve");
  require(a.rows() == bv.rows, "hermitian_solve", "matrix " + shape(a.value()) + " for rhs " + shape(bv));
  for (double v : a.value().data) {
    if (!std::isfinite(v)) throw SingularMatrixError("hermitian_solve: non-finite matrix entry");
  }
  const linalg::CMat am = to_cmat(a.value());
  if (!linalg::is_hermitian(am)) throw ValidationError("hermitian_solve: matrix is not Hermitian");
  auto chol = std::make_shared<linalg::Cholesky>(am);
  std::vector<Complex> x = to_complex(bv);
  chol->solve_in_place(x);
  return emit(t, Array::from_complex(x), {a, b}, [a, b, chol, x](Tape& tp, const Array& g) {
    std::vector<Complex> bbar = to_complex(g);
    chol->solve_in_place(bbar);
    if (tp.requires_grad(b.id())) {
      Array& gb = tp.grad_mut(b.id());
      for (std::size_t i = 0; i < bbar.size(); ++i) cacc(gb, i, bbar[i]);
    }
    if (tp.requires_grad(a.id())) {
      Array& ga = tp.grad_mut(a.id());
      const std::size_t m = bbar.size();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          const Complex v = -bbar[i] * std::conj(x[j]);
          ga(i, 2 * j) += v.real();
          ga(i, 2 * j + 1) += v.imag();
        }
      }
    }
  });
}

}  // namespace aircomp::ad
