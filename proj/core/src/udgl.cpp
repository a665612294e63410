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

#include "aircomp/udgl.hpp"

#include <cmath>
#include <random>
#include <string>

#include "aircomp/errors.hpp"

namespace aircomp {

using ad::Array;
using ad::Var;

UdglConfig UdglConfig::tiny() {
  UdglConfig c;
  c.blocks = 2;
  c.encoder_layers = 1;
  c.hidden = 8;
  c.decoder_widths = {16, 64, 32, 8, 1};
  return c;
}

void UdglConfig::validate() const {
  if (blocks < 1) throw ValidationError("UdglConfig: blocks must be >= 1");
  if (hidden < 1) throw ValidationError("UdglConfig: hidden must be >= 1");
  if (decoder_widths.size() < 2) throw ValidationError("UdglConfig: decoder needs at least input and output widths");
  if (decoder_widths.front() != 2 * hidden) {
    throw ValidationError("UdglConfig: decoder input width " + std::to_string(decoder_widths.front()) +
                          " must equal 2 * hidden = " + std::to_string(2 * hidden));
  }
  if (decoder_widths.back() != 1) throw ValidationError("UdglConfig: decoder output width must be 1");
  for (std::size_t w : decoder_widths) {
    if (w == 0) throw ValidationError("UdglConfig: zero decoder width");
  }
}

void UdglModel::build_layout() {
  layout_.clear();
  std::size_t next = 0;
  for (std::size_t g = 0; g < cfg_.num_groups(); ++g) {
    GroupLayout gl;
    gl.omega_d = next++;
    gl.omega_f = next++;
    for (std::size_t i = 0; i < cfg_.encoder_layers; ++i) {
      gl.layers.push_back({next, next + 1, next + 2, next + 3, next + 4, next + 5});
      next += 6;
    }
    for (std::size_t l = 0; l + 1 < cfg_.decoder_widths.size(); ++l) {
      gl.dec_weight.push_back(next++);
      gl.dec_bias.push_back(next++);
    }
    layout_.push_back(std::move(gl));
  }
  params_.resize(next);
}

UdglModel::UdglModel(UdglConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  build_layout();
  std::mt19937_64 rng(seed);
  const std::size_t h = cfg_.hidden;
  auto glorot = [&](std::size_t rows, std::size_t cols) {
    const double lim = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-lim, lim);
    Array a(rows, cols);
    for (double& x : a.data) x = dist(rng);
    return a;
  };
  auto lecun = [&](std::size_t rows, std::size_t cols) {
    std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(cols)));
    Array a(rows, cols);
    for (double& x : a.data) x = dist(rng);
    return a;
  };
  for (const GroupLayout& gl : layout_) {
    params_[gl.omega_d] = glorot(h, kNodeFeatureDim);
    params_[gl.omega_f] = glorot(h, kNodeFeatureDim);
    for (const auto& l : gl.layers) {
      params_[l.ups_d] = glorot(h, h);
      params_[l.ups_f] = glorot(h, h);
      params_[l.ln_d_gain] = Array(1, h, 1.0);
      params_[l.ln_d_bias] = Array(1, h, 0.0);
      params_[l.ln_f_gain] = Array(1, h, 1.0);
      params_[l.ln_f_bias] = Array(1, h, 0.0);
    }
    for (std::size_t l = 0; l < gl.dec_weight.size(); ++l) {
      const std::size_t in = cfg_.decoder_widths[l];
      const std::size_t out = cfg_.decoder_widths[l + 1];
      params_[gl.dec_weight[l]] = lecun(out, in);
      params_[gl.dec_bias[l]] = Array(1, out, 0.0);
    }
  }
}

std::size_t UdglModel::scalar_count() const {
  std::size_t n = 0;
  for (const Array& p : params_) n += p.size();
  return n;
}

// ---- plain features ----

namespace {

void check_inputs(const std::vector<Complex>& u, const std::vector<CVec>& v, const NetworkRealization& r) {
  if (u.size() != r.num_devices() || v.size() != r.num_clusters()) {
    throw ValidationError("feature extraction: strategy dimensions do not match the realization");
  }
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k].size() != r.antennas(k)) throw ValidationError("feature extraction: beamformer length mismatch");
  }
}

}  // namespace

std::vector<NodeFeatures> extract_device_features(const std::vector<Complex>& u_prev,
                                                  const std::vector<CVec>& v,
                                                  const NetworkRealization& r) {
  check_inputs(u_prev, v, r);
  std::vector<NodeFeatures> out(r.num_devices());
  for (std::size_t d = 0; d < r.num_devices(); ++d) {
    const std::size_t own = r.cluster_of[d];
    const double mag_u = std::abs(u_prev[d]);
    double own_gain = 0.0;
    double other_gain = 0.0;
    for (std::size_t k = 0; k < r.num_clusters(); ++k) {
      const double g = std::abs(linalg::inner(r.channel(d, k), v[k]));
      (k == own ? own_gain : other_gain) += g;
    }
    out[d] = {mag_u, own_gain, other_gain, own_gain * mag_u, other_gain * mag_u};
  }
  return out;
}

std::vector<NodeFeatures> extract_center_features(const std::vector<Complex>& u_prev,
                                                  const std::vector<CVec>& v,
                                                  const NetworkRealization& r) {
  check_inputs(u_prev, v, r);
  const TransceiverStrategy s{u_prev, v};
  std::vector<NodeFeatures> out(r.num_clusters());
  for (std::size_t k = 0; k < r.num_clusters(); ++k) {
    NodeFeatures f{analytic_mse(k, s, r), 0.0, 0.0, 0.0, 0.0};
    for (std::size_t d = 0; d < r.num_devices(); ++d) {
      const double g = std::abs(linalg::inner(r.channel(d, k), v[k]));
      const bool own = r.cluster_of[d] == k;
      f[own ? 1 : 2] += g;
      f[own ? 3 : 4] += g * std::abs(u_prev[d]);
    }
    out[k] = f;
  }
  return out;
}

// ---- differentiable blocks ----

Var embed(Var features, Var omega) { return ad::tanh(ad::matmul_nt(features, omega)); }

MessagePassOutput message_pass_layer(Var devices, Var centers, Var lambda, const EncoderLayerVars& p,
                                     bool layer_norm) {
  const Var center_msg = ad::matmul_nt(centers, p.ups_f);
  Var dev = ad::add(ad::matmul_nt(devices, p.ups_d), ad::matmul(lambda, center_msg));
  if (layer_norm) dev = ad::layer_norm(dev, p.ln_d_gain, p.ln_d_bias);
  const Var device_msg = ad::matmul_nt(dev, p.ups_d);
  Var ctr = ad::add(center_msg, ad::matmul(ad::transpose(lambda), device_msg));
  if (layer_norm) ctr = ad::layer_norm(ctr, p.ln_f_gain, p.ln_f_bias);
  return {dev, ctr};
}

Var decode(Var x, Var sqrt_p, std::span<const Var> weights, std::span<const Var> biases) {
  if (weights.size() != biases.size() || weights.empty()) {
    throw ValidationError("decode: weight and bias counts differ or are empty");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    x = ad::add_row(ad::matmul_nt(x, weights[l]), biases[l]);
    x = l + 1 < weights.size() ? ad::selu(x) : ad::sigmoid(x);
  }
  return ad::mul(sqrt_p, x);
}

std::vector<Var> beamformer_graph(Var u, const NetworkRealization& r) {
  const Var power = ad::abs2(u);
  std::vector<Var> v;
  v.reserve(r.num_clusters());
  for (std::size_t k = 0; k < r.num_clusters(); ++k) {
    const Var a = ad::weighted_gram(power, r.channels[k], r.noise(k));
    const std::size_t begin = r.cluster_offset[k];
    const std::size_t end = r.cluster_offset[k + 1];
    const std::vector<CVec> own(r.channels[k].begin() + static_cast<std::ptrdiff_t>(begin),
                                r.channels[k].begin() + static_cast<std::ptrdiff_t>(end));
    const Var b = ad::cmatvec(own, ad::slice_rows(u, begin, end));
    v.push_back(ad::hermitian_solve(a, b));
  }
  return v;
}

std::vector<Var> mse_graph(ad::Tape& tape, Var u, const std::vector<Var>& v, const NetworkRealization& r) {
  std::vector<Var> mse;
  mse.reserve(r.num_clusters());
  for (std::size_t k = 0; k < r.num_clusters(); ++k) {
    const Var g = ad::cmatvec_adjoint(r.channels[k], v[k]);
    const Var e = ad::complex_mul(ad::complex_conj(g), u);
    Array target(r.num_devices(), 2);
    for (std::size_t d = r.cluster_offset[k]; d < r.cluster_offset[k + 1]; ++d) target(d, 0) = 1.0;
    const Var err = ad::sum(ad::abs2(ad::sub(e, tape.constant(std::move(target)))));
    mse.push_back(ad::add(err, ad::scale(ad::sum(ad::abs2(v[k])), r.noise(k))));
  }
  return mse;
}

std::vector<Var> bind_parameters(ad::Tape& tape, const UdglModel& model, bool trainable) {
  std::vector<Var> vars;
  vars.reserve(model.parameters().size());
  for (const Array& p : model.parameters()) vars.push_back(trainable ? tape.variable(p) : tape.constant(p));
  return vars;
}

namespace {

// Realization-dependent constants shared by every block.
struct GraphConstants {
  Var own_mask;    // (D, K), 1 where device belongs to the cluster
  Var other_mask;  // (D, K)
  Var sign;        // (D, K), +1 own, -1 other
  Var sqrt_p;      // (D, 1)
};

GraphConstants make_constants(ad::Tape& tape, const NetworkRealization& r) {
  const std::size_t d_count = r.num_devices();
  const std::size_t k_count = r.num_clusters();
  Array own(d_count, k_count), other(d_count, k_count), sign(d_count, k_count), sp(d_count, 1);
  for (std::size_t d = 0; d < d_count; ++d) {
    for (std::size_t k = 0; k < k_count; ++k) {
      const bool is_own = r.cluster_of[d] == k;
      own(d, k) = is_own ? 1.0 : 0.0;
      other(d, k) = is_own ? 0.0 : 1.0;
      sign(d, k) = is_own ? 1.0 : -1.0;
    }
    sp(d, 0) = std::sqrt(r.max_power(d));
  }
  return {tape.constant(std::move(own)), tape.constant(std::move(other)), tape.constant(std::move(sign)),
          tape.constant(std::move(sp))};
}

Var row_sums(ad::Tape& tape, Var a) { return ad::matmul(a, tape.constant(Array(a.cols(), 1, 1.0))); }

Var block_forward(ad::Tape& tape, const UdglModel& model, std::span<const Var> params, const GroupLayout& gl,
                  const GraphConstants& c, const NetworkRealization& r, Var u_prev) {
  const UdglConfig& cfg = model.config();
  const std::size_t k_count = r.num_clusters();

  // Beamformers from the previous scalars.
  std::vector<Var> v = beamformer_graph(u_prev, r);
  if (cfg.detach_closed_form) {
    for (Var& vk : v) vk = ad::detach(vk);
  }

  // g_k = [h_{d,k}^H v_k]_d and its magnitudes.
  std::vector<Var> g(k_count), mags(k_count), own_parts(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    g[k] = ad::cmatvec_adjoint(r.channels[k], v[k]);
    mags[k] = ad::magnitude(g[k]);
    own_parts[k] = ad::slice_rows(g[k], r.cluster_offset[k], r.cluster_offset[k + 1]);
  }
  const Var gain = ad::concat_cols(mags);  // (D, K)
  Var phase = ad::phase_normalize(ad::concat_rows(own_parts));
  if (cfg.detach_closed_form) phase = ad::detach(phase);

  // Device features.
  const Var mag_u = ad::magnitude(u_prev);
  const Var own_gain_dk = ad::mul(gain, c.own_mask);
  const Var other_gain_dk = ad::mul(gain, c.other_mask);
  const Var own_gain = row_sums(tape, own_gain_dk);
  const Var other_gain = row_sums(tape, other_gain_dk);
  const Var dev_features =
      ad::concat_cols({mag_u, own_gain, other_gain, ad::mul(own_gain, mag_u), ad::mul(other_gain, mag_u)});

  // Center features.
  const std::vector<Var> mse = mse_graph(tape, u_prev, v, r);
  const Var own_t = ad::transpose(own_gain_dk);
  const Var other_t = ad::transpose(other_gain_dk);
  const Var ctr_features = ad::concat_cols({ad::concat_rows(mse), row_sums(tape, own_t), row_sums(tape, other_t),
                                            ad::matmul(own_t, mag_u), ad::matmul(other_t, mag_u)});

  Var lambda = ad::mul(gain, c.sign);
  if (cfg.detach_coefficients) lambda = ad::detach(lambda);

  Var hd = embed(dev_features, params[gl.omega_d]);
  Var hf = embed(ctr_features, params[gl.omega_f]);
  for (const auto& l : gl.layers) {
    const EncoderLayerVars lv{params[l.ups_d],     params[l.ups_f],     params[l.ln_d_gain],
                              params[l.ln_d_bias], params[l.ln_f_gain], params[l.ln_f_bias]};
    const MessagePassOutput mp = message_pass_layer(hd, hf, lambda, lv);
    hd = mp.devices;
    hf = mp.centers;
  }
  const Var encoded = ad::concat_cols({hd, ad::gather_rows(hf, r.cluster_of)});

  std::vector<Var> weights, biases;
  for (std::size_t l = 0; l < gl.dec_weight.size(); ++l) {
    weights.push_back(params[gl.dec_weight[l]]);
    biases.push_back(params[gl.dec_bias[l]]);
  }
  const Var modulus = decode(encoded, c.sqrt_p, weights, biases);
  return ad::complex_scale(modulus, phase);
}

}  // namespace

UdglGraph build_udgl_graph(ad::Tape& tape, const UdglModel& model, std::span<const Var> params,
                           const NetworkRealization& r, const std::vector<Complex>& u_init) {
  if (params.size() != model.parameters().size()) {
    throw ValidationError("build_udgl_graph: parameter binding does not match the model");
  }
  if (!r.has_channels()) throw ValidationError("build_udgl_graph: realization has no channels");
  if (u_init.size() != r.num_devices()) throw ValidationError("build_udgl_graph: u_init length mismatch");
  const GraphConstants c = make_constants(tape, r);
  UdglGraph out;
  Var u = tape.constant(Array::from_complex(u_init));
  for (std::size_t j = 0; j < model.config().blocks; ++j) {
    u = block_forward(tape, model, params, model.layout(model.config().group_of_block(j)), c, r, u);
    out.block_u.push_back(u);
  }
  out.u = u;
  out.v = beamformer_graph(u, r);
  if (model.config().detach_closed_form) {
    for (Var& vk : out.v) vk = ad::detach(vk);
  }
  out.mse = mse_graph(tape, u, out.v, r);
  return out;
}

std::vector<Complex> udgl_initial_scalars(const NetworkRealization& r) {
  std::vector<Complex> u(r.num_devices());
  for (std::size_t d = 0; d < u.size(); ++d) u[d] = std::sqrt(r.max_power(d));
  return u;
}

TransceiverStrategy udgl_forward(const UdglModel& model, const NetworkRealization& r,
                                 const std::vector<Complex>& u_init) {
  ad::Tape tape;
  const std::vector<Var> params = bind_parameters(tape, model, false);
  const UdglGraph g = build_udgl_graph(tape, model, params, r, u_init.empty() ? udgl_initial_scalars(r) : u_init);
  TransceiverStrategy s;
  s.u = ad::to_complex(g.u.value());
  for (const Var& vk : g.v) s.v.emplace_back(ad::to_complex(vk.value()));
  return s;
}

}  // namespace aircomp
