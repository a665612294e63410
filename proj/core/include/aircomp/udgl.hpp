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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "aircomp/autodiff.hpp"
#include "aircomp/metrics.hpp"
#include "aircomp/scenario.hpp"

// Unfolded deep graph learning model. Each block recomputes the MMSE
// beamformers, aligns the transmit phases, and predicts the transmit moduli
// with a heterogeneous device/center GNN followed by an MLP decoder.
namespace aircomp {

inline constexpr std::size_t kNodeFeatureDim = 5;

struct UdglConfig {
  std::size_t blocks = 6;          // J
  std::size_t encoder_layers = 2;  // I
  std::size_t hidden = 32;
  // Decoder widths including the 2*hidden input and the scalar output.
  std::vector<std::size_t> decoder_widths{64, 1000, 500, 32, 1};
  // Aggregation coefficients are constants of their block.
  bool detach_coefficients = true;
  // Stop gradients at the closed-form beamformer and phase outputs.
  bool detach_closed_form = false;

  // J = 2, I = 1, hidden 8, decoder [16, 64, 32, 8, 1].
  static UdglConfig tiny();

  void validate() const;
  // Two sharing groups: blocks [0, ceil(J/2)) and the rest. J = 1 has one.
  std::size_t num_groups() const { return blocks > 1 ? 2 : 1; }
  std::size_t group_of_block(std::size_t j) const { return j < (blocks + 1) / 2 ? 0 : 1; }

  friend bool operator==(const UdglConfig&, const UdglConfig&) = default;
};

// Indices into UdglModel::parameters() for one sharing group.
struct GroupLayout {
  struct EncoderLayer {
    std::size_t ups_d, ups_f, ln_d_gain, ln_d_bias, ln_f_gain, ln_f_bias;
    friend bool operator==(const EncoderLayer&, const EncoderLayer&) = default;
  };
  std::size_t omega_d = 0;  // (hidden, 5)
  std::size_t omega_f = 0;  // (hidden, 5)
  std::vector<EncoderLayer> layers;  // ups_* are (hidden, hidden), LN rows (1, hidden)
  std::vector<std::size_t> dec_weight;  // (out, in)
  std::vector<std::size_t> dec_bias;    // (1, out)
  friend bool operator==(const GroupLayout&, const GroupLayout&) = default;
};

class UdglModel {
 public:
  UdglModel() = default;
  // Glorot-uniform embeddings and message weights, LeCun-normal decoder
  // weights, zero biases, unit LayerNorm gains.
  explicit UdglModel(UdglConfig cfg, std::uint64_t seed = 0);

  const UdglConfig& config() const noexcept { return cfg_; }
  const GroupLayout& layout(std::size_t group) const { return layout_.at(group); }

  // Declaration order: per group Omega_D, Omega_F, per encoder layer
  // Upsilon_D, Upsilon_F, LN gains and biases (devices then centers), then
  // decoder weight/bias pairs.
  std::vector<ad::Array>& parameters() noexcept { return params_; }
  const std::vector<ad::Array>& parameters() const noexcept { return params_; }
  std::size_t scalar_count() const;

  friend bool operator==(const UdglModel&, const UdglModel&) = default;

 private:
  void build_layout();

  UdglConfig cfg_;
  std::vector<GroupLayout> layout_;
  std::vector<ad::Array> params_;
};

// ---- plain feature extraction (no tape) ----
using NodeFeatures = std::array<double, kNodeFeatureDim>;
// {|u|, |h_own^H v_own|, sum_{k != own} |h^H v_k|, and both times |u|}.
std::vector<NodeFeatures> extract_device_features(const std::vector<Complex>& u_prev,
                                                  const std::vector<CVec>& v,
                                                  const NetworkRealization& r);
// {MSE_k(u_prev, v), sum_{own} |h^H v_k|, sum_{others} |h^H v_k|, and both
// with |u| inside the sum}.
std::vector<NodeFeatures> extract_center_features(const std::vector<Complex>& u_prev,
                                                  const std::vector<CVec>& v,
                                                  const NetworkRealization& r);

// ---- differentiable building blocks ----
struct EncoderLayerVars {
  ad::Var ups_d, ups_f, ln_d_gain, ln_d_bias, ln_f_gain, ln_f_bias;
};

// tanh(features Omega^T), features (n, 5), omega (hidden, 5).
ad::Var embed(ad::Var features, ad::Var omega);

struct MessagePassOutput {
  ad::Var devices;  // (D, hidden)
  ad::Var centers;  // (K, hidden)
};
// Devices first: LN(H_D Y_D^T + Lambda H_F Y_F^T); then centers with the
// updated devices: LN(H_F Y_F^T + Lambda^T H_D' Y_D^T). lambda is (D, K).
MessagePassOutput message_pass_layer(ad::Var devices, ad::Var centers, ad::Var lambda,
                                     const EncoderLayerVars& p, bool layer_norm = true);

// sqrt_p (n, 1) * sigmoid(MLP(x)) with SELU between layers.
ad::Var decode(ad::Var x, ad::Var sqrt_p, std::span<const ad::Var> weights,
               std::span<const ad::Var> biases);

// Per-cluster MSE (each 1x1) for transmit scalars u (D, 2) and beamformers v.
std::vector<ad::Var> mse_graph(ad::Tape& tape, ad::Var u, const std::vector<ad::Var>& v,
                               const NetworkRealization& r);

// MMSE beamformers for u (D, 2), each (M_k, 2).
std::vector<ad::Var> beamformer_graph(ad::Var u, const NetworkRealization& r);

struct UdglGraph {
  std::vector<ad::Var> block_u;  // u after each block
  ad::Var u;                     // final (D, 2)
  std::vector<ad::Var> v;        // final beamformers from u
  std::vector<ad::Var> mse;      // per-cluster MSE at (u, v)
};

// Places every parameter on the tape, as variables when trainable.
std::vector<ad::Var> bind_parameters(ad::Tape& tape, const UdglModel& model, bool trainable);

UdglGraph build_udgl_graph(ad::Tape& tape, const UdglModel& model, std::span<const ad::Var> params,
                           const NetworkRealization& r, const std::vector<Complex>& u_init);

// u_d = sqrt(P_d), zero phase.
std::vector<Complex> udgl_initial_scalars(const NetworkRealization& r);

// Inference: J blocks from u_init (full power when empty), final MMSE beamformers.
TransceiverStrategy udgl_forward(const UdglModel& model, const NetworkRealization& r,
                                 const std::vector<Complex>& u_init = {});

// ---- model files ----
inline constexpr std::uint32_t kModelFormatVersion = 1;

struct TrainingState {
  std::uint32_t epoch = 0;
  double lr = 0.0;
  std::uint32_t stage = 1;
  std::uint64_t seed = 0;
  friend bool operator==(const TrainingState&, const TrainingState&) = default;
};

// "UDGL", u32 version, u32 J, I, hidden, feature dim, width count, widths,
// u32 flags, u64 scalar count, then every parameter as little-endian f64.
std::vector<std::byte> serialize_model(const UdglModel& model);
UdglModel deserialize_model(std::span<const std::byte> bytes);
void save_model(const UdglModel& model, const std::filesystem::path& path);
UdglModel load_model(const std::filesystem::path& path);

// Model bytes followed by "CKPT", u32 epoch, f64 lr, u32 stage, u64 seed.
void save_checkpoint(const UdglModel& model, const TrainingState& state,
                     const std::filesystem::path& path);
struct Checkpoint {
  UdglModel model;
  TrainingState state;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace aircomp
