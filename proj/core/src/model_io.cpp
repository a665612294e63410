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

#include <string>

#include "aircomp/binary_io.hpp"
#include "aircomp/errors.hpp"
#include "aircomp/udgl.hpp"

namespace aircomp {

namespace {

constexpr std::uint32_t kFlagDetachCoefficients = 1u << 0;
constexpr std::uint32_t kFlagDetachClosedForm = 1u << 1;

void write_model(io::ByteWriter& w, const UdglModel& model) {
  const UdglConfig& c = model.config();
  w.magic("UDGL");
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(c.blocks));
  w.u32(static_cast<std::uint32_t>(c.encoder_layers));
  w.u32(static_cast<std::uint32_t>(c.hidden));
  w.u32(static_cast<std::uint32_t>(kNodeFeatureDim));
  w.u32(static_cast<std::uint32_t>(c.decoder_widths.size()));
  for (std::size_t width : c.decoder_widths) w.u32(static_cast<std::uint32_t>(width));
  std::uint32_t flags = 0;
  if (c.detach_coefficients) flags |= kFlagDetachCoefficients;
  if (c.detach_closed_form) flags |= kFlagDetachClosedForm;
  w.u32(flags);
  w.u64(model.scalar_count());
  for (const ad::Array& p : model.parameters()) {
    for (double x : p.data) w.f64(x);
  }
}

UdglModel read_model(io::ByteReader& rd) {
  rd.expect_magic("UDGL", "model file");
  const std::uint32_t version = rd.u32();
  if (version != kModelFormatVersion) {
    throw FormatError("model file: unsupported version " + std::to_string(version));
  }
  UdglConfig c;
  c.blocks = rd.u32();
  c.encoder_layers = rd.u32();
  c.hidden = rd.u32();
  const std::uint32_t feature_dim = rd.u32();
  if (feature_dim != kNodeFeatureDim) {
    throw FormatError("model file: feature dimension " + std::to_string(feature_dim) + " is not supported");
  }
  const std::uint32_t n_widths = rd.u32();
  if (n_widths > 64) throw FormatError("model file: implausible decoder depth");
  c.decoder_widths.resize(n_widths);
  for (auto& width : c.decoder_widths) width = rd.u32();
  const std::uint32_t flags = rd.u32();
  c.detach_coefficients = (flags & kFlagDetachCoefficients) != 0;
  c.detach_closed_form = (flags & kFlagDetachClosedForm) != 0;
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
  UdglModel model(c, 0);
  const std::uint64_t count = rd.u64();
  if (count != model.scalar_count()) {
    throw FormatError("model file: parameter count " + std::to_string(count) + " does not match header (" +
                      std::to_string(model.scalar_count()) + ")");
  }
  for (ad::Array& p : model.parameters()) {
    for (double& x : p.data) x = rd.f64();
  }
  return model;
}

}  // namespace

std::vector<std::byte> serialize_model(const UdglModel& model) {
  io::ByteWriter w;
  write_model(w, model);
  return w.take();
}

UdglModel deserialize_model(std::span<const std::byte> bytes) {
  io::ByteReader rd(bytes);
  UdglModel m = read_model(rd);
  if (rd.remaining() != 0 && !rd.peek_magic("CKPT")) throw FormatError("model file: trailing bytes");
  return m;
}

void save_model(const UdglModel& model, const std::filesystem::path& path) {
  io::write_file(path, serialize_model(model));
}

UdglModel load_model(const std::filesystem::path& path) { return deserialize_model(io::read_file(path)); }

void save_checkpoint(const UdglModel& model, const TrainingState& state, const std::filesystem::path& path) {
  io::ByteWriter w;
  write_model(w, model);
  w.magic("CKPT");
  w.u32(state.epoch);
  w.f64(state.lr);
  w.u32(state.stage);
  w.u64(state.seed);
  io::write_file(path, w.bytes());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::vector<std::byte> bytes = io::read_file(path);
  io::ByteReader rd(bytes);
  Checkpoint ck{read_model(rd), {}};
  rd.expect_magic("CKPT", "checkpoint file");
  ck.state.epoch = rd.u32();
  ck.state.lr = rd.f64();
  ck.state.stage = rd.u32();
  ck.state.seed = rd.u64();
  if (rd.remaining() != 0) throw FormatError("checkpoint file: trailing bytes");
  return ck;
}

}  // namespace aircomp
