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

#include "aircomp/scenario.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <spdlog/spdlog.h>

#include "aircomp/binary_io.hpp"
#include "aircomp/errors.hpp"

namespace aircomp {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

ScenarioConfig ScenarioConfig::uniform(std::size_t clusters, std::size_t devices,
                                       std::size_t antennas) {
  ScenarioConfig cfg;
  cfg.num_clusters = clusters;
  cfg.devices_per_cluster.assign(clusters, devices);
  cfg.antennas.assign(clusters, antennas);
  cfg.noise_power.assign(clusters, 1e-12);  // -90 dBm
  cfg.max_power.assign(clusters, 1.0);
  cfg.weights.assign(clusters, 1.0);
  cfg.quant_bits.assign(clusters, 2);
  return cfg;
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("ScenarioConfig: " + msg); };
  if (num_clusters < 1) fail("num_clusters must be >= 1");
  auto check_len = [&](std::size_t n, const char* name) {
    if (n != num_clusters) {
      fail(std::string(name) + " has " + std::to_string(n) + " entries, expected " +
           std::to_string(num_clusters));
    }
  };
  check_len(devices_per_cluster.size(), "devices_per_cluster");
  check_len(antennas.size(), "antennas");
  check_len(noise_power.size(), "noise_power");
  check_len(max_power.size(), "max_power");
  check_len(weights.size(), "weights");
  check_len(quant_bits.size(), "quant_bits");
  for (std::size_t k = 0; k < num_clusters; ++k) {
    if (devices_per_cluster[k] < 1) fail("devices_per_cluster must be >= 1");
    if (antennas[k] < 1) fail("antennas must be >= 1");
    if (!(noise_power[k] > 0.0)) fail("noise_power must be > 0");
    if (!(max_power[k] > 0.0)) fail("max_power must be > 0");
    if (!(weights[k] >= 0.0)) fail("weights must be >= 0");
    if (quant_bits[k] < 1) fail("quant_bits must be >= 1");
  }
  if (!(device_annulus_min > 0.0)) fail("device_annulus_min must be > 0");
  if (device_annulus_min > device_annulus_max) fail("device_annulus_min exceeds device_annulus_max");
  if (device_annulus_max > area_radius) fail("device_annulus_max exceeds area_radius");
  if (!(rician_factor >= 0.0)) fail("rician_factor must be >= 0");
  if (!(reference_distance > 0.0)) fail("reference_distance must be > 0");
  if (!std::isfinite(pathloss_exponent) || !std::isfinite(ref_attenuation_db)) {
    fail("propagation parameters must be finite");
  }
}

std::size_t ScenarioConfig::total_devices() const {
  std::size_t n = 0;
  for (auto v : devices_per_cluster) n += v;
  return n;
}

ScenarioConfig ScenarioConfig::scaled_geometry(double factor) const {
  ScenarioConfig out = *this;
  out.area_radius *= factor;
  out.device_annulus_min *= factor;
  out.device_annulus_max *= factor;
  return out;
}

double path_gain(double dist, const ScenarioConfig& cfg) {
  if (dist < cfg.reference_distance) {
    spdlog::warn("device at distance {} m closer than reference distance; clamped to {} m", dist,
                 cfg.reference_distance);
    dist = cfg.reference_distance;
  }
  return std::pow(10.0, cfg.ref_attenuation_db / 10.0) *
         std::pow(dist / cfg.reference_distance, -cfg.pathloss_exponent);
}

CVec steering_vector(std::size_t antennas, double bearing) {
  CVec a(antennas);
  const double s = std::sin(bearing);
  for (std::size_t m = 0; m < antennas; ++m) {
    a[m] = std::polar(1.0, std::numbers::pi * static_cast<double>(m) * s);
  }
  return a;
}

CVec draw_channel(double dist, double bearing, std::size_t antennas, const ScenarioConfig& cfg,
                  std::mt19937_64& rng) {
  const double kappa = cfg.rician_factor;
  const double amp = std::sqrt(path_gain(dist, cfg));
  const double los = std::sqrt(kappa / (1.0 + kappa));
  const double nlos = std::sqrt(1.0 / (1.0 + kappa));
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  CVec h = steering_vector(antennas, bearing);
  for (std::size_t m = 0; m < antennas; ++m) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    h[m] = amp * (los * h[m] + nlos * Complex(re, im));
  }
  return h;
}

std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

NetworkRealization sample_topology(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  NetworkRealization r;
  r.config = cfg;
  r.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;

  const std::size_t k_count = cfg.num_clusters;
  r.fusion_centers.reserve(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double rad = cfg.area_radius * std::sqrt(unit(rng));
    const double ang = two_pi * unit(rng);
    r.fusion_centers.push_back({rad * std::cos(ang), rad * std::sin(ang)});
  }

  const double rmin2 = cfg.device_annulus_min * cfg.device_annulus_min;
  const double rmax2 = cfg.device_annulus_max * cfg.device_annulus_max;
  r.cluster_offset.assign(1, 0);
  for (std::size_t k = 0; k < k_count; ++k) {
    const Point& fc = r.fusion_centers[k];
    for (std::size_t n = 0; n < cfg.devices_per_cluster[k]; ++n) {
      // Area-uniform radius within the annulus.
      const double rad = std::sqrt(rmin2 + (rmax2 - rmin2) * unit(rng));
      const double ang = two_pi * unit(rng);
      r.devices.push_back({fc.x + rad * std::cos(ang), fc.y + rad * std::sin(ang)});
      r.cluster_of.push_back(k);
    }
    r.cluster_offset.push_back(r.devices.size());
  }
  return r;
}

NetworkRealization generate_channels(NetworkRealization r, std::uint64_t seed) {
  const ScenarioConfig& cfg = r.config;
  std::mt19937_64 rng(seed);
  r.channels.assign(r.num_clusters(), {});
  for (std::size_t k = 0; k < r.num_clusters(); ++k) {
    const Point& fc = r.fusion_centers[k];
    auto& row = r.channels[k];
    row.reserve(r.num_devices());
    for (std::size_t d = 0; d < r.num_devices(); ++d) {
      const Point& dev = r.devices[d];
      const double bearing = std::atan2(fc.y - dev.y, fc.x - dev.x);
      row.push_back(draw_channel(distance(dev, fc), bearing, cfg.antennas[k], cfg, rng));
    }
  }
  return r;
}

NetworkRealization generate_realization(const ScenarioConfig& cfg, std::uint64_t master_seed,
                                        std::uint64_t index) {
  const std::uint64_t base = split_seed(master_seed, index);
  auto r = generate_channels(sample_topology(cfg, split_seed(base, 0)), split_seed(base, 1));
  r.seed = master_seed;
  r.index = index;
  return r;
}

namespace {

void write_point(io::ByteWriter& w, const Point& p) {
  w.f64(p.x);
  w.f64(p.y);
}

Point read_point(io::ByteReader& rd) {
  Point p;
  p.x = rd.f64();
  p.y = rd.f64();
  return p;
}

constexpr std::uint32_t kMaxReasonableCount = 1u << 20;

}  // namespace

std::vector<std::byte> serialize_realization(const NetworkRealization& r) {
  const ScenarioConfig& cfg = r.config;
  io::ByteWriter w;
  w.magic("ACSN");
  w.u32(kScenarioFormatVersion);
  w.u32(static_cast<std::uint32_t>(cfg.num_clusters));
  for (std::size_t k = 0; k < cfg.num_clusters; ++k) {
    w.u32(static_cast<std::uint32_t>(cfg.devices_per_cluster[k]));
    w.u32(static_cast<std::uint32_t>(cfg.antennas[k]));
    w.f64(cfg.noise_power[k]);
    w.f64(cfg.max_power[k]);
    w.f64(cfg.weights[k]);
    w.u32(cfg.quant_bits[k]);
  }
  w.f64(cfg.area_radius);
  w.f64(cfg.device_annulus_min);
  w.f64(cfg.device_annulus_max);
  w.f64(cfg.pathloss_exponent);
  w.f64(cfg.ref_attenuation_db);
  w.f64(cfg.reference_distance);
  w.f64(cfg.rician_factor);
  w.u64(r.seed);
  w.u64(r.index);

  for (const auto& p : r.fusion_centers) write_point(w, p);
  for (const auto& p : r.devices) write_point(w, p);

  w.u32(r.has_channels() ? 1u : 0u);
  if (r.has_channels()) {
    for (std::size_t k = 0; k < r.num_clusters(); ++k) {
      for (std::size_t d = 0; d < r.num_devices(); ++d) {
        for (double x : r.channels[k][d].reals()) w.f64(x);
      }
    }
  }
  return w.take();
}

NetworkRealization deserialize_realization(std::span<const std::byte> bytes) {
  io::ByteReader rd(bytes);
  rd.expect_magic("ACSN", "scenario");
  const std::uint32_t version = rd.u32();
  if (version != kScenarioFormatVersion) {
    throw FormatError("scenario: unsupported version " + std::to_string(version));
  }
  NetworkRealization r;
  ScenarioConfig& cfg = r.config;
  const std::uint32_t k_count = rd.u32();
  if (k_count == 0 || k_count > kMaxReasonableCount) throw FormatError("scenario: bad cluster count");
  cfg.num_clusters = k_count;
  cfg.devices_per_cluster.resize(k_count);
  cfg.antennas.resize(k_count);
  cfg.noise_power.resize(k_count);
  cfg.max_power.resize(k_count);
  cfg.weights.resize(k_count);
  cfg.quant_bits.resize(k_count);
  for (std::uint32_t k = 0; k < k_count; ++k) {
    cfg.devices_per_cluster[k] = rd.u32();
    cfg.antennas[k] = rd.u32();
    if (cfg.devices_per_cluster[k] > kMaxReasonableCount || cfg.antennas[k] > kMaxReasonableCount) {
      throw FormatError("scenario: implausible cluster dimensions");
    }
    cfg.noise_power[k] = rd.f64();
    cfg.max_power[k] = rd.f64();
    cfg.weights[k] = rd.f64();
    cfg.quant_bits[k] = rd.u32();
  }
  cfg.area_radius = rd.f64();
  cfg.device_annulus_min = rd.f64();
  cfg.device_annulus_max = rd.f64();
  cfg.pathloss_exponent = rd.f64();
  cfg.ref_attenuation_db = rd.f64();
  cfg.reference_distance = rd.f64();
  cfg.rician_factor = rd.f64();
  r.seed = rd.u64();
  r.index = rd.u64();
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw FormatError(std::string("scenario: invalid config block: ") + e.what());
  }

  for (std::uint32_t k = 0; k < k_count; ++k) r.fusion_centers.push_back(read_point(rd));
  r.cluster_offset.assign(1, 0);
  for (std::uint32_t k = 0; k < k_count; ++k) {
    for (std::size_t n = 0; n < cfg.devices_per_cluster[k]; ++n) {
      r.devices.push_back(read_point(rd));
      r.cluster_of.push_back(k);
    }
    r.cluster_offset.push_back(r.devices.size());
  }

  const std::uint32_t has_channels = rd.u32();
  if (has_channels > 1) throw FormatError("scenario: bad channel flag");
  if (has_channels == 1) {
    r.channels.assign(k_count, {});
    for (std::uint32_t k = 0; k < k_count; ++k) {
      r.channels[k].reserve(r.num_devices());
      for (std::size_t d = 0; d < r.num_devices(); ++d) {
        CVec h(cfg.antennas[k]);
        for (double& x : h.reals()) x = rd.f64();
        r.channels[k].push_back(std::move(h));
      }
    }
  }
  if (rd.remaining() != 0) throw FormatError("scenario: trailing bytes");
  return r;
}

void save_realization(const NetworkRealization& r, const std::filesystem::path& path) {
  io::write_file(path, serialize_realization(r));
}

NetworkRealization load_realization(const std::filesystem::path& path) {
  return deserialize_realization(io::read_file(path));
}

}  // namespace aircomp
