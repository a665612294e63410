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
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "aircomp/complex_linalg.hpp"

namespace aircomp {

using linalg::Complex;
using linalg::CVec;

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

double distance(const Point& a, const Point& b);

// Network geometry, propagation and per-cluster link parameters. All
// per-cluster vectors have length num_clusters. Powers are linear watts.
struct ScenarioConfig {
  std::size_t num_clusters = 5;
  std::vector<std::size_t> devices_per_cluster;
  std::vector<std::size_t> antennas;
  double area_radius = 2000.0;
  double device_annulus_min = 100.0;
  double device_annulus_max = 1000.0;
  double pathloss_exponent = 2.2;
  double ref_attenuation_db = -30.0;
  double reference_distance = 1.0;
  double rician_factor = 5.0;
  std::vector<double> noise_power;
  std::vector<double> max_power;
  std::vector<double> weights;
  std::vector<std::uint32_t> quant_bits;

  // K clusters of N devices, M antennas each, everything else at the
  // simulation defaults (-90 dBm noise, 1 W, unit weights, Q = 2).
  static ScenarioConfig uniform(std::size_t clusters, std::size_t devices, std::size_t antennas);
  static ScenarioConfig defaults() { return uniform(5, 5, 8); }

  void validate() const;
  std::size_t total_devices() const;

  // Scales every geometric distance (area radius and annulus) by factor.
  ScenarioConfig scaled_geometry(double factor) const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

// One network draw: positions plus every device-to-center channel. Devices are
// indexed globally and stored cluster-contiguously: cluster k owns
// [cluster_offset[k], cluster_offset[k + 1]).
struct NetworkRealization {
  ScenarioConfig config;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::vector<Point> fusion_centers;
  std::vector<Point> devices;
  std::vector<std::size_t> cluster_of;
  std::vector<std::size_t> cluster_offset;
  // channels[k][d] is h_{d,k}, length antennas[k]. Empty for topology-only draws.
  std::vector<std::vector<CVec>> channels;

  std::size_t num_clusters() const noexcept { return fusion_centers.size(); }
  std::size_t num_devices() const noexcept { return devices.size(); }
  std::size_t cluster_size(std::size_t k) const { return cluster_offset[k + 1] - cluster_offset[k]; }
  std::size_t antennas(std::size_t k) const { return config.antennas[k]; }
  const CVec& channel(std::size_t device, std::size_t k) const { return channels[k][device]; }
  double max_power(std::size_t device) const { return config.max_power[cluster_of[device]]; }
  double noise(std::size_t k) const { return config.noise_power[k]; }
  bool has_channels() const noexcept { return !channels.empty(); }

  friend bool operator==(const NetworkRealization&, const NetworkRealization&) = default;
};

// Large-scale gain 10^(ref_db/10) * (d / d_ref)^(-alpha). Distances below
// d_ref are clamped to d_ref.
double path_gain(double dist, const ScenarioConfig& cfg);

// Half-wavelength ULA response, entry m = exp(j pi m sin(bearing)).
CVec steering_vector(std::size_t antennas, double bearing);

// One Rician draw sqrt(g(d)) (sqrt(k/(1+k)) a(bearing) + sqrt(1/(1+k)) CN(0, I)).
CVec draw_channel(double dist, double bearing, std::size_t antennas, const ScenarioConfig& cfg,
                  std::mt19937_64& rng);

// Independent sub-seed derived from a master seed (splitmix64).
std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream);

NetworkRealization sample_topology(const ScenarioConfig& cfg, std::uint64_t seed);
NetworkRealization generate_channels(NetworkRealization topology, std::uint64_t seed);

// Topology and fading seeds split from one master seed.
NetworkRealization generate_realization(const ScenarioConfig& cfg, std::uint64_t master_seed,
                                        std::uint64_t index = 0);

// Binary scenario format: "ACSN", u32 version, config, positions, channels as
// little-endian f64 interleaved (re, im).
inline constexpr std::uint32_t kScenarioFormatVersion = 1;

std::vector<std::byte> serialize_realization(const NetworkRealization& r);
NetworkRealization deserialize_realization(std::span<const std::byte> bytes);

void save_realization(const NetworkRealization& r, const std::filesystem::path& path);
NetworkRealization load_realization(const std::filesystem::path& path);

}  // namespace aircomp
