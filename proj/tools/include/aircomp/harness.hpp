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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aircomp/metrics.hpp"
#include "aircomp/scenario.hpp"
#include "aircomp/udgl.hpp"

// Batch orchestration behind the aircomp command line. Every CSV starts with
// "# aircomp-csv v1 kind=<kind>" followed by a column header.
namespace aircomp::harness {

inline constexpr std::string_view kCsvVersion = "v1";

enum class Method { ao, udgl, fpt, apt };

Method parse_method(std::string_view name);
std::string_view method_name(Method m);

// One solved scenario. ao_outer / ao_inner are zero for other methods.
struct RunRecord {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::size_t clusters = 0;
  std::size_t devices = 0;   // per cluster, first cluster
  std::size_t antennas = 0;  // first cluster
  Method method = Method::fpt;
  std::vector<double> rates;
  double weighted_sum = 0.0;
  double wall_us = 0.0;
  int ao_outer = 0;
  int ao_inner = 0;
  TransceiverStrategy strategy;
};

struct SolveOptions {
  const UdglModel* model = nullptr;  // required for Method::udgl
  std::size_t threads = 1;
};

// Scenario file name for (seed, index).
std::string scenario_file_name(std::uint64_t seed, std::uint64_t index);

// Writes count realizations drawn from (seed, index) into out_dir, creating
// it when missing. Returns the written paths in index order.
std::vector<std::filesystem::path> generate_scenarios(const ScenarioConfig& cfg, std::size_t count,
                                                      std::uint64_t seed, const std::filesystem::path& out_dir);

// Realization files in dir, sorted by name.
std::vector<std::filesystem::path> list_scenarios(const std::filesystem::path& dir);

// Solves one realization; only the method call is timed. AO starts from a
// random strategy seeded by (realization seed, index).
RunRecord solve_one(Method method, const NetworkRealization& r, const UdglModel* model);

// Solves every realization on a worker pool; rows follow input order.
std::vector<RunRecord> solve_all(Method method, const std::vector<NetworkRealization>& set,
                                 const SolveOptions& opts);

// Columns: seed, index, K, N, M, method, R, rates, wall_us, ao_outer,
// ao_inner, u, v. rates is ';'-separated per cluster. u is ';'-separated
// "re:im" pairs; v joins clusters with '|' and entries with ';'. Values are
// written with 17 significant digits.
void write_runs_csv(const std::vector<RunRecord>& rows, const std::filesystem::path& path);
std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path);

enum class SweepParam { clusters, devices, antennas };
SweepParam parse_sweep_param(std::string_view name);
std::string_view sweep_param_name(SweepParam p);

// Copy of cfg with one size changed. Per-cluster fields must be uniform;
// their first entry is broadcast to the new cluster count.
ScenarioConfig with_size(const ScenarioConfig& cfg, SweepParam param, std::size_t value);

struct SweepRow {
  std::size_t param_value = 0;
  Method method = Method::fpt;
  double mean_rate = 0.0;
  double std_rate = 0.0;  // population standard deviation
  std::size_t n = 0;
};

// Mean and spread of R over the rows.
SweepRow aggregate(const std::vector<RunRecord>& rows, std::size_t param_value, Method method);

// For each value, count scenarios from (seed, index) solved by every method.
// UDGL reuses the given model at every size.
std::vector<SweepRow> sweep(const ScenarioConfig& base, SweepParam param, const std::vector<std::size_t>& values,
                            const std::vector<Method>& methods, std::size_t count, std::uint64_t seed,
                            const SolveOptions& opts);

// Columns: param_value, method, mean_R, std_R, n.
void write_sweep_csv(const std::vector<SweepRow>& rows, SweepParam param, const std::filesystem::path& path);

struct BenchRow {
  Method method = Method::fpt;
  double mean_us = 0.0;
  double std_us = 0.0;
  double mean_rate = 0.0;
  double mean_ao_outer = 0.0;
  std::size_t n = 0;
};

BenchRow summarize_bench(const std::vector<RunRecord>& rows, Method method);

// Columns: method, mean_us, std_us, mean_R, mean_ao_outer, n.
void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& path);

// power(k, j) = sum over devices d of cluster j of |v_k^H h_{d,k} u_d|^2:
// the diagonal is signal power at center k, off-diagonal entries the
// interference it receives from cluster j. cluster_power(j) = sum |u_d|^2.
struct PowerMap {
  std::size_t clusters = 0;
  std::vector<double> power;  // row-major K x K
  std::vector<double> cluster_power;
  double at(std::size_t k, std::size_t j) const { return power[k * clusters + j]; }
};

PowerMap power_map(const TransceiverStrategy& s, const NetworkRealization& r);

// Long format. Columns: method, kind, row, col, value with kind either
// "matrix" or "cluster_power" (col 0).
void write_heatmap_csv(const std::vector<std::pair<Method, PowerMap>>& maps, const std::filesystem::path& path);

}  // namespace aircomp::harness
