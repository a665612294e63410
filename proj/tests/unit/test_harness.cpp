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

#include "aircomp/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "aircomp/baselines.hpp"
#include "aircomp/binary_io.hpp"
#include "aircomp/errors.hpp"
#include "test_support.hpp"

namespace aircomp::harness {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("aircomp_harness_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

ScenarioConfig small_config() { return ScenarioConfig::uniform(2, 2, 2); }

std::vector<NetworkRealization> small_set(std::size_t count, std::uint64_t seed) {
  std::vector<NetworkRealization> set;
  for (std::size_t i = 0; i < count; ++i) set.push_back(generate_realization(small_config(), seed, i));
  return set;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Methods, ParseRoundTrip) {
  for (Method m : {Method::ao, Method::udgl, Method::fpt, Method::apt}) EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_THROW(parse_method("sgd"), ValidationError);
  EXPECT_THROW(parse_sweep_param("users"), ValidationError);
}

TEST(Gen, ZeroCountMakesEmptyDirectory) {
  TempDir tmp;
  const auto paths = generate_scenarios(small_config(), 0, 1, tmp.path() / "none");
  EXPECT_TRUE(paths.empty());
  EXPECT_TRUE(fs::is_directory(tmp.path() / "none"));
  EXPECT_TRUE(list_scenarios(tmp.path() / "none").empty());
}

TEST(Gen, SameSeedIsBytewiseIdentical) {
  TempDir tmp;
  const auto a = generate_scenarios(small_config(), 3, 7, tmp.path() / "a");
  const auto b = generate_scenarios(small_config(), 3, 7, tmp.path() / "b");
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].filename(), b[i].filename());
    EXPECT_EQ(io::read_file(a[i]), io::read_file(b[i]));
  }
  EXPECT_NE(a[0].filename().string().find("s7"), std::string::npos);
}

TEST(Gen, HundredFilesLoad) {
  TempDir tmp;
  const ScenarioConfig cfg = ScenarioConfig::defaults();
  generate_scenarios(cfg, 100, 11, tmp.path());
  const auto paths = list_scenarios(tmp.path());
  ASSERT_EQ(paths.size(), 100u);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    EXPECT_EQ(load_realization(paths[i]), generate_realization(cfg, 11, i));
  }
}

TEST(Solve, FptRowRecoversFullPowerAndRate) {
  TempDir tmp;
  const auto set = small_set(4, 3);
  const auto rows = solve_all(Method::fpt, set, {});
  write_runs_csv(rows, tmp.path() / "fpt.csv");
  const auto back = read_runs_csv(tmp.path() / "fpt.csv");
  ASSERT_EQ(back.size(), set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const NetworkRealization& r = set[i];
    EXPECT_EQ(back[i].index, i);
    EXPECT_GT(back[i].wall_us, 0.0);
    for (std::size_t d = 0; d < r.num_devices(); ++d) {
      EXPECT_NEAR(std::abs(back[i].strategy.u[d]), std::sqrt(r.max_power(d)), 1e-12);
    }
    const double recomputed = testing::reference_rate(back[i].strategy.u, back[i].strategy.v, r);
    EXPECT_NEAR(recomputed, back[i].weighted_sum, 1e-9);
    double sum = 0.0;
    for (std::size_t k = 0; k < back[i].rates.size(); ++k) sum += r.config.weights[k] * back[i].rates[k];
    EXPECT_NEAR(sum, back[i].weighted_sum, 1e-9);
  }
}

TEST(Solve, AoAndUdglJoinOnSeedAndIndex) {
  TempDir tmp;
  const auto set = small_set(3, 5);
  const UdglModel model(UdglConfig::tiny(), 2);
  const auto ao = solve_all(Method::ao, set, {});
  const auto udgl = solve_all(Method::udgl, set, {&model, 1});
  write_runs_csv(ao, tmp.path() / "ao.csv");
  write_runs_csv(udgl, tmp.path() / "udgl.csv");
  const auto a = read_runs_csv(tmp.path() / "ao.csv");
  const auto u = read_runs_csv(tmp.path() / "udgl.csv");
  ASSERT_EQ(a.size(), u.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].seed, u[i].seed);
    EXPECT_EQ(a[i].index, u[i].index);
    EXPECT_GT(a[i].ao_outer, 0);
    EXPECT_EQ(u[i].ao_outer, 0);
    EXPECT_NEAR(testing::reference_rate(u[i].strategy.u, u[i].strategy.v, set[i]), u[i].weighted_sum, 1e-9);
  }
}

TEST(Solve, UdglWithoutModelFails) {
  EXPECT_THROW(solve_one(Method::udgl, small_set(1, 1)[0], nullptr), ValidationError);
}

TEST(Solve, WorkerPoolKeepsIndexOrder) {
  const auto set = small_set(7, 9);
  const auto serial = solve_all(Method::apt, set, {nullptr, 1});
  const auto pooled = solve_all(Method::apt, set, {nullptr, 3});
  ASSERT_EQ(serial.size(), pooled.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(pooled[i].index, i);
    EXPECT_EQ(pooled[i].strategy, serial[i].strategy);
    EXPECT_EQ(pooled[i].weighted_sum, serial[i].weighted_sum);
  }
}

TEST(Csv, RejectsWrongVersion) {
  TempDir tmp;
  std::ofstream(tmp.path() / "bad.csv") << "# aircomp-csv v0 kind=runs\nseed\n";
  EXPECT_THROW(read_runs_csv(tmp.path() / "bad.csv"), FormatError);
}

TEST(Sweep, SingleValueMatchesSolveAggregation) {
  const ScenarioConfig cfg = small_config();
  const auto rows = sweep(cfg, SweepParam::devices, {2}, {Method::fpt}, 5, 4, {});
  ASSERT_EQ(rows.size(), 1u);
  const auto solved = solve_all(Method::fpt, small_set(5, 4), {});
  double mean = 0.0;
  for (const auto& r : solved) mean += r.weighted_sum;
  mean /= 5.0;
  EXPECT_EQ(rows[0].n, 5u);
  EXPECT_DOUBLE_EQ(rows[0].mean_rate, mean);
  EXPECT_EQ(rows[0].mean_rate, aggregate(solved, 2, Method::fpt).mean_rate);
}

TEST(Sweep, ClusterCountsReuseOneModel) {
  TempDir tmp;
  const UdglModel model(UdglConfig::tiny(), 1);
  const auto rows = sweep(small_config(), SweepParam::clusters, {2, 3}, {Method::udgl, Method::fpt}, 2, 8, {&model, 1});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].param_value, 2u);
  EXPECT_EQ(rows[3].param_value, 3u);
  EXPECT_EQ(rows[2].method, Method::udgl);
  write_sweep_csv(rows, SweepParam::clusters, tmp.path() / "sweep.csv");
  std::istringstream in(read_text(tmp.path() / "sweep.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# aircomp-csv v1 kind=sweep param=clusters");
  std::getline(in, line);
  EXPECT_EQ(line, "param_value,method,mean_R,std_R,n");
}

TEST(Sweep, WithSizeBroadcastsAndRejectsMixedClusters) {
  const ScenarioConfig c = with_size(small_config(), SweepParam::clusters, 4);
  EXPECT_EQ(c.num_clusters, 4u);
  EXPECT_EQ(c.devices_per_cluster, std::vector<std::size_t>(4, 2));
  ScenarioConfig mixed = small_config();
  mixed.devices_per_cluster = {2, 3};
  EXPECT_THROW(with_size(mixed, SweepParam::antennas, 4), ValidationError);
  EXPECT_THROW(with_size(small_config(), SweepParam::devices, 0), ValidationError);
}

TEST(Heatmap, SingleClusterIsOneByOne) {
  const NetworkRealization r = testing::normalized_instance(1, 2, 2, 3);
  const PowerMap m = power_map(fpt_strategy(r).strategy, r);
  ASSERT_EQ(m.clusters, 1u);
  EXPECT_EQ(m.power.size(), 1u);
  EXPECT_NEAR(m.cluster_power[0], 2.0, 1e-12);
}

TEST(Heatmap, DuplicateClustersGiveSymmetricMatrix) {
  // Cluster 1 mirrors cluster 0: h_{d',1} = h_{d,0}, h_{d',0} = h_{d,1}.
  const NetworkRealization base = testing::normalized_instance(2, 2, 2, 4);
  NetworkRealization r = base;
  for (std::size_t d = 0; d < 2; ++d) {
    r.channels[1][d + 2] = base.channels[0][d];
    r.channels[0][d + 2] = base.channels[1][d];
  }
  TransceiverStrategy s;
  s.u = {Complex(0.7, 0.1), Complex(-0.2, 0.5), Complex(0.7, 0.1), Complex(-0.2, 0.5)};
  s.v = {CVec{Complex(1.0, 0.3), Complex(-0.4, 0.2)}, CVec{Complex(1.0, 0.3), Complex(-0.4, 0.2)}};
  const PowerMap m = power_map(s, r);
  EXPECT_NEAR(m.at(0, 1), m.at(1, 0), 1e-12);
  EXPECT_NEAR(m.at(0, 0), m.at(1, 1), 1e-12);
}

TEST(Heatmap, MatchesIndependentRecomputation) {
  TempDir tmp;
  const NetworkRealization r = testing::normalized_instance(3, 2, 3, 6);
  std::mt19937_64 rng(6);
  TransceiverStrategy s{testing::random_scalars(r, rng), testing::random_beamformers(r, rng, 1.0)};
  const PowerMap m = power_map(s, r);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t j = 0; j < 3; ++j) {
      double ref = 0.0;
      for (std::size_t d = r.cluster_offset[j]; d < r.cluster_offset[j + 1]; ++d) {
        Complex g{};
        for (std::size_t i = 0; i < 3; ++i) g += std::conj(s.v[k][i]) * r.channels[k][d][i];
        ref += std::norm(g * s.u[d]);
      }
      EXPECT_NEAR(m.at(k, j), ref, 1e-12 * std::max(1.0, ref));
    }
  }
  write_heatmap_csv({{Method::fpt, m}}, tmp.path() / "heat.csv");
  std::istringstream in(read_text(tmp.path() / "heat.csv"));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 2u + 9u + 3u);
}

TEST(Bench, SummaryAndCsv) {
  TempDir tmp;
  const auto rows = solve_all(Method::fpt, small_set(3, 2), {});
  const BenchRow b = summarize_bench(rows, Method::fpt);
  EXPECT_EQ(b.n, 3u);
  EXPECT_GT(b.mean_us, 0.0);
  write_bench_csv({b}, tmp.path() / "bench.csv");
  EXPECT_EQ(read_text(tmp.path() / "bench.csv").rfind("# aircomp-csv v1 kind=bench\n", 0), 0u);
}

}  // namespace
}  // namespace aircomp::harness
