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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <span>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "aircomp/ao_solver.hpp"
#include "aircomp/baselines.hpp"
#include "aircomp/errors.hpp"

namespace aircomp::harness {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw FormatError("csv: bad number '" + s + "'");
  }
  if (pos != s.size()) throw FormatError("csv: bad number '" + s + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  std::size_t pos = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw FormatError("csv: bad integer '" + s + "'");
  }
  if (pos != s.size()) throw FormatError("csv: bad integer '" + s + "'");
  return v;
}

std::string join_complex(std::span<const Complex> z) {
  std::string out;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (i) out += ';';
    out += fmt::format("{:.17g}:{:.17g}", z[i].real(), z[i].imag());
  }
  return out;
}

std::vector<Complex> parse_complex(const std::string& s) {
  std::vector<Complex> out;
  if (s.empty()) return out;
  for (const std::string& item : split(s, ';')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw FormatError("csv: bad complex entry '" + item + "'");
    out.emplace_back(parse_double(item.substr(0, colon)), parse_double(item.substr(colon + 1)));
  }
  return out;
}

std::ofstream open_csv(const std::filesystem::path& path, std::string_view kind, std::string_view columns) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  out << "# aircomp-csv " << kCsvVersion << " kind=" << kind << '\n' << columns << '\n';
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw ValidationError("write failed for " + path.string());
}

std::pair<double, double> mean_std(const std::vector<double>& x) {
  if (x.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(x.size()))};
}

// Runs job(i) for i in [0, n) on up to threads workers. The first exception
// is rethrown after all workers stop.
template <typename Job>
void parallel_for(std::size_t n, std::size_t threads, Job job) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            job(i);
          } catch (...) {
            const std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

Method parse_method(std::string_view name) {
  if (name == "ao") return Method::ao;
  if (name == "udgl") return Method::udgl;
  if (name == "fpt") return Method::fpt;
  if (name == "apt") return Method::apt;
  throw ValidationError("unknown method '" + std::string(name) + "' (expected ao, udgl, fpt or apt)");
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::ao: return "ao";
    case Method::udgl: return "udgl";
    case Method::fpt: return "fpt";
    case Method::apt: return "apt";
  }
  return "?";
}

std::string scenario_file_name(std::uint64_t seed, std::uint64_t index) {
  return fmt::format("scenario_s{}_i{:06d}.acsn", seed, index);
}

std::vector<std::filesystem::path> generate_scenarios(const ScenarioConfig& cfg, std::size_t count,
                                                      std::uint64_t seed, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < count; ++i) {
    paths.push_back(out_dir / scenario_file_name(seed, i));
    save_realization(generate_realization(cfg, seed, i), paths.back());
  }
  return paths;
}

std::vector<std::filesystem::path> list_scenarios(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".acsn") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

RunRecord solve_one(Method method, const NetworkRealization& r, const UdglModel* model) {
  if (method == Method::udgl && model == nullptr) throw ValidationError("udgl needs a trained model (--model)");
  RunRecord rec;
  rec.seed = r.seed;
  rec.index = r.index;
  rec.clusters = r.num_clusters();
  rec.devices = r.cluster_size(0);
  rec.antennas = r.antennas(0);
  rec.method = method;

  TransceiverStrategy init;
  if (method == Method::ao) init = random_initial_strategy(r, split_seed(r.seed, r.index));
  const auto t0 = Clock::now();
  switch (method) {
    case Method::ao: {
      const AoResult res = alternating_optimize(r, init);
      rec.strategy = res.strategy;
      rec.ao_outer = res.trace.outer_iterations;
      rec.ao_inner = res.trace.inner_iterations;
      break;
    }
    case Method::udgl:
      rec.strategy = udgl_forward(*model, r);
      break;
    case Method::fpt:
      rec.strategy = fpt_strategy(r).strategy;
      break;
    case Method::apt:
      rec.strategy = apt_strategy(r).strategy;
      break;
  }
  rec.wall_us = std::max(std::chrono::duration<double, std::micro>(Clock::now() - t0).count(), 1e-3);
  const RateReport rep = weighted_sum_rate(rec.strategy, r);
  rec.rates = rep.rate;
  rec.weighted_sum = rep.weighted_sum;
  return rec;
}

std::vector<RunRecord> solve_all(Method method, const std::vector<NetworkRealization>& set,
                                 const SolveOptions& opts) {
  std::vector<RunRecord> rows(set.size());
  parallel_for(set.size(), opts.threads, [&](std::size_t i) { rows[i] = solve_one(method, set[i], opts.model); });
  return rows;
}

void write_runs_csv(const std::vector<RunRecord>& rows, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path, "runs", "seed,index,K,N,M,method,R,rates,wall_us,ao_outer,ao_inner,u,v");
  for (const RunRecord& r : rows) {
    std::string rates;
    for (std::size_t k = 0; k < r.rates.size(); ++k) rates += fmt::format("{}{:.17g}", k ? ";" : "", r.rates[k]);
    std::string v;
    for (std::size_t k = 0; k < r.strategy.v.size(); ++k) {
      if (k) v += '|';
      v += join_complex({r.strategy.v[k].data(), r.strategy.v[k].size()});
    }
    out << fmt::format("{},{},{},{},{},{},{:.17g},{},{:.3f},{},{},{},{}\n", r.seed, r.index, r.clusters, r.devices,
                       r.antennas, method_name(r.method), r.weighted_sum, rates, r.wall_us, r.ao_outer, r.ao_inner,
                       join_complex(r.strategy.u), v);
  }
  finish(out, path);
}

std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  const std::string magic = fmt::format("# aircomp-csv {} kind=runs", kCsvVersion);
  if (!std::getline(in, line) || line != magic) throw FormatError(path.string() + ": expected '" + magic + "'");
  std::getline(in, line);
  std::vector<RunRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 13) throw FormatError(path.string() + ": expected 13 columns, got " + std::to_string(f.size()));
    RunRecord r;
    r.seed = parse_uint(f[0]);
    r.index = parse_uint(f[1]);
    r.clusters = parse_uint(f[2]);
    r.devices = parse_uint(f[3]);
    r.antennas = parse_uint(f[4]);
    r.method = parse_method(f[5]);
    r.weighted_sum = parse_double(f[6]);
    for (const auto& x : split(f[7], ';')) r.rates.push_back(parse_double(x));
    r.wall_us = parse_double(f[8]);
    r.ao_outer = static_cast<int>(parse_uint(f[9]));
    r.ao_inner = static_cast<int>(parse_uint(f[10]));
    r.strategy.u = parse_complex(f[11]);
    for (const auto& vk : split(f[12], '|')) r.strategy.v.emplace_back(parse_complex(vk));
    rows.push_back(std::move(r));
  }
  return rows;
}

SweepParam parse_sweep_param(std::string_view name) {
  if (name == "clusters") return SweepParam::clusters;
  if (name == "devices") return SweepParam::devices;
  if (name == "antennas") return SweepParam::antennas;
  throw ValidationError("unknown sweep parameter '" + std::string(name) + "' (expected clusters, devices or antennas)");
}

std::string_view sweep_param_name(SweepParam p) {
  switch (p) {
    case SweepParam::clusters: return "clusters";
    case SweepParam::devices: return "devices";
    case SweepParam::antennas: return "antennas";
  }
  return "?";
}

ScenarioConfig with_size(const ScenarioConfig& cfg, SweepParam param, std::size_t value) {
  if (value == 0) throw ValidationError("sweep values must be >= 1");
  auto uniform = [](const auto& v, const char* name) {
    if (v.empty() || std::any_of(v.begin(), v.end(), [&](const auto& x) { return x != v.front(); })) {
      throw ValidationError(std::string("sweep needs a uniform per-cluster '") + name + "'");
    }
    return v.front();
  };
  const std::size_t k = param == SweepParam::clusters ? value : cfg.num_clusters;
  const std::size_t n = param == SweepParam::devices ? value : uniform(cfg.devices_per_cluster, "devices_per_cluster");
  const std::size_t m = param == SweepParam::antennas ? value : uniform(cfg.antennas, "antennas");
  ScenarioConfig out = cfg;
  out.num_clusters = k;
  out.devices_per_cluster.assign(k, n);
  out.antennas.assign(k, m);
  out.noise_power.assign(k, uniform(cfg.noise_power, "noise_power"));
  out.max_power.assign(k, uniform(cfg.max_power, "max_power"));
  out.weights.assign(k, uniform(cfg.weights, "weights"));
  out.quant_bits.assign(k, uniform(cfg.quant_bits, "quant_bits"));
  out.validate();
  return out;
}

SweepRow aggregate(const std::vector<RunRecord>& rows, std::size_t param_value, Method method) {
  std::vector<double> r;
  for (const RunRecord& row : rows) r.push_back(row.weighted_sum);
  const auto [mean, sd] = mean_std(r);
  return {param_value, method, mean, sd, rows.size()};
}

std::vector<SweepRow> sweep(const ScenarioConfig& base, SweepParam param, const std::vector<std::size_t>& values,
                            const std::vector<Method>& methods, std::size_t count, std::uint64_t seed,
                            const SolveOptions& opts) {
  std::vector<SweepRow> out;
  for (std::size_t value : values) {
    const ScenarioConfig cfg = with_size(base, param, value);
    std::vector<NetworkRealization> set;
    for (std::size_t i = 0; i < count; ++i) set.push_back(generate_realization(cfg, seed, i));
    for (Method m : methods) {
      out.push_back(aggregate(solve_all(m, set, opts), value, m));
      spdlog::info("sweep {}={} {}: mean R {:.4f}", sweep_param_name(param), value, method_name(m),
                   out.back().mean_rate);
    }
  }
  return out;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, SweepParam param, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path, fmt::format("sweep param={}", sweep_param_name(param)),
                               "param_value,method,mean_R,std_R,n");
  for (const SweepRow& r : rows) {
    out << fmt::format("{},{},{:.17g},{:.17g},{}\n", r.param_value, method_name(r.method), r.mean_rate, r.std_rate, r.n);
  }
  finish(out, path);
}

BenchRow summarize_bench(const std::vector<RunRecord>& rows, Method method) {
  std::vector<double> us, rate, outer;
  for (const RunRecord& r : rows) {
    us.push_back(r.wall_us);
    rate.push_back(r.weighted_sum);
    outer.push_back(r.ao_outer);
  }
  BenchRow b;
  b.method = method;
  std::tie(b.mean_us, b.std_us) = mean_std(us);
  b.mean_rate = mean_std(rate).first;
  b.mean_ao_outer = mean_std(outer).first;
  b.n = rows.size();
  return b;
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path, "bench", "method,mean_us,std_us,mean_R,mean_ao_outer,n");
  for (const BenchRow& b : rows) {
    out << fmt::format("{},{:.6g},{:.6g},{:.17g},{:.6g},{}\n", method_name(b.method), b.mean_us, b.std_us, b.mean_rate,
                       b.mean_ao_outer, b.n);
  }
  finish(out, path);
}

PowerMap power_map(const TransceiverStrategy& s, const NetworkRealization& r) {
  s.check_dimensions(r);
  PowerMap m;
  m.clusters = r.num_clusters();
  m.power.assign(m.clusters * m.clusters, 0.0);
  m.cluster_power.assign(m.clusters, 0.0);
  for (std::size_t d = 0; d < r.num_devices(); ++d) {
    const std::size_t j = r.cluster_of[d];
    m.cluster_power[j] += std::norm(s.u[d]);
    for (std::size_t k = 0; k < m.clusters; ++k) {
      m.power[k * m.clusters + j] += std::norm(linalg::inner(s.v[k], r.channel(d, k)) * s.u[d]);
    }
  }
  return m;
}

void write_heatmap_csv(const std::vector<std::pair<Method, PowerMap>>& maps, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path, "heatmap", "method,kind,row,col,value");
  for (const auto& [method, m] : maps) {
    for (std::size_t k = 0; k < m.clusters; ++k) {
      for (std::size_t j = 0; j < m.clusters; ++j) {
        out << fmt::format("{},matrix,{},{},{:.17g}\n", method_name(method), k, j, m.at(k, j));
      }
    }
    for (std::size_t j = 0; j < m.clusters; ++j) {
      out << fmt::format("{},cluster_power,{},0,{:.17g}\n", method_name(method), j, m.cluster_power[j]);
    }
  }
  finish(out, path);
}

}  // namespace aircomp::harness
