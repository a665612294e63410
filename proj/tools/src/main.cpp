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

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "aircomp/config.hpp"
#include "aircomp/errors.hpp"
#include "aircomp/harness.hpp"
#include "aircomp/trainer.hpp"
#include "aircomp/udgl.hpp"

namespace fs = std::filesystem;
using namespace aircomp;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
  std::vector<std::string> methods;
  std::string model;
  std::size_t count = 100;
  std::size_t threads = 1;
};

config::KeyValues load_config(const std::string& path) {
  config::KeyValues kv = path.empty() ? config::KeyValues{} : config::load(path);
  config::apply_env_overrides(kv);
  config::check_keys(kv);
  return kv;
}

std::vector<harness::Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<harness::Method> out;
  for (const auto& n : names) out.push_back(harness::parse_method(n));
  if (out.empty()) throw ValidationError("at least one --method is required");
  return out;
}

std::optional<UdglModel> maybe_model(const Common& c, const std::vector<harness::Method>& methods) {
  if (!c.model.empty()) return load_model(c.model);
  for (harness::Method m : methods) {
    if (m == harness::Method::udgl) throw ValidationError("method udgl needs --model");
  }
  return std::nullopt;
}

harness::SolveOptions solve_options(const Common& c, const std::optional<UdglModel>& model) {
  return {model ? &*model : nullptr, c.threads};
}

std::vector<NetworkRealization> draw_set(const ScenarioConfig& cfg, std::size_t count, std::uint64_t seed) {
  std::vector<NetworkRealization> set;
  for (std::size_t i = 0; i < count; ++i) set.push_back(generate_realization(cfg, seed, i));
  return set;
}

void run_gen(const Common& c) {
  const ScenarioConfig cfg = config::scenario_from(load_config(c.config));
  const auto paths = harness::generate_scenarios(cfg, c.count, c.seed, c.out);
  spdlog::info("wrote {} scenarios to {}", paths.size(), c.out);
}

void run_solve(const Common& c, const std::string& scenarios) {
  const auto methods = parse_methods(c.methods);
  if (methods.size() != 1) throw ValidationError("solve takes exactly one --method");
  const auto model = maybe_model(c, methods);
  std::vector<NetworkRealization> set;
  for (const fs::path& p : harness::list_scenarios(scenarios)) set.push_back(load_realization(p));
  const auto rows = harness::solve_all(methods.front(), set, solve_options(c, model));
  harness::write_runs_csv(rows, c.out);
  spdlog::info("{}: {} rows, mean R {:.4f}", harness::method_name(methods.front()), rows.size(),
               harness::aggregate(rows, 0, methods.front()).mean_rate);
}

void run_train(const Common& c, bool seed_given) {
  config::KeyValues kv = load_config(c.config);
  if (seed_given) kv["seed"] = std::to_string(c.seed);
  TrainConfig cfg = config::train_from(kv);
  std::optional<UdglModel> init;
  if (!c.model.empty()) init = load_model(c.model);
  const fs::path dir = c.out;
  fs::create_directories(dir);
  const TrainResult res = train(cfg, init ? &*init : nullptr);
  save_model(res.model, dir / "model.bin");
  write_train_log_csv(res.log, dir / "train_log.csv");
  const auto held = make_heldout_set(cfg);
  const EvalSummary s = evaluate(res.model, held);
  spdlog::info("held-out mean R {:.4f} over {} scenarios", s.mean_rate, s.count);
  if (res.aborted) throw NonFiniteError("training aborted: " + res.abort_reason, -1);
}

void run_sweep(const Common& c, const std::string& param, const std::vector<std::size_t>& values) {
  const auto methods = parse_methods(c.methods);
  const auto model = maybe_model(c, methods);
  if (values.empty()) throw ValidationError("sweep needs --values");
  const ScenarioConfig base = config::scenario_from(load_config(c.config));
  const auto p = harness::parse_sweep_param(param);
  const auto rows = harness::sweep(base, p, values, methods, c.count, c.seed, solve_options(c, model));
  harness::write_sweep_csv(rows, p, c.out);
}

void run_bench(const Common& c) {
  const auto methods = parse_methods(c.methods);
  const auto model = maybe_model(c, methods);
  const auto set = draw_set(config::scenario_from(load_config(c.config)), c.count, c.seed);
  std::vector<harness::BenchRow> rows;
  for (harness::Method m : methods) {
    rows.push_back(harness::summarize_bench(harness::solve_all(m, set, solve_options(c, model)), m));
    spdlog::info("{}: mean {:.1f} us, mean R {:.4f}", harness::method_name(m), rows.back().mean_us,
                 rows.back().mean_rate);
  }
  harness::write_bench_csv(rows, c.out);
}

void run_heatmap(const Common& c, std::uint64_t index) {
  const auto methods = parse_methods(c.methods);
  const auto model = maybe_model(c, methods);
  const NetworkRealization r = generate_realization(config::scenario_from(load_config(c.config)), c.seed, index);
  std::vector<std::pair<harness::Method, harness::PowerMap>> maps;
  for (harness::Method m : methods) {
    maps.emplace_back(m, harness::power_map(harness::solve_one(m, r, model ? &*model : nullptr).strategy, r));
  }
  harness::write_heatmap_csv(maps, c.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-cluster over-the-air computation toolkit"};
  app.require_subcommand(1);
  Common c;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  auto add_config = [&](CLI::App* s) { s->add_option("--config", c.config, "Key/value config file")->check(CLI::ExistingFile); };
  auto add_seed = [&](CLI::App* s) { return s->add_option("--seed", c.seed, "Master seed"); };
  auto add_out = [&](CLI::App* s, const char* what) { s->add_option("--out", c.out, what)->required(); };
  auto add_methods = [&](CLI::App* s) {
    s->add_option("--method", c.methods, "ao, udgl, fpt or apt (comma-separated where several apply)")
        ->delimiter(',')
        ->required();
  };
  auto add_model = [&](CLI::App* s) { s->add_option("--model", c.model, "Trained UDGL model")->check(CLI::ExistingFile); };
  auto add_count = [&](CLI::App* s) { s->add_option("--count", c.count, "Number of scenarios"); };
  auto add_threads = [&](CLI::App* s) {
    s->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* gen = app.add_subcommand("gen", "Write serialized scenarios");
  add_config(gen);
  add_seed(gen);
  add_count(gen);
  add_out(gen, "Output directory");

  std::string scenarios;
  auto* solve = app.add_subcommand("solve", "Solve stored scenarios with one method");
  solve->add_option("--scenarios", scenarios, "Directory written by gen")->required()->check(CLI::ExistingDirectory);
  add_methods(solve);
  add_model(solve);
  add_threads(solve);
  add_out(solve, "Output CSV");

  auto* tr = app.add_subcommand("train", "Train (or fine-tune with --model) a UDGL model");
  add_config(tr);
  auto* train_seed = add_seed(tr);
  add_model(tr);
  add_out(tr, "Output directory for model.bin and train_log.csv");

  std::string param;
  std::vector<std::size_t> values;
  auto* sw = app.add_subcommand("sweep", "Mean R over a cluster, device or antenna count sweep");
  add_config(sw);
  add_seed(sw);
  add_count(sw);
  sw->add_option("--param", param, "clusters, devices or antennas")->required();
  sw->add_option("--values", values, "Comma-separated values")->delimiter(',')->required();
  add_methods(sw);
  add_model(sw);
  add_threads(sw);
  add_out(sw, "Output CSV");

  auto* bench = app.add_subcommand("bench", "Wall-clock per method over generated scenarios");
  add_config(bench);
  add_seed(bench);
  add_count(bench);
  add_methods(bench);
  add_model(bench);
  add_threads(bench);
  add_out(bench, "Output CSV");

  std::uint64_t index = 0;
  auto* heat = app.add_subcommand("demo-heatmap", "Signal/interference power matrix for one scenario");
  add_config(heat);
  add_seed(heat);
  heat->add_option("--index", index, "Scenario index under --seed");
  add_methods(heat);
  add_model(heat);
  add_out(heat, "Output CSV");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  if (c.threads == 0) c.threads = 1;

  try {
    if (*gen) run_gen(c);
    if (*solve) run_solve(c, scenarios);
    if (*tr) run_train(c, train_seed->count() > 0);
    if (*sw) run_sweep(c, param, values);
    if (*bench) run_bench(c);
    if (*heat) run_heatmap(c, index);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
