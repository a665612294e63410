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

#include "aircomp/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "aircomp/errors.hpp"

namespace aircomp::config {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("config: key '" + key + "' expects a number, got '" + s + "'");
  }
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("config: key '" + key + "' expects a non-negative integer, got '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& key, std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ValidationError("config: key '" + key + "' expects a boolean, got '" + s + "'");
}

template <typename T, typename Conv>
std::vector<T> per_cluster(const KeyValues& kv, const std::string& key, std::size_t k, std::vector<T> fallback,
                           Conv conv) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  const auto items = split_list(it->second);
  if (items.size() == 1) return std::vector<T>(k, static_cast<T>(conv(key, items[0])));
  if (items.size() != k) {
    throw ValidationError("config: key '" + key + "' has " + std::to_string(items.size()) +
                          " values for " + std::to_string(k) + " clusters");
  }
  std::vector<T> out;
  for (const auto& s : items) out.push_back(static_cast<T>(conv(key, s)));
  return out;
}

const std::vector<std::string> kScenarioKeys{
    "num_clusters",       "devices_per_cluster", "antennas",           "area_radius",
    "device_annulus_min", "device_annulus_max",  "pathloss_exponent",  "ref_attenuation_db",
    "reference_distance", "rician_factor",       "noise_power",        "max_power",
    "weights",            "quant_bits"};
const std::vector<std::string> kModelKeys{"blocks", "encoder_layers", "hidden", "decoder_widths",
                                          "detach_coefficients", "detach_closed_form"};
const std::vector<std::string> kTrainKeys{"epochs",        "batch_size",   "dataset_size",   "heldout_size",
                                          "lr0",           "decay",        "decay_interval", "stage1_fraction",
                                          "seed",          "optimizer",    "adam_beta1",     "adam_beta2",
                                          "adam_eps",      "max_grad_norm", "log_every",     "checkpoint_path"};

}  // namespace

KeyValues parse(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw FormatError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw FormatError("config line " + std::to_string(line_no) + ": empty key");
    kv[key] = value;
    if (nl == text.size()) break;
  }
  return kv;
}

KeyValues load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> all = kScenarioKeys;
    all.insert(all.end(), kModelKeys.begin(), kModelKeys.end());
    all.insert(all.end(), kTrainKeys.begin(), kTrainKeys.end());
    return all;
  }();
  return keys;
}

void apply_env_overrides(KeyValues& kv) {
  for (const std::string& key : known_keys()) {
    std::string var = "AIRCOMP_";
    for (char c : key) var.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (const char* v = std::getenv(var.c_str())) kv[key] = trim(v);
  }
}

void check_keys(const KeyValues& kv) {
  const auto& keys = known_keys();
  for (const auto& [key, value] : kv) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }
}

ScenarioConfig scenario_from(const KeyValues& kv) {
  auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  std::size_t k = 5;
  if (const auto* s = get("num_clusters")) k = to_uint("num_clusters", *s);
  if (k == 0) throw ValidationError("config: num_clusters must be >= 1");
  ScenarioConfig c = ScenarioConfig::uniform(k, 5, 8);
  auto as_uint = [](const std::string& key, const std::string& s) { return to_uint(key, s); };
  c.devices_per_cluster = per_cluster<std::size_t>(kv, "devices_per_cluster", k, c.devices_per_cluster, as_uint);
  c.antennas = per_cluster<std::size_t>(kv, "antennas", k, c.antennas, as_uint);
  c.noise_power = per_cluster<double>(kv, "noise_power", k, c.noise_power, to_double);
  c.max_power = per_cluster<double>(kv, "max_power", k, c.max_power, to_double);
  c.weights = per_cluster<double>(kv, "weights", k, c.weights, to_double);
  c.quant_bits = per_cluster<std::uint32_t>(kv, "quant_bits", k, c.quant_bits, as_uint);
  const std::pair<const char*, double*> scalars[] = {
      {"area_radius", &c.area_radius},
      {"device_annulus_min", &c.device_annulus_min},
      {"device_annulus_max", &c.device_annulus_max},
      {"pathloss_exponent", &c.pathloss_exponent},
      {"ref_attenuation_db", &c.ref_attenuation_db},
      {"reference_distance", &c.reference_distance},
      {"rician_factor", &c.rician_factor},
  };
  for (const auto& [key, dst] : scalars) {
    if (const auto* s = get(key)) *dst = to_double(key, *s);
  }
  c.validate();
  return c;
}

UdglConfig model_from(const KeyValues& kv) {
  UdglConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "blocks") {
      c.blocks = to_uint(key, value);
    } else if (key == "encoder_layers") {
      c.encoder_layers = to_uint(key, value);
    } else if (key == "hidden") {
      c.hidden = to_uint(key, value);
    } else if (key == "decoder_widths") {
      c.decoder_widths.clear();
      for (const auto& s : split_list(value)) c.decoder_widths.push_back(to_uint(key, s));
    } else if (key == "detach_coefficients") {
      c.detach_coefficients = to_bool(key, value);
    } else if (key == "detach_closed_form") {
      c.detach_closed_form = to_bool(key, value);
    }
  }
  // A changed hidden width without explicit decoder widths keeps the default
  // depth and rescales the input layer.
  if (kv.count("hidden") && !kv.count("decoder_widths")) c.decoder_widths.front() = 2 * c.hidden;
  c.validate();
  return c;
}

TrainConfig train_from(const KeyValues& kv) {
  TrainConfig c;
  c.scenario = scenario_from(kv);
  c.model = model_from(kv);
  for (const auto& [key, value] : kv) {
    if (key == "epochs") {
      c.epochs = to_uint(key, value);
    } else if (key == "batch_size") {
      c.batch_size = to_uint(key, value);
    } else if (key == "dataset_size") {
      c.dataset_size = to_uint(key, value);
    } else if (key == "heldout_size") {
      c.heldout_size = to_uint(key, value);
    } else if (key == "lr0") {
      c.lr0 = to_double(key, value);
    } else if (key == "decay") {
      c.decay = to_double(key, value);
    } else if (key == "decay_interval") {
      c.decay_interval = to_uint(key, value);
    } else if (key == "stage1_fraction") {
      c.stage1_fraction = to_double(key, value);
    } else if (key == "seed") {
      c.seed = to_uint(key, value);
    } else if (key == "optimizer") {
      if (value == "sgd") {
        c.optimizer = Optimizer::sgd;
      } else if (value == "adam") {
        c.optimizer = Optimizer::adam;
      } else {
        throw ValidationError("config: optimizer must be 'sgd' or 'adam', got '" + value + "'");
      }
    } else if (key == "adam_beta1") {
      c.adam_beta1 = to_double(key, value);
    } else if (key == "adam_beta2") {
      c.adam_beta2 = to_double(key, value);
    } else if (key == "adam_eps") {
      c.adam_eps = to_double(key, value);
    } else if (key == "max_grad_norm") {
      c.max_grad_norm = to_double(key, value);
    } else if (key == "log_every") {
      c.log_every = to_uint(key, value);
    } else if (key == "checkpoint_path") {
      c.checkpoint_path = value;
    }
  }
  c.validate();
  return c;
}

}  // namespace aircomp::config
