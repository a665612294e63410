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

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "aircomp/scenario.hpp"
#include "aircomp/trainer.hpp"
#include "aircomp/udgl.hpp"

// Flat "key = value" configuration. Keys are the field names of
// ScenarioConfig, TrainConfig and UdglConfig. Per-cluster fields take either
// one value (broadcast) or a comma-separated list of num_clusters values.
// '#' starts a comment. Environment variables AIRCOMP_<KEY> (upper case)
// override file values.
namespace aircomp::config {

using KeyValues = std::map<std::string, std::string>;

KeyValues parse(std::string_view text);
KeyValues load(const std::filesystem::path& path);

// Overlays AIRCOMP_* variables for every known key.
void apply_env_overrides(KeyValues& kv);

const std::vector<std::string>& known_keys();

// Each builder reads only its own keys and throws ValidationError on an
// unparsable value. check_keys rejects keys no builder knows.
void check_keys(const KeyValues& kv);
ScenarioConfig scenario_from(const KeyValues& kv);
UdglConfig model_from(const KeyValues& kv);
TrainConfig train_from(const KeyValues& kv);

}  // namespace aircomp::config
