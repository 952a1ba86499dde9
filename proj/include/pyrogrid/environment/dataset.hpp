// Copyright 2026 The PyroGrid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pyrogrid/environment/grid_series.hpp"
#include "pyrogrid/environment/synthetic.hpp"

namespace pyrogrid::environment {

struct GeneratorConfig {
  std::size_t agents = 3;
  std::size_t height = 16;  // output grid
  std::size_t width = 16;
  std::size_t upsample = 2;  // raw simulation runs at upsample x the output grid
  std::size_t train_weeks = 260;
  std::size_t val_weeks = 104;
  std::size_t burn_in_weeks = 52;  // simulated, then discarded
  std::uint64_t seed = 0;
  GeneratorParams params;

  void validate() const;
};

// Parses a JSON object; unknown keys and bad values raise ConfigError naming
// the field (and the line for syntax errors). Missing keys keep defaults.
GeneratorConfig generator_config_from_json(std::string_view text);
std::string to_json(const GeneratorConfig& cfg);

struct ManifestEntry {
  std::size_t id = 0;
  std::string path;  // relative to the manifest's directory unless absolute
};

struct Manifest {
  std::vector<ManifestEntry> agents;
  std::size_t train_weeks = 0;
  std::size_t val_weeks = 0;
  std::uint64_t seed = 0;
  std::string generator_json = "{}";  // free-form object

  std::string to_json() const;
  static Manifest from_json(std::string_view text);
};

struct Dataset {
  Manifest manifest;
  std::vector<GridSeries> agents;

  std::size_t train_weeks() const { return manifest.train_weeks; }
  std::size_t val_weeks() const { return manifest.val_weeks; }
};

// Runs the synthetic world and preprocesses each agent's days into a weekly
// series normalized on its train weeks.
Dataset generate_dataset(const GeneratorConfig& cfg);

// Writes agent_XX.wfgm files plus manifest.json into `dir`.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);

// Accepts the manifest file or the directory holding manifest.json. Checks
// that every agent shares dimensions and covers train + validation weeks.
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace pyrogrid::environment
