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
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pyrogrid/environment/dataset.hpp"
#include "pyrogrid/metrics/metrics.hpp"
#include "pyrogrid/trainer/config.hpp"

namespace pyrogrid::cli {

namespace fs = std::filesystem;

struct GenDataOptions {
  std::optional<fs::path> config;
  fs::path out;
  std::optional<std::size_t> agents;
  std::optional<std::size_t> grid;
  std::optional<std::uint64_t> seed;
};
// Writes the dataset plus generator_config.json into `out`.
environment::GeneratorConfig gen_data(const GenDataOptions& opt, std::ostream& log);

struct TrainOptions {
  std::optional<fs::path> config;
  fs::path data;
  fs::path out;
  std::optional<std::size_t> episodes;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> reward;
  bool no_exchange = false;
  bool no_sysid = false;
  bool static_model = false;  // implies no exchange and no sys-id
  bool logistic = false;      // likewise
};
trainer::TrainConfig train_config(const TrainOptions& opt);
void train(const TrainOptions& opt, std::ostream& log);

struct EvaluateOptions {
  fs::path checkpoint;
  fs::path data;
  std::string split = "val";
  fs::path out;
};
// Writes evaluation.csv, evaluation.txt and evaluate.json; returns the table
// with per-method mean rows appended.
metrics::MetricTable evaluate(const EvaluateOptions& opt, std::ostream& log);

struct PredictOptions {
  fs::path checkpoint;
  fs::path data;
  std::size_t week = 0;
  fs::path out;
};
// Per agent: agent<i>_recon.pgm (fire channel of the one-step
// reconstruction; flat 0.5 without an observation decoder) and
// agent<i>_h<l>.pgm for each horizon. Returns the files written.
std::vector<fs::path> predict(const PredictOptions& opt, std::ostream& log);

struct ReportRow {
  std::string method;
  std::size_t runs = 0;
  double bce = 0.0, auroc = 0.0, iou = 0.0;
};
// One row per method over every evaluation.csv under `run`, averaging runs.
std::vector<ReportRow> collect_report(const fs::path& run);
void write_report(const std::vector<ReportRow>& rows, std::ostream& out);

// P5 graymap, byte = round(255 * p) for p in [0,1]; map is [H,W].
void write_pgm(const fs::path& path, const numerics::Tensor& map);
numerics::Tensor read_pgm(const fs::path& path);

// 2 config, 3 data or I/O, 4 numeric failure.
int exit_code(const std::exception& e);

}  // namespace pyrogrid::cli
