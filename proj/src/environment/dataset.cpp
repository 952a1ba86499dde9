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

#include "pyrogrid/environment/dataset.hpp"

#include <cstdio>

#include "detail/byte_io.hpp"
#include "detail/json_fields.hpp"
#include "pyrogrid/environment/preprocess.hpp"
#include "pyrogrid/error.hpp"

namespace pyrogrid::environment {
namespace {

using detail::FieldReader;
using detail::json;

json params_json(const GeneratorParams& p) {
  return {{"k_dry", p.k_dry},
          {"k_neighbor", p.k_neighbor},
          {"k_coupling", p.k_coupling},
          {"k_bias", p.k_bias},
          {"persistence", p.persistence},
          {"burn_rate", p.burn_rate},
          {"regrowth", p.regrowth},
          {"dry_relax", p.dry_relax},
          {"diffusion", p.diffusion},
          {"dry_noise", p.dry_noise},
          {"season_amplitude", p.season_amplitude},
          {"season_days", p.season_days},
          {"spatial_bias", p.spatial_bias},
          {"rain_chance", p.rain_chance},
          {"rain_mean_mm", p.rain_mean_mm},
          {"rain_drying", p.rain_drying},
          {"decorrelated", p.decorrelated},
          {"decorrelated_rate", p.decorrelated_rate}};
}

void read_params(const json& j, GeneratorParams& p) {
  FieldReader r(j, "generator.params");
  r.get("k_dry", p.k_dry);
  r.get("k_neighbor", p.k_neighbor);
  r.get("k_coupling", p.k_coupling);
  r.get("k_bias", p.k_bias);
  r.get("persistence", p.persistence);
  r.get("burn_rate", p.burn_rate);
  r.get("regrowth", p.regrowth);
  r.get("dry_relax", p.dry_relax);
  r.get("diffusion", p.diffusion);
  r.get("dry_noise", p.dry_noise);
  r.get("season_amplitude", p.season_amplitude);
  r.get("season_days", p.season_days);
  r.get("spatial_bias", p.spatial_bias);
  r.get("rain_chance", p.rain_chance);
  r.get("rain_mean_mm", p.rain_mean_mm);
  r.get("rain_drying", p.rain_drying);
  r.get("decorrelated", p.decorrelated);
  r.get("decorrelated_rate", p.decorrelated_rate);
  r.finish();
}

std::string agent_file(std::size_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "agent_%02zu.wfgm", id);
  return buf;
}

}  // namespace

void GeneratorConfig::validate() const {
  auto fail = [](const std::string& f, const std::string& why) { throw ConfigError("generator." + f + ": " + why); };
  if (agents == 0) fail("agents", "must be at least 1");
  if (height == 0) fail("height", "must be at least 1");
  if (width == 0) fail("width", "must be at least 1");
  if (upsample == 0) fail("upsample", "must be at least 1");
  if (height * upsample < 2 || width * upsample < 2) fail("height", "raw grid must be at least 2x2");
  if (train_weeks == 0) fail("train_weeks", "must be at least 1");
  if (!(params.persistence >= 0.0 && params.persistence <= 1.0)) fail("params.persistence", "must lie in [0,1]");
  if (!(params.decorrelated_rate >= 0.0 && params.decorrelated_rate <= 1.0))
    fail("params.decorrelated_rate", "must lie in [0,1]");
  if (!(params.season_days > 0.0)) fail("params.season_days", "must be positive");
  if (!(params.rain_mean_mm >= 0.0)) fail("params.rain_mean_mm", "must be non-negative");
}

GeneratorConfig generator_config_from_json(std::string_view text) {
  const json j = detail::parse_json(text, "generator config");
  GeneratorConfig cfg;
  FieldReader r(j, "generator");
  r.get("agents", cfg.agents);
  r.get("height", cfg.height);
  r.get("width", cfg.width);
  r.get("upsample", cfg.upsample);
  r.get("train_weeks", cfg.train_weeks);
  r.get("val_weeks", cfg.val_weeks);
  r.get("burn_in_weeks", cfg.burn_in_weeks);
  r.get("seed", cfg.seed);
  if (const json* p = r.child("params")) read_params(*p, cfg.params);
  r.finish();
  cfg.validate();
  return cfg;
}

std::string to_json(const GeneratorConfig& cfg) {
  const json j = {{"agents", cfg.agents},
                  {"height", cfg.height},
                  {"width", cfg.width},
                  {"upsample", cfg.upsample},
                  {"train_weeks", cfg.train_weeks},
                  {"val_weeks", cfg.val_weeks},
                  {"burn_in_weeks", cfg.burn_in_weeks},
                  {"seed", cfg.seed},
                  {"params", params_json(cfg.params)}};
  return j.dump(2);
}

std::string Manifest::to_json() const {
  json list = json::array();
  for (const ManifestEntry& e : agents) list.push_back({{"id", e.id}, {"path", e.path}});
  const json j = {{"agents", list},
                  {"train_weeks", train_weeks},
                  {"val_weeks", val_weeks},
                  {"seed", seed},
                  {"generator", detail::parse_json(generator_json, "manifest generator")}};
  return j.dump(2) + "\n";
}

Manifest Manifest::from_json(std::string_view text) {
  const json j = detail::parse_json(text, "manifest");
  Manifest m;
  FieldReader r(j, "manifest");
  const json* list = r.child("agents");
  if (!list || !list->is_array() || list->empty()) r.fail("agents", "expected a non-empty array");
  for (const json& a : *list) {
    ManifestEntry e;
    FieldReader ar(a, "manifest.agents[]");
    if (!ar.get("id", e.id)) ar.fail("id", "missing");
    if (!ar.get("path", e.path)) ar.fail("path", "missing");
    ar.finish();
    m.agents.push_back(std::move(e));
  }
  if (!r.get("train_weeks", m.train_weeks)) r.fail("train_weeks", "missing");
  if (!r.get("val_weeks", m.val_weeks)) r.fail("val_weeks", "missing");
  r.get("seed", m.seed);
  if (const json* g = r.child("generator")) m.generator_json = g->dump();
  r.finish();
  return m;
}

Dataset generate_dataset(const GeneratorConfig& cfg) {
  cfg.validate();
  Rng rng = Rng::stream(cfg.seed, {0x57a71cULL});
  std::vector<WorldState> world =
      init_world(cfg.agents, cfg.height * cfg.upsample, cfg.width * cfg.upsample, cfg.params, rng);
  for (std::size_t d = 0; d < cfg.burn_in_weeks * 7; ++d) synth_step(world, cfg.params, rng);

  const std::size_t weeks = cfg.train_weeks + cfg.val_weeks;
  std::vector<WeeklyAggregator> agg(cfg.agents);
  for (std::size_t d = 0; d < weeks * 7; ++d) {
    const std::vector<Tensor> frames = synth_step(world, cfg.params, rng);
    for (std::size_t a = 0; a < cfg.agents; ++a) agg[a].push(frames[a]);
  }

  Dataset ds;
  ds.manifest.train_weeks = cfg.train_weeks;
  ds.manifest.val_weeks = cfg.val_weeks;
  ds.manifest.seed = cfg.seed;
  ds.manifest.generator_json = to_json(cfg);
  PreprocessOptions opt;
  opt.height = cfg.height;
  opt.width = cfg.width;
  opt.train_weeks = cfg.train_weeks;
  for (std::size_t a = 0; a < cfg.agents; ++a) {
    const std::vector<Tensor> weekly = agg[a].take_weeks();
    ds.agents.push_back(preprocess_weekly(weekly, opt).series);
    ds.manifest.agents.push_back({a, agent_file(a)});
  }
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  if (ds.agents.size() != ds.manifest.agents.size()) throw IoError("manifest and agent series disagree in count");
  for (std::size_t a = 0; a < ds.agents.size(); ++a)
    save_grid_series(ds.agents[a], dir / ds.manifest.agents[a].path);
  const std::string text = ds.manifest.to_json();
  detail::write_file(dir / "manifest.json", text);
}

Dataset load_dataset(const std::filesystem::path& path) {
  const std::filesystem::path file = std::filesystem::is_directory(path) ? path / "manifest.json" : path;
  const std::vector<char> bytes = detail::read_file(file);
  Dataset ds;
  ds.manifest = Manifest::from_json(std::string_view(bytes.data(), bytes.size()));
  const std::filesystem::path base = file.parent_path();
  for (const ManifestEntry& e : ds.manifest.agents) {
    const std::filesystem::path p(e.path);
    ds.agents.push_back(load_grid_series(p.is_absolute() ? p : base / p));
  }
  const GridSeries& first = ds.agents.front();
  for (const GridSeries& g : ds.agents) {
    if (g.channels != first.channels || g.height != first.height || g.width != first.width || g.weeks != first.weeks)
      throw DataError(Errc::split_mismatch, "agent grid series differ in dimensions");
  }
  if (ds.manifest.train_weeks == 0) throw DataError(Errc::empty_train, "manifest train_weeks is zero");
  if (ds.manifest.train_weeks + ds.manifest.val_weeks > first.weeks) {
    throw DataError(Errc::split_out_of_range,
                    "manifest asks for " + std::to_string(ds.manifest.train_weeks + ds.manifest.val_weeks) +
                        " weeks, series hold " + std::to_string(first.weeks));
  }
  return ds;
}

}  // namespace pyrogrid::environment
