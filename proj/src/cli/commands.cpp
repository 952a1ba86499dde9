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

#include "pyrogrid/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "detail/byte_io.hpp"
#include "detail/json_fields.hpp"
#include "pyrogrid/error.hpp"
#include "pyrogrid/trainer/trainer.hpp"

namespace pyrogrid::cli {

using detail::json;
using numerics::Tensor;

namespace {

std::string read_text(const fs::path& p) {
  const std::vector<char> bytes = detail::read_file(p);
  return {bytes.begin(), bytes.end()};
}

void write_text(const fs::path& p, const std::string& text) { detail::write_file(p, {text.data(), text.size()}); }

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

environment::Dataset load_data(const fs::path& p) {
  if (!fs::exists(p)) throw IoError("data path " + p.string() + " does not exist");
  return environment::load_dataset(p);
}

}  // namespace

environment::GeneratorConfig gen_data(const GenDataOptions& opt, std::ostream& log) {
  environment::GeneratorConfig cfg;
  if (opt.config) cfg = environment::generator_config_from_json(read_text(*opt.config));
  if (opt.agents) cfg.agents = *opt.agents;
  if (opt.grid) cfg.height = cfg.width = *opt.grid;
  if (opt.seed) cfg.seed = *opt.seed;
  cfg.validate();
  const std::string resolved = environment::to_json(cfg);
  log << resolved;
  const environment::Dataset ds = environment::generate_dataset(cfg);
  make_dir(opt.out);
  environment::write_dataset(ds, opt.out);
  write_text(opt.out / "generator_config.json", resolved);
  log << "wrote " << ds.agents.size() << " agents to " << opt.out.string() << "\n";
  return cfg;
}

trainer::TrainConfig train_config(const TrainOptions& opt) {
  trainer::TrainConfig cfg;
  if (opt.config) cfg = trainer::train_config_from_json(read_text(*opt.config));
  if (opt.episodes) cfg.episodes = *opt.episodes;
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.reward) cfg.reward = exchange::parse_reward_kind(*opt.reward);
  if (opt.static_model && opt.logistic) throw ConfigError("--static and --logistic are exclusive");
  if (opt.no_exchange || opt.static_model || opt.logistic) cfg.use_exchange = false;
  if (opt.no_sysid || opt.static_model || opt.logistic) cfg.use_sys_id = false;
  if (opt.static_model) cfg.static_only = true;
  if (opt.logistic) cfg.logistic_only = true;
  cfg.validate();
  return cfg;
}

void train(const TrainOptions& opt, std::ostream& log) {
  const trainer::TrainConfig cfg = train_config(opt);
  const environment::Dataset ds = load_data(opt.data);
  const trainer::TrainConfig resolved = trainer::resolve(cfg, ds);
  log << trainer::to_json(resolved);
  const trainer::RunArtifacts art =
      trainer::train(resolved, ds, opt.out, [&](const std::string& line) { log << line << "\n" << std::flush; });
  log << "wrote " << art.checkpoints.size() << " checkpoints to " << opt.out.string() << "\n";
  if (!art.evaluation.table.rows().empty()) art.evaluation.table.write_text(log);
}

metrics::MetricTable evaluate(const EvaluateOptions& opt, std::ostream& log) {
  const trainer::Split split = trainer::parse_split(opt.split);
  const environment::Dataset ds = load_data(opt.data);
  trainer::LoadedRun run = trainer::load_run(opt.checkpoint, ds);
  const json echo = {{"checkpoint", opt.checkpoint.string()},
                     {"data", opt.data.string()},
                     {"split", opt.split},
                     {"train", json::parse(trainer::to_json(run.config))}};
  log << echo.dump(2) << "\n";
  trainer::Evaluation ev = trainer::evaluate(run.models, ds, split, trainer::method_name(run.config));
  ev.table.add_method_means();
  make_dir(opt.out);
  std::ostringstream csv, text;
  ev.table.write_csv(csv);
  ev.table.write_text(text);
  write_text(opt.out / "evaluation.csv", csv.str());
  write_text(opt.out / "evaluation.txt", text.str());
  json out = echo;
  out["obs_mse"] = std::isnan(ev.obs_mse) ? json(nullptr) : json(ev.obs_mse);
  write_text(opt.out / "evaluate.json", out.dump(2) + "\n");
  log << text.str();
  return ev.table;
}

std::vector<fs::path> predict(const PredictOptions& opt, std::ostream& log) {
  const environment::Dataset ds = load_data(opt.data);
  trainer::LoadedRun run = trainer::load_run(opt.checkpoint, ds);
  const std::size_t L = run.config.horizons;
  const std::size_t weeks = ds.agents.front().weeks;
  if (weeks <= L || opt.week >= weeks - L) {
    throw DataError(Errc::split_out_of_range, "--week " + std::to_string(opt.week) + " must be below " +
                                                  std::to_string(weeks > L ? weeks - L : 0));
  }
  const json echo = {{"checkpoint", opt.checkpoint.string()},
                     {"data", opt.data.string()},
                     {"week", opt.week},
                     {"train", json::parse(trainer::to_json(run.config))}};
  log << echo.dump(2) << "\n";
  make_dir(opt.out);
  write_text(opt.out / "predict.json", echo.dump(2) + "\n");

  std::vector<fs::path> files;
  for (std::size_t i = 0; i < run.models.size(); ++i) {
    const environment::GridSeries& gs = ds.agents[i];
    const trainer::Rollout r = trainer::rollout(run.models[i], gs, opt.week, opt.week + 1);
    const std::string stem = "agent" + std::to_string(i);
    const std::size_t hw = gs.map_size();
    Tensor recon = Tensor::filled({gs.height, gs.width}, 0.5);
    if (!r.reconstructions.empty()) {
      const auto& x = r.reconstructions.front().data();  // channel 0 is fire confidence
      std::copy(x.begin(), x.begin() + std::ptrdiff_t(hw), recon.data().begin());
    }
    files.push_back(opt.out / (stem + "_recon.pgm"));
    write_pgm(files.back(), recon);
    const Tensor& p = r.predictions.front();
    for (std::size_t l = 0; l < L; ++l) {
      Tensor plane({gs.height, gs.width});
      std::copy(p.data().begin() + std::ptrdiff_t(l * hw), p.data().begin() + std::ptrdiff_t((l + 1) * hw),
                plane.data().begin());
      files.push_back(opt.out / (stem + "_h" + std::to_string(l + 1) + ".pgm"));
      write_pgm(files.back(), plane);
    }
  }
  log << "wrote " << files.size() << " images to " << opt.out.string() << "\n";
  return files;
}

std::vector<ReportRow> collect_report(const fs::path& run) {
  if (!fs::is_directory(run)) throw IoError(run.string() + " is not a directory");
  std::vector<fs::path> found;
  for (const auto& e : fs::recursive_directory_iterator(run))
    if (e.is_regular_file() && e.path().filename() == "evaluation.csv") found.push_back(e.path());
  std::sort(found.begin(), found.end());
  if (found.empty()) throw DataError(Errc::empty_run, "no evaluation.csv under " + run.string());

  std::vector<ReportRow> rows;
  std::map<std::string, std::size_t> index;
  for (const fs::path& p : found) {
    std::ifstream in(p);
    metrics::MetricTable t = metrics::MetricTable::read_csv(in);
    bool has_means = false;
    for (const auto& r : t.rows()) has_means |= r.agent == "mean";
    if (!has_means) t.add_method_means();
    for (const auto& r : t.rows()) {
      if (r.agent != "mean") continue;
      auto [it, fresh] = index.emplace(r.method, rows.size());
      if (fresh) rows.push_back({r.method});
      ReportRow& row = rows[it->second];
      ++row.runs;
      row.bce += r.bce;
      row.auroc += r.auroc;
      row.iou += r.iou;
    }
  }
  for (ReportRow& r : rows) {
    const double n = double(r.runs);
    r.bce /= n;
    r.auroc /= n;
    r.iou /= n;
  }
  return rows;
}

void write_report(const std::vector<ReportRow>& rows, std::ostream& out) {
  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.method.size());
  const auto pad = [&](const std::string& s) { return s + std::string(width - s.size() + 2, ' '); };
  out << pad("method") << "      bce     auroc       iou  runs\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%9.5f %9.5f %9.5f  %4zu", r.bce, r.auroc, r.iou, r.runs);
    out << pad(r.method) << buf << "\n";
  }
}

void write_pgm(const fs::path& path, const Tensor& map) {
  if (map.rank() != 2) throw ShapeError("write_pgm expects an [H,W] map, got " + numerics::shape_string(map.shape()));
  std::string bytes = "P5\n" + std::to_string(map.dim(1)) + " " + std::to_string(map.dim(0)) + "\n255\n";
  for (double p : map.data()) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::range_violation, "pixel probability outside [0,1]");
    bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * p))));
  }
  write_text(path, bytes);
}

Tensor read_pgm(const fs::path& path) {
  const std::string bytes = read_text(path);
  std::istringstream in(bytes);
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || maxval != 255 || !in) throw DataError(Errc::bad_magic, path.string() + " is not an 8-bit P5 graymap");
  const std::size_t start = static_cast<std::size_t>(in.tellg()) + 1;
  if (bytes.size() != start + w * h) throw DataError(Errc::truncated_file, path.string() + " has the wrong size");
  Tensor out({h, w});
  for (std::size_t k = 0; k < w * h; ++k) out[k] = double(static_cast<unsigned char>(bytes[start + k])) / 255.0;
  return out;
}

int exit_code(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  if (!err) return 4;
  switch (err->code()) {
    case Errc::config:
      return 2;
    case Errc::numeric:
    case Errc::non_scalar_loss:
      return 4;
    default:
      return 3;
  }
}

}  // namespace pyrogrid::cli
