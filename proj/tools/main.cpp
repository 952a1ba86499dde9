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

#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "pyrogrid/cli/commands.hpp"

namespace cli = pyrogrid::cli;

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent wildfire prediction with sample exchange"};
  app.require_subcommand(1);

  cli::GenDataOptions gen;
  auto* g = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  g->add_option("--config", gen.config, "Generator config (JSON)")->check(CLI::ExistingFile);
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--agents", gen.agents, "Number of agents");
  g->add_option("--grid", gen.grid, "Output grid side");
  g->add_option("--seed", gen.seed, "Generator seed");

  cli::TrainOptions tr;
  auto* t = app.add_subcommand("train", "Train agents on a dataset");
  t->add_option("--config", tr.config, "Train config (JSON)")->check(CLI::ExistingFile);
  t->add_option("--data", tr.data, "Dataset directory or manifest")->required();
  t->add_option("--out", tr.out, "Run directory")->required();
  t->add_option("--episodes", tr.episodes, "Training episodes");
  t->add_option("--seed", tr.seed, "Run seed");
  t->add_option("--reward", tr.reward, "Exchange reward")->check(CLI::IsMember({"iou", "adversarial"}));
  t->add_flag("--no-exchange", tr.no_exchange, "Train every agent on its own buffer");
  t->add_flag("--no-sysid", tr.no_sysid, "Drop the observation reconstruction loss");
  t->add_flag("--static", tr.static_model, "Static model without recurrence");
  t->add_flag("--logistic", tr.logistic, "Per-pixel logistic model");

  cli::EvaluateOptions ev;
  auto* e = app.add_subcommand("evaluate", "Score a checkpoint on a split");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  e->add_option("--data", ev.data, "Dataset directory or manifest")->required();
  e->add_option("--split", ev.split, "train or val")->check(CLI::IsMember({"train", "val"}));
  e->add_option("--out", ev.out, "Output directory")->required();

  cli::PredictOptions pr;
  auto* p = app.add_subcommand("predict", "Write prediction images for one week");
  p->add_option("--checkpoint", pr.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  p->add_option("--data", pr.data, "Dataset directory or manifest")->required();
  p->add_option("--week", pr.week, "Week index")->required();
  p->add_option("--out", pr.out, "Output directory")->required();

  std::filesystem::path run_dir;
  auto* r = app.add_subcommand("report", "Compare methods across runs");
  r->add_option("--run", run_dir, "Directory holding runs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*g) cli::gen_data(gen, std::cout);
    if (*t) cli::train(tr, std::cout);
    if (*e) cli::evaluate(ev, std::cout);
    if (*p) cli::predict(pr, std::cout);
    if (*r) cli::write_report(cli::collect_report(run_dir), std::cout);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return cli::exit_code(err);
  }
  return 0;
}
