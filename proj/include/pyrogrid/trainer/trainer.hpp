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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pyrogrid/buffers/replay.hpp"
#include "pyrogrid/environment/dataset.hpp"
#include "pyrogrid/exchange/exchange.hpp"
#include "pyrogrid/metrics/metrics.hpp"
#include "pyrogrid/numerics/checkpoint.hpp"
#include "pyrogrid/trainer/agent_model.hpp"
#include "pyrogrid/trainer/config.hpp"

namespace pyrogrid::trainer {

enum class Split { train, val };
Split parse_split(std::string_view name);

// Fills agents/height/width from the dataset (or checks them) and validates.
TrainConfig resolve(TrainConfig cfg, const environment::Dataset& data);

// Agent models as laid out by a config; parameters prefixed "agent<id>.".
std::vector<AgentModel> make_models(const TrainConfig& resolved, const environment::Dataset& data);

struct AgentTick {
  std::size_t source = 0;
  bool updated = false;  // false when the source buffer was too short
  double sys_loss = 0.0;
  double pred_loss = 0.0;
  // Online metrics of the prediction made this tick, averaged over the
  // horizons whose targets fall inside the train split.
  bool scored = false;
  double bce = 0.0, auroc = 0.0, iou = 0.0;
};

struct TickReport {
  std::uint64_t tick = 0;
  std::size_t episode = 0;
  std::size_t week = 0;
  Rates rates;
  std::vector<AgentTick> agents;
  std::optional<double> reward;
  bool rl_updated = false;
  double critic_loss = 0.0;
  double objective = 0.0;  // J before the actor step
};

// Algorithm state for one run: agent models, online states, buffers and the
// exchange policy.
class Trainer {
 public:
  Trainer(const TrainConfig& cfg, const environment::Dataset& data);

  const TrainConfig& config() const { return cfg_; }
  std::size_t agents() const { return models_.size(); }
  std::uint64_t ticks() const { return tick_; }
  std::uint64_t total_ticks() const;
  std::size_t episode() const { return episode_; }
  std::size_t week() const { return week_; }
  bool episode_done() const { return week_ >= train_weeks_; }

  // Resets hidden states (and buffers unless they persist).
  void begin_episode();
  // One optimizer tick on the next train week of the current episode.
  TickReport tick();

  std::vector<AgentModel>& models() { return models_; }
  AgentModel& model(std::size_t i) { return models_[i]; }
  const buffers::TrajectoryBuffer& trajectory_buffer(std::size_t i) const { return agents_[i].buffer; }
  const buffers::TransitionBuffer& transition_buffer() const { return transitions_; }
  const Tensor& state(std::size_t i) const { return agents_[i].h; }

  // Agent parameters, then the exchange nets when exchange is enabled.
  std::vector<Parameter*> parameters();
  std::vector<numerics::NamedTensor> checkpoint();
  void restore(const std::vector<numerics::NamedTensor>& records);

 private:
  struct Agent {
    std::size_t id = 0;
    Tensor h;
    buffers::TrajectoryBuffer buffer{1};
    Rng rng{0};
    std::vector<Tensor> frames;  // train weeks
    std::vector<Tensor> fire;
  };

  Tensor target_stack(std::size_t agent, std::size_t week) const;
  Tensor joint_state() const;

  TrainConfig cfg_;
  std::size_t train_weeks_ = 0;
  std::vector<AgentModel> models_;
  std::vector<Agent> agents_;

  nets::ActorParams actor_;
  nets::CriticParams critic_;
  exchange::TargetNets targets_;
  buffers::TransitionBuffer transitions_{1, 0.0};
  Rng policy_rng_{0};
  struct Pending {
    Tensor joint_h, action;
    double reward;
  };
  std::optional<Pending> pending_;

  std::uint64_t tick_ = 0;
  std::size_t episode_ = 0;
  std::size_t week_ = 0;
  bool started_ = false;
};

// Online pass of one agent over weeks [0, end): predictions[t] and
// reconstructions[t] are made right after consuming week t, for t in
// [first, end). Reconstructions are empty without an observation decoder.
struct Rollout {
  std::vector<Tensor> predictions;
  std::vector<Tensor> reconstructions;
};
Rollout rollout(AgentModel& model, const environment::GridSeries& series, std::size_t first, std::size_t end);

struct Evaluation {
  metrics::MetricTable table;  // one row per (agent, horizon)
  // Mean squared error between each reconstruction and the next week's
  // observation; NaN for models without an observation decoder.
  double obs_mse = 0.0;
};

// Rolls every agent through the data online without touching parameters
// and scores the predictions made inside the split. Throws SplitMismatch
// when models and data disagree or the split is empty.
Evaluation evaluate(std::vector<AgentModel>& models, const environment::Dataset& data, Split split,
                    const std::string& method);

struct RunArtifacts {
  std::filesystem::path dir;
  std::vector<std::filesystem::path> checkpoints;  // init first, then one per episode
  std::vector<double> episode_pred_loss;           // mean over updated ticks
  std::vector<double> episode_sys_loss;
  Evaluation evaluation;  // validation split, final parameters
};

// Runs `episodes` passes over the train split. Writes config.json,
// checkpoint_<episode>.pgck, metrics.csv, losses.csv, exchange.csv (with
// exchange), evaluation.csv and evaluation.txt into `out`.
RunArtifacts train(const TrainConfig& cfg, const environment::Dataset& data, const std::filesystem::path& out,
                   const std::function<void(const std::string&)>& progress = {});

// Rebuilds models from a checkpoint and the config.json beside it.
struct LoadedRun {
  TrainConfig config;
  std::vector<AgentModel> models;
};
LoadedRun load_run(const std::filesystem::path& checkpoint, const environment::Dataset& data);

}  // namespace pyrogrid::trainer
