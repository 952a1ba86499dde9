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

#include <span>
#include <string>
#include <vector>

#include "pyrogrid/buffers/replay.hpp"
#include "pyrogrid/nets/model.hpp"
#include "pyrogrid/trainer/config.hpp"

namespace pyrogrid::trainer {

using numerics::Parameter;
using numerics::Rng;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

enum class ModelKind { recurrent, static_model, logistic };

ModelKind model_kind(const TrainConfig& cfg);

// One shared per-pixel logistic model: a 1x1 convolution from C channels to
// L horizon logits.
struct LogisticParams {
  Parameter weight;  // [L, C, 1, 1], zero at init
  Parameter bias;    // [L], zero at init
};

// Mean over every prediction of the pixel-mean binary cross-entropy against
// its binary target. Each prediction is [L,H,W].
Var pred_loss(std::span<const Var> predictions, std::span<const Tensor> targets);
double pred_loss(std::span<const Tensor> predictions, std::span<const Tensor> targets);
// Mean squared difference between reconstructions and observations.
Var sys_loss(std::span<const Var> reconstructions, std::span<const Tensor> observations);
double sys_loss(std::span<const Tensor> reconstructions, std::span<const Tensor> observations);

struct WindowLosses {
  double sys = 0.0;  // NaN when not computed
  double pred = 0.0;
};

// Networks of one agent. The online state is h for the recurrent model, the
// static embedding for the static model and x itself for the logistic model.
class AgentModel {
 public:
  AgentModel(ModelKind kind, const nets::NetConfig& cfg, Rng& rng, const std::string& prefix);

  ModelKind kind() const { return kind_; }
  const nets::NetConfig& net() const { return net_; }

  Tensor initial_state() const;
  // Consumes x_t. When `x_hat` is given it receives the one-step
  // reconstruction (recurrent model only; left empty otherwise).
  Tensor step(const Tensor& state, const Tensor& x, Tensor* x_hat = nullptr);
  // [L,H,W] fire probabilities for weeks t+1 .. t+L from the state after x_t.
  Tensor predict(const Tensor& state);

  // Losses over M windows. targets[m][k] is the [L,H,W] stack of fire maps
  // for weeks first_week+k+1 .. first_week+k+L. The recurrent model replays
  // each window from its stored first state.
  WindowLosses losses(std::span<const buffers::TrajectoryWindow> windows,
                      const std::vector<std::vector<Tensor>>& targets, bool with_sys);
  // Same, then one Adam step: encoder/GRU/observation decoder at rates.sys,
  // fire heads at rates.pred. With `with_sys` false the recurrent model is
  // trained through pred_loss alone.
  WindowLosses train_step(std::span<const buffers::TrajectoryWindow> windows,
                          const std::vector<std::vector<Tensor>>& targets, const Rates& rates, bool with_sys);

  std::vector<Parameter*> sys_parameters();   // stepped at the sys rate
  std::vector<Parameter*> pred_parameters();  // stepped at the pred rate
  std::vector<Parameter*> parameters();

 private:
  struct Graph {
    Var sys, pred;
  };
  Graph build(Tape& tape, std::span<const buffers::TrajectoryWindow> windows,
              const std::vector<std::vector<Tensor>>& targets, bool with_sys);

  ModelKind kind_;
  nets::NetConfig net_;
  nets::SysParams sys_;
  nets::PredParams pred_;
  nets::StaticParams static_;
  LogisticParams logistic_;
};

}  // namespace pyrogrid::trainer
