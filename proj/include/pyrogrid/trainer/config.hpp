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

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "pyrogrid/exchange/exchange.hpp"
#include "pyrogrid/nets/model.hpp"

namespace pyrogrid::trainer {

// eps_n = base * (1 + n)^(-exponent)
struct Rate {
  double base = 1e-3;
  double exponent = 0.1;
  double at(std::uint64_t n) const;
};

struct Rates {
  double pred = 0.0, sys = 0.0, critic = 0.0, actor = 0.0;
};

// Four diminishing step sizes, fastest first: predictor, system
// identification, critic, actor.
struct StepSchedule {
  Rate pred{1e-3, 0.1};
  Rate sys{5e-4, 0.2};
  Rate critic{1e-4, 0.3};
  Rate actor{5e-5, 0.4};

  // Requires positive bases ordered pred >= sys >= critic >= actor and
  // strictly increasing exponents, which keeps the ordering for every n.
  void validate() const;
  Rates at(std::uint64_t n) const;
};

struct TrainConfig {
  // 0 means "take it from the dataset"; anything else must match.
  std::size_t agents = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t d_enc = 32;
  std::size_t d_h = 32;
  std::size_t horizons = 4;
  std::array<std::size_t, 4> widths{8, 16, 32, 64};
  std::size_t policy_hidden = 64;

  std::size_t trajectory_capacity = 512;
  std::size_t transition_capacity = 2048;
  std::size_t batch = 4;             // M windows per update
  std::size_t window = 4;            // T_w
  std::size_t transition_batch = 32;
  std::size_t episodes = 50;
  bool persist_buffers = true;

  double self_weight = 0.8;
  double gamma = 0.95;
  double tau = 0.005;
  double noise_sigma = 0.5;      // exploration at tick 0
  double noise_sigma_min = 0.05;  // reached at the last tick
  StepSchedule schedule;
  exchange::RewardKind reward = exchange::RewardKind::mean_iou;

  std::uint64_t seed = 0;

  bool use_sys_id = true;
  bool use_exchange = true;
  bool static_only = false;
  bool logistic_only = false;

  // Online train-split metrics per tick in metrics.csv.
  bool log_online_metrics = true;

  void validate() const;
  // Sizes for the network constructors once agents/height/width are known.
  nets::NetConfig net_config(std::size_t channels) const;
  bool recurrent() const { return !static_only && !logistic_only; }
};

// Parses JSON that mirrors TrainConfig field for field; unknown keys and bad
// values raise ConfigError naming the field.
TrainConfig train_config_from_json(std::string_view text);
std::string to_json(const TrainConfig& cfg);

// "logistic", "static", "gru", "gru_exchange", "proposed_no_exchange",
// "proposed" (mean IOU reward) or "proposed_adversarial".
std::string method_name(const TrainConfig& cfg);

}  // namespace pyrogrid::trainer
