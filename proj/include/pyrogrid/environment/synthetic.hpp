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
#include <vector>

#include "pyrogrid/numerics/random.hpp"
#include "pyrogrid/numerics/tensor.hpp"

namespace pyrogrid::environment {

using numerics::Rng;
using numerics::Tensor;

inline constexpr std::size_t kRawChannels = 11;

// Daily dynamics of the synthetic world. Ignition probability of an unburnt
// cell is fuel * sigmoid(k_dry*D + k_neighbor*n + k_coupling*e - k_bias),
// with n the burning 4-neighbours and e the burning cells across a coupled
// edge of an adjacent agent.
struct GeneratorParams {
  double k_dry = 8.0;
  double k_neighbor = 1.5;
  double k_coupling = 1.5;
  double k_bias = 12.0;
  double persistence = 0.6;  // daily chance a burning cell keeps burning, times fuel
  double burn_rate = 0.3;    // fuel consumed per burning day
  double regrowth = 0.004;   // daily fuel recovery toward 1
  double dry_relax = 0.05;   // daily pull of dryness toward its seasonal target
  double diffusion = 0.1;
  double dry_noise = 0.03;
  double season_amplitude = 0.3;
  double season_days = 365.25;
  double spatial_bias = 0.15;
  double rain_chance = 0.3;  // daily, modulated by season
  double rain_mean_mm = 8.0;
  double rain_drying = 0.01;  // dryness removed per mm
  // Fire drawn i.i.d. per cell and day, ignoring every hidden field.
  bool decorrelated = false;
  double decorrelated_rate = 0.01;
};

// One agent's hidden world. Only `fire` leaks into observations directly.
struct WorldState {
  Tensor dryness;  // [H,W] in [0,1]
  Tensor fuel;     // [H,W] in [0,1]
  Tensor fire;     // [H,W] binary
  Tensor bias;     // [H,W] fixed offset of the dryness target
  double synoptic = 0.0;  // slow weather anomaly driving pressure and wind
  std::uint64_t day = 0;
};

// Agents sit on a line; agent k's last column touches agent k+1's first.
std::vector<WorldState> init_world(std::size_t agents, std::size_t height, std::size_t width,
                                   const GeneratorParams& params, Rng& rng);

// Advances every agent by one day and returns one raw frame per agent:
// channel 0 is fire confidence, channels 1-10 climate proxies in physical
// units.
std::vector<Tensor> synth_step(std::vector<WorldState>& states, const GeneratorParams& params, Rng& rng);

}  // namespace pyrogrid::environment
