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
#include <string_view>
#include <vector>

#include "pyrogrid/buffers/replay.hpp"
#include "pyrogrid/nets/model.hpp"

namespace pyrogrid::exchange {

using buffers::Transition;
using numerics::Parameter;
using numerics::Rng;
using numerics::Tensor;

enum class RewardKind { mean_iou, adversarial_max_loss };

struct RewardSpec {
  RewardKind kind = RewardKind::mean_iou;
  double gamma = 0.95;
};

// "iou" / "mean_iou" and "adversarial" / "adversarial_max_loss".
RewardKind parse_reward_kind(std::string_view name);
std::string_view reward_kind_name(RewardKind kind);

// source[i] ~ Categorical(column i of a), one draw per destination.
std::vector<std::size_t> sample_sources(const Tensor& a, Rng& rng);

// Mean IOU over every agent and horizon. predictions[n] and targets[n] are
// [L,H,W]; targets binary.
double mean_iou_reward(std::span<const Tensor> predictions, std::span<const Tensor> targets);
// Largest per-agent combined loss.
double adversarial_reward(std::span<const double> losses);

// Adds N(0, sigma^2) to the off-diagonal entries of N*N logits.
Tensor exploration_noise(const Tensor& logits, double sigma, Rng& rng);
// Linear decay from sigma0 at tick 0 to sigma_min at tick `ticks`, flat after.
double noise_sigma(std::uint64_t tick, std::uint64_t ticks, double sigma0, double sigma_min);

// Deterministic policy mu(h) and its action matrix.
Tensor act(nets::ActorParams& actor, const Tensor& joint_h, double self_weight);
Tensor act_noisy(nets::ActorParams& actor, const Tensor& joint_h, double self_weight, double sigma, Rng& rng);

// q(h, a) on an inference tape.
double evaluate_q(nets::CriticParams& critic, const Tensor& joint_h, const Tensor& action);

struct TargetNets {
  nets::ActorParams actor;
  nets::CriticParams critic;
};

// Target copies share names with the live nets, prefixed "target.".
TargetNets make_targets(const nets::ActorParams& actor, const nets::CriticParams& critic);

// One Adam step on the live critic toward r + gamma * q'(h', mu'(h')).
// Returns the batch loss before the step. Throws InsufficientData on an
// empty batch.
double critic_update(nets::CriticParams& critic, TargetNets& targets, std::span<const Transition> batch,
                     double gamma, double self_weight, double lr);

// One Adam ascent step on J = mean q(h, mu(h)); the critic is read as a
// constant. Returns J before the step.
double actor_update(nets::ActorParams& actor, nets::CriticParams& critic, std::span<const Transition> batch,
                    double self_weight, double lr);

// target <- (1 - tau) target + tau live, matched by position.
void polyak_update(std::span<Parameter* const> target, std::span<Parameter* const> live, double tau);
void polyak_update(TargetNets& targets, nets::ActorParams& actor, nets::CriticParams& critic, double tau);

}  // namespace pyrogrid::exchange
