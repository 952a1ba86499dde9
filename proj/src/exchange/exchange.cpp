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

#include "pyrogrid/exchange/exchange.hpp"

#include <algorithm>
#include <cmath>

#include "pyrogrid/error.hpp"
#include "pyrogrid/metrics/metrics.hpp"
#include "pyrogrid/numerics/optim.hpp"

namespace pyrogrid::exchange {

using numerics::Tape;
using numerics::Var;

RewardKind parse_reward_kind(std::string_view name) {
  if (name == "iou" || name == "mean_iou") return RewardKind::mean_iou;
  if (name == "adversarial" || name == "adversarial_max_loss") return RewardKind::adversarial_max_loss;
  throw ConfigError("unknown reward kind '" + std::string(name) + "' (expected iou or adversarial)");
}

std::string_view reward_kind_name(RewardKind kind) {
  return kind == RewardKind::mean_iou ? "mean_iou" : "adversarial_max_loss";
}

std::vector<std::size_t> sample_sources(const Tensor& a, Rng& rng) {
  const std::size_t n = a.dim(0);
  std::vector<std::size_t> src(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      acc += a.at(i, j);
      if (u < acc) {
        pick = i;
        break;
      }
    }
    // Rounding can leave u above the last partial sum; fall back to the last
    // source with positive mass.
    if (acc <= u)
      while (pick > 0 && a.at(pick, j) <= 0.0) --pick;
    src[j] = pick;
  }
  return src;
}

double mean_iou_reward(std::span<const Tensor> predictions, std::span<const Tensor> targets) {
  if (predictions.size() != targets.size() || predictions.empty()) {
    throw Error(Errc::length_mismatch, "reward needs one prediction per target, got " +
                                           std::to_string(predictions.size()) + " and " +
                                           std::to_string(targets.size()));
  }
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t n = 0; n < predictions.size(); ++n) {
    const Tensor& p = predictions[n];
    const Tensor& t = targets[n];
    if (p.shape() != t.shape() || p.rank() != 3) {
      throw ShapeError("reward prediction " + numerics::shape_string(p.shape()) + " vs target " +
                       numerics::shape_string(t.shape()));
    }
    const std::size_t plane = p.dim(1) * p.dim(2);
    for (std::size_t l = 0; l < p.dim(0); ++l) {
      Tensor pl({p.dim(1), p.dim(2)}, {p.data().begin() + l * plane, p.data().begin() + (l + 1) * plane});
      Tensor tl({t.dim(1), t.dim(2)}, {t.data().begin() + l * plane, t.data().begin() + (l + 1) * plane});
      total += metrics::iou(tl, pl);
      ++count;
    }
  }
  return total / double(count);
}

double adversarial_reward(std::span<const double> losses) {
  if (losses.empty()) throw Error(Errc::empty_input, "adversarial reward of no agents");
  return *std::max_element(losses.begin(), losses.end());
}

Tensor exploration_noise(const Tensor& logits, double sigma, Rng& rng) {
  if (sigma < 0.0) throw ConfigError("exploration sigma must be non-negative");
  const std::size_t n = static_cast<std::size_t>(std::lround(std::sqrt(double(logits.size()))));
  if (n * n != logits.size()) throw ShapeError("logits " + numerics::shape_string(logits.shape()) + " are not N*N");
  Tensor out = logits;
  if (sigma == 0.0) return out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out[i * n + j] += sigma * rng.normal();
  return out;
}

double noise_sigma(std::uint64_t tick, std::uint64_t ticks, double sigma0, double sigma_min) {
  if (ticks == 0 || tick >= ticks) return sigma_min;
  const double f = double(tick) / double(ticks);
  return sigma0 + (sigma_min - sigma0) * f;
}

Tensor act(nets::ActorParams& actor, const Tensor& joint_h, double self_weight) {
  Tape tape(Tape::Mode::inference);
  return nets::actor_forward(tape.constant(joint_h), nets::bind(tape, actor), self_weight).value();
}

Tensor act_noisy(nets::ActorParams& actor, const Tensor& joint_h, double self_weight, double sigma, Rng& rng) {
  Tape tape(Tape::Mode::inference);
  const nets::ActorVars v = nets::bind(tape, actor);
  const Tensor logits = nets::actor_logits(tape.constant(joint_h), v).value();
  Var noisy = tape.constant(exploration_noise(logits, sigma, rng));
  return numerics::action_matrix(noisy, v.agents, self_weight).value();
}

double evaluate_q(nets::CriticParams& critic, const Tensor& joint_h, const Tensor& action) {
  Tape tape(Tape::Mode::inference);
  return nets::critic_forward(tape.constant(joint_h), tape.constant(action), nets::bind(tape, critic)).value().item();
}

namespace {

template <class P>
P renamed_copy(const P& live, const std::string& prefix) {
  P copy = live;
  for (Parameter* p : nets::parameters(copy)) {
    p->name = prefix + p->name;
    p->zero_grad();
    p->adam_m.fill(0.0);
    p->adam_v.fill(0.0);
    p->step_count = 0;
  }
  return copy;
}

void require_batch(std::span<const Transition> batch, const char* what) {
  if (batch.empty()) throw Error(Errc::insufficient_data, std::string(what) + " needs at least one transition");
}

}  // namespace

TargetNets make_targets(const nets::ActorParams& actor, const nets::CriticParams& critic) {
  return {renamed_copy(actor, "target."), renamed_copy(critic, "target.")};
}

double critic_update(nets::CriticParams& critic, TargetNets& targets, std::span<const Transition> batch,
                     double gamma, double self_weight, double lr) {
  require_batch(batch, "critic update");
  std::vector<double> y(batch.size());
  {
    Tape tape(Tape::Mode::inference);
    const nets::ActorVars av = nets::bind(tape, targets.actor);
    const nets::CriticVars cv = nets::bind(tape, targets.critic);
    for (std::size_t m = 0; m < batch.size(); ++m) {
      Var h2 = tape.constant(batch[m].next_joint_h);
      Var q2 = nets::critic_forward(h2, nets::actor_forward(h2, av, self_weight), cv);
      y[m] = batch[m].reward + gamma * q2.value().item();
    }
  }
  std::vector<Parameter*> params = nets::parameters(critic);
  numerics::zero_grad(params);
  Tape tape;
  const nets::CriticVars cv = nets::bind(tape, critic);
  std::vector<Var> errs;
  errs.reserve(batch.size());
  for (std::size_t m = 0; m < batch.size(); ++m) {
    Var q = nets::critic_forward(tape.constant(batch[m].joint_h), tape.constant(batch[m].action), cv);
    Var e = numerics::add_scalar(q, -y[m]);
    errs.push_back(e * e);
  }
  Var loss = numerics::mean(numerics::concat(errs));
  const double value = loss.value().item();
  if (!std::isfinite(value)) throw NumericError("critic loss is not finite");
  tape.backward(loss);
  numerics::adam_step(params, lr);
  return value;
}

double actor_update(nets::ActorParams& actor, nets::CriticParams& critic, std::span<const Transition> batch,
                    double self_weight, double lr) {
  require_batch(batch, "actor update");
  std::vector<Parameter*> params = nets::parameters(actor);
  numerics::zero_grad(params);
  Tape tape;
  const nets::ActorVars av = nets::bind(tape, actor);
  const nets::CriticVars cv = nets::bind(tape, critic, false);
  std::vector<Var> qs;
  qs.reserve(batch.size());
  for (const Transition& t : batch) {
    Var h = tape.constant(t.joint_h);
    qs.push_back(nets::critic_forward(h, nets::actor_forward(h, av, self_weight), cv));
  }
  Var j = numerics::mean(numerics::concat(qs));
  const double value = j.value().item();
  if (!std::isfinite(value)) throw NumericError("actor objective is not finite");
  tape.backward(numerics::scale(j, -1.0));
  numerics::adam_step(params, lr);
  return value;
}

void polyak_update(std::span<Parameter* const> target, std::span<Parameter* const> live, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("polyak tau must lie in (0, 1]");
  if (target.size() != live.size()) throw ShapeError("target and live parameter lists differ in length");
  for (std::size_t k = 0; k < target.size(); ++k) {
    Tensor& t = target[k]->value;
    const Tensor& l = live[k]->value;
    if (t.shape() != l.shape()) {
      throw ShapeError("target " + target[k]->name + " " + numerics::shape_string(t.shape()) + " vs live " +
                       numerics::shape_string(l.shape()));
    }
    if (tau == 1.0) {
      t = l;
      continue;
    }
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = (1.0 - tau) * t[i] + tau * l[i];
  }
}

void polyak_update(TargetNets& targets, nets::ActorParams& actor, nets::CriticParams& critic, double tau) {
  polyak_update(nets::parameters(targets.actor), nets::parameters(actor), tau);
  polyak_update(nets::parameters(targets.critic), nets::parameters(critic), tau);
}

}  // namespace pyrogrid::exchange
