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

#include "pyrogrid/trainer/config.hpp"

#include <cmath>

#include "detail/json_fields.hpp"
#include "pyrogrid/error.hpp"

namespace pyrogrid::trainer {

using detail::FieldReader;
using detail::json;

double Rate::at(std::uint64_t n) const { return base * std::pow(1.0 + double(n), -exponent); }

void StepSchedule::validate() const {
  const std::array<std::pair<const char*, const Rate*>, 4> rates{
      {{"pred", &pred}, {"sys", &sys}, {"critic", &critic}, {"actor", &actor}}};
  for (const auto& [name, r] : rates) {
    if (!(r->base > 0.0) || !std::isfinite(r->base))
      throw ConfigError(std::string("schedule.") + name + ".base: must be positive");
    if (!(r->exponent >= 0.0) || !std::isfinite(r->exponent))
      throw ConfigError(std::string("schedule.") + name + ".exponent: must be non-negative");
  }
  for (std::size_t k = 0; k + 1 < rates.size(); ++k) {
    const auto& [fast, a] = rates[k];
    const auto& [slow, b] = rates[k + 1];
    if (a->base < b->base)
      throw ConfigError(std::string("schedule.") + slow + ".base: exceeds " + fast + ".base");
    if (!(a->exponent < b->exponent))
      throw ConfigError(std::string("schedule.") + slow + ".exponent: must exceed " + fast + ".exponent");
  }
}

Rates StepSchedule::at(std::uint64_t n) const { return {pred.at(n), sys.at(n), critic.at(n), actor.at(n)}; }

void TrainConfig::validate() const {
  const auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string("train.") + name + ": must be at least 1");
  };
  positive(d_enc, "d_enc");
  positive(d_h, "d_h");
  positive(horizons, "horizons");
  positive(policy_hidden, "policy_hidden");
  positive(trajectory_capacity, "trajectory_capacity");
  positive(transition_capacity, "transition_capacity");
  positive(batch, "batch");
  positive(transition_batch, "transition_batch");
  for (std::size_t w : widths) positive(w, "widths");
  if (window < 2) throw ConfigError("train.window: must be at least 2");
  if (trajectory_capacity < window + horizons)
    throw ConfigError("train.trajectory_capacity: must hold window + horizons entries");
  if (transition_batch > transition_capacity)
    throw ConfigError("train.transition_batch: exceeds transition_capacity");
  if (height % 16 != 0 || width % 16 != 0)
    throw ConfigError("train.height/width: must be multiples of 16 (or 0 to use the data)");
  if (!(self_weight >= 0.0 && self_weight <= 1.0)) throw ConfigError("train.self_weight: must lie in [0, 1]");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("train.gamma: must lie in (0, 1)");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("train.tau: must lie in (0, 1]");
  if (!(noise_sigma >= 0.0) || !(noise_sigma_min >= 0.0) || noise_sigma_min > noise_sigma)
    throw ConfigError("train.noise_sigma: need 0 <= noise_sigma_min <= noise_sigma");
  schedule.validate();
  if (static_only && logistic_only) throw ConfigError("train.static_only: conflicts with logistic_only");
  if (!recurrent() && use_sys_id)
    throw ConfigError(std::string("train.use_sys_id: a ") + (static_only ? "static" : "logistic") +
                      " model has no recurrence to identify");
  if (!recurrent() && use_exchange)
    throw ConfigError(std::string("train.use_exchange: a ") + (static_only ? "static" : "logistic") +
                      " model has no hidden state for the exchange policy");
}

nets::NetConfig TrainConfig::net_config(std::size_t channels) const {
  nets::NetConfig n;
  n.agents = agents;
  n.channels = channels;
  n.height = height;
  n.width = width;
  n.d_enc = d_enc;
  n.d_h = d_h;
  n.horizons = horizons;
  n.widths = widths;
  n.policy_hidden = policy_hidden;
  n.validate();
  return n;
}

namespace {

void read_rate(const json& j, const std::string& ctx, Rate& r) {
  FieldReader f(j, ctx);
  f.get("base", r.base);
  f.get("exponent", r.exponent);
  f.finish();
}

json rate_json(const Rate& r) { return {{"base", r.base}, {"exponent", r.exponent}}; }

}  // namespace

TrainConfig train_config_from_json(std::string_view text) {
  const json j = detail::parse_json(text, "train config");
  TrainConfig cfg;
  FieldReader r(j, "train");
  r.get("agents", cfg.agents);
  r.get("height", cfg.height);
  r.get("width", cfg.width);
  r.get("d_enc", cfg.d_enc);
  r.get("d_h", cfg.d_h);
  r.get("horizons", cfg.horizons);
  if (const json* w = r.child("widths")) {
    if (!w->is_array() || w->size() != 4) r.fail("widths", "expected an array of four channel counts");
    for (std::size_t k = 0; k < 4; ++k) {
      if (!(*w)[k].is_number_unsigned()) r.fail("widths", "expected non-negative integers");
      cfg.widths[k] = (*w)[k].get<std::size_t>();
    }
  }
  r.get("policy_hidden", cfg.policy_hidden);
  r.get("trajectory_capacity", cfg.trajectory_capacity);
  r.get("transition_capacity", cfg.transition_capacity);
  r.get("batch", cfg.batch);
  r.get("window", cfg.window);
  r.get("transition_batch", cfg.transition_batch);
  r.get("episodes", cfg.episodes);
  r.get("persist_buffers", cfg.persist_buffers);
  r.get("self_weight", cfg.self_weight);
  r.get("gamma", cfg.gamma);
  r.get("tau", cfg.tau);
  r.get("noise_sigma", cfg.noise_sigma);
  r.get("noise_sigma_min", cfg.noise_sigma_min);
  if (const json* s = r.child("schedule")) {
    FieldReader f(*s, "train.schedule");
    if (const json* x = f.child("pred")) read_rate(*x, "train.schedule.pred", cfg.schedule.pred);
    if (const json* x = f.child("sys")) read_rate(*x, "train.schedule.sys", cfg.schedule.sys);
    if (const json* x = f.child("critic")) read_rate(*x, "train.schedule.critic", cfg.schedule.critic);
    if (const json* x = f.child("actor")) read_rate(*x, "train.schedule.actor", cfg.schedule.actor);
    f.finish();
  }
  std::string reward;
  if (r.get("reward", reward)) {
    try {
      cfg.reward = exchange::parse_reward_kind(reward);
    } catch (const ConfigError& e) {
      r.fail("reward", e.what());
    }
  }
  r.get("seed", cfg.seed);
  r.get("use_sys_id", cfg.use_sys_id);
  r.get("use_exchange", cfg.use_exchange);
  r.get("static_only", cfg.static_only);
  r.get("logistic_only", cfg.logistic_only);
  r.get("log_online_metrics", cfg.log_online_metrics);
  r.finish();
  cfg.validate();
  return cfg;
}

std::string to_json(const TrainConfig& cfg) {
  const json j = {{"agents", cfg.agents},
                  {"height", cfg.height},
                  {"width", cfg.width},
                  {"d_enc", cfg.d_enc},
                  {"d_h", cfg.d_h},
                  {"horizons", cfg.horizons},
                  {"widths", cfg.widths},
                  {"policy_hidden", cfg.policy_hidden},
                  {"trajectory_capacity", cfg.trajectory_capacity},
                  {"transition_capacity", cfg.transition_capacity},
                  {"batch", cfg.batch},
                  {"window", cfg.window},
                  {"transition_batch", cfg.transition_batch},
                  {"episodes", cfg.episodes},
                  {"persist_buffers", cfg.persist_buffers},
                  {"self_weight", cfg.self_weight},
                  {"gamma", cfg.gamma},
                  {"tau", cfg.tau},
                  {"noise_sigma", cfg.noise_sigma},
                  {"noise_sigma_min", cfg.noise_sigma_min},
                  {"schedule",
                   {{"pred", rate_json(cfg.schedule.pred)},
                    {"sys", rate_json(cfg.schedule.sys)},
                    {"critic", rate_json(cfg.schedule.critic)},
                    {"actor", rate_json(cfg.schedule.actor)}}},
                  {"reward", std::string(exchange::reward_kind_name(cfg.reward))},
                  {"seed", cfg.seed},
                  {"use_sys_id", cfg.use_sys_id},
                  {"use_exchange", cfg.use_exchange},
                  {"static_only", cfg.static_only},
                  {"logistic_only", cfg.logistic_only},
                  {"log_online_metrics", cfg.log_online_metrics}};
  return j.dump(2) + "\n";
}

std::string method_name(const TrainConfig& cfg) {
  if (cfg.logistic_only) return "logistic";
  if (cfg.static_only) return "static";
  if (!cfg.use_exchange) return cfg.use_sys_id ? "proposed_no_exchange" : "gru";
  std::string name = cfg.use_sys_id ? "proposed" : "gru_exchange";
  if (cfg.reward == exchange::RewardKind::adversarial_max_loss) name += "_adversarial";
  return name;
}

}  // namespace pyrogrid::trainer
