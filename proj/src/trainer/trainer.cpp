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

#include "pyrogrid/trainer/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "detail/byte_io.hpp"
#include "pyrogrid/error.hpp"
#include "pyrogrid/parallel.hpp"

namespace pyrogrid::trainer {

namespace fs = std::filesystem;
using environment::Dataset;
using environment::GridSeries;

namespace {

// Stream ids under the run seed.
constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kSampleStream = 0x5a3b;
constexpr std::uint64_t kPolicyInitStream = 0x9011;
constexpr std::uint64_t kPolicyStream = 0x9012;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

Tensor horizon_plane(const Tensor& stack, std::size_t l) {
  const std::size_t h = stack.dim(1), w = stack.dim(2);
  const auto begin = stack.data().begin() + static_cast<std::ptrdiff_t>(l * h * w);
  return Tensor({h, w}, {begin, begin + static_cast<std::ptrdiff_t>(h * w)});
}

[[noreturn]] void mismatch(const std::string& what) { throw DataError(Errc::split_mismatch, what); }

}  // namespace

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val" || name == "validation") return Split::val;
  throw ConfigError("unknown split '" + std::string(name) + "' (expected train or val)");
}

TrainConfig resolve(TrainConfig cfg, const Dataset& data) {
  if (data.agents.empty()) throw DataError(Errc::empty_input, "dataset has no agents");
  const GridSeries& first = data.agents.front();
  const auto fill = [](std::size_t& field, std::size_t actual, const char* name) {
    if (field == 0) field = actual;
    if (field != actual) {
      mismatch(std::string("config ") + name + " = " + std::to_string(field) + " but the data has " +
               std::to_string(actual));
    }
  };
  fill(cfg.agents, data.agents.size(), "agents");
  fill(cfg.height, first.height, "height");
  fill(cfg.width, first.width, "width");
  cfg.validate();
  cfg.net_config(first.channels);
  if (data.train_weeks() == 0) throw DataError(Errc::empty_train, "dataset has no train weeks");
  return cfg;
}

std::vector<AgentModel> make_models(const TrainConfig& resolved, const Dataset& data) {
  const nets::NetConfig net = resolved.net_config(data.agents.front().channels);
  std::vector<AgentModel> models;
  models.reserve(resolved.agents);
  for (std::size_t i = 0; i < resolved.agents; ++i) {
    const std::size_t id = data.manifest.agents.at(i).id;
    Rng rng = Rng::stream(resolved.seed, {kInitStream, id});
    models.emplace_back(model_kind(resolved), net, rng, "agent" + std::to_string(id) + ".");
  }
  return models;
}

Trainer::Trainer(const TrainConfig& cfg, const Dataset& data)
    : cfg_(resolve(cfg, data)), train_weeks_(data.train_weeks()), models_(make_models(cfg_, data)) {
  agents_.resize(cfg_.agents);
  for (std::size_t i = 0; i < cfg_.agents; ++i) {
    Agent& a = agents_[i];
    a.id = data.manifest.agents.at(i).id;
    a.h = models_[i].initial_state();
    a.buffer = buffers::TrajectoryBuffer(cfg_.trajectory_capacity);
    a.rng = Rng::stream(cfg_.seed, {kSampleStream, a.id});
    const GridSeries& gs = data.agents[i];
    for (std::size_t t = 0; t < train_weeks_; ++t) {
      a.frames.push_back(gs.frame(t));
      a.fire.push_back(gs.fire_map(t));
    }
  }
  if (cfg_.use_exchange) {
    const nets::NetConfig net = cfg_.net_config(data.agents.front().channels);
    Rng init = Rng::stream(cfg_.seed, {kPolicyInitStream});
    actor_ = nets::init_actor(net, init, "");
    critic_ = nets::init_critic(net, init, "");
    targets_ = exchange::make_targets(actor_, critic_);
    transitions_ = buffers::TransitionBuffer(cfg_.transition_capacity, cfg_.self_weight);
    policy_rng_ = Rng::stream(cfg_.seed, {kPolicyStream});
  }
}

std::uint64_t Trainer::total_ticks() const { return std::uint64_t(cfg_.episodes) * train_weeks_; }

void Trainer::begin_episode() {
  if (started_) {
    ++episode_;
    if (!cfg_.persist_buffers)
      for (Agent& a : agents_) a.buffer.clear();
  }
  started_ = true;
  week_ = 0;
  pending_.reset();
  for (std::size_t i = 0; i < agents_.size(); ++i) agents_[i].h = models_[i].initial_state();
}

Tensor Trainer::target_stack(std::size_t agent, std::size_t week) const {
  const Agent& a = agents_[agent];
  const std::size_t plane = a.fire.front().size();
  Tensor out({cfg_.horizons, a.fire.front().dim(0), a.fire.front().dim(1)});
  for (std::size_t l = 0; l < cfg_.horizons; ++l) {
    const std::size_t w = week + l + 1;
    if (w >= train_weeks_) {
      throw Error(Errc::missing_ground_truth, "week " + std::to_string(w) + " lies past the train split");
    }
    std::copy(a.fire[w].data().begin(), a.fire[w].data().end(), out.data().begin() + std::ptrdiff_t(l * plane));
  }
  return out;
}

Tensor Trainer::joint_state() const {
  std::vector<double> joint;
  for (const Agent& a : agents_) joint.insert(joint.end(), a.h.data().begin(), a.h.data().end());
  const std::size_t n = joint.size();
  return Tensor({n}, std::move(joint));
}

TickReport Trainer::tick() {
  if (!started_ || episode_done()) throw Error(Errc::range_violation, "tick outside an episode; call begin_episode");
  const std::size_t n_agents = agents_.size();
  const std::size_t t = week_;
  const std::size_t L = cfg_.horizons;

  TickReport rep;
  rep.tick = tick_;
  rep.episode = episode_;
  rep.week = t;
  rep.rates = cfg_.schedule.at(tick_);
  rep.agents.resize(n_agents);

  // (1) online state update, buffer push and the online prediction.
  const bool need_prediction = cfg_.log_online_metrics ||
                               (cfg_.use_exchange && cfg_.reward == exchange::RewardKind::mean_iou);
  std::vector<Tensor> online(n_agents);
  parallel_for(n_agents, [&](std::size_t i) {
    Agent& a = agents_[i];
    a.buffer.push({a.frames[t], a.h, tick_, t});
    a.h = models_[i].step(a.h, a.frames[t]);
    if (!need_prediction) return;
    online[i] = models_[i].predict(a.h);
    if (!cfg_.log_online_metrics) return;
    AgentTick& r = rep.agents[i];
    std::size_t scored = 0;
    for (std::size_t l = 0; l < L && t + l + 1 < train_weeks_; ++l) {
      const Tensor& truth = a.fire[t + l + 1];
      const Tensor pred = horizon_plane(online[i], l);
      r.bce += metrics::bce(truth, pred);
      r.auroc += metrics::auroc(truth.data(), pred.data()).value;
      r.iou += metrics::iou(truth, pred);
      ++scored;
    }
    if (scored > 0) {
      r.scored = true;
      r.bce /= double(scored);
      r.auroc /= double(scored);
      r.iou /= double(scored);
    }
  });

  // (2)-(3) action and sources.
  std::vector<std::size_t> sources(n_agents);
  for (std::size_t i = 0; i < n_agents; ++i) sources[i] = i;
  Tensor joint, action;
  if (cfg_.use_exchange) {
    joint = joint_state();
    if (pending_) {
      transitions_.push({pending_->joint_h, pending_->action, pending_->reward, joint});
      pending_.reset();
    }
    const double sigma = exchange::noise_sigma(tick_, total_ticks(), cfg_.noise_sigma, cfg_.noise_sigma_min);
    action = exchange::act_noisy(actor_, joint, cfg_.self_weight, sigma, policy_rng_);
    sources = exchange::sample_sources(action, policy_rng_);
  }

  // (4) per-agent updates on a batch from the assigned source.
  parallel_for(n_agents, [&](std::size_t i) {
    AgentTick& r = rep.agents[i];
    r.source = sources[i];
    std::vector<buffers::TrajectoryWindow> windows;
    try {
      windows = agents_[r.source].buffer.sample(cfg_.window, cfg_.batch, L, agents_[i].rng);
    } catch (const Error& e) {
      if (e.code() != Errc::insufficient_data) throw;
      r.sys_loss = r.pred_loss = kNaN;
      return;
    }
    std::vector<std::vector<Tensor>> targets(windows.size());
    for (std::size_t m = 0; m < windows.size(); ++m)
      for (std::size_t k = 0; k < windows[m].x.size(); ++k)
        targets[m].push_back(target_stack(r.source, windows[m].first_week + k));
    const WindowLosses l = models_[i].train_step(windows, targets, rep.rates, cfg_.use_sys_id);
    r.updated = true;
    r.sys_loss = l.sys;
    r.pred_loss = l.pred;
  });

  if (cfg_.use_exchange) {
    // (5) reward, scored on this tick's pre-update predictions.
    if (cfg_.reward == exchange::RewardKind::mean_iou) {
      if (t + L < train_weeks_) {
        std::vector<Tensor> truth;
        for (std::size_t i = 0; i < n_agents; ++i) truth.push_back(target_stack(i, t));
        rep.reward = exchange::mean_iou_reward(online, truth);
      }
    } else {
      std::vector<double> losses;
      for (const AgentTick& r : rep.agents) {
        if (!r.updated) break;
        losses.push_back(r.pred_loss + (std::isnan(r.sys_loss) ? 0.0 : r.sys_loss));
      }
      if (losses.size() == n_agents) rep.reward = exchange::adversarial_reward(losses);
    }
    if (rep.reward) pending_ = Pending{joint, action, *rep.reward};

    // (6)-(7) critic, actor, targets.
    if (transitions_.size() >= cfg_.transition_batch) {
      const auto batch = transitions_.sample(cfg_.transition_batch, policy_rng_);
      rep.critic_loss =
          exchange::critic_update(critic_, targets_, batch, cfg_.gamma, cfg_.self_weight, rep.rates.critic);
      rep.objective = exchange::actor_update(actor_, critic_, batch, cfg_.self_weight, rep.rates.actor);
      exchange::polyak_update(targets_, actor_, critic_, cfg_.tau);
      rep.rl_updated = true;
    }
  }

  // (8)
  ++tick_;
  ++week_;
  return rep;
}

std::vector<Parameter*> Trainer::parameters() {
  std::vector<Parameter*> all;
  for (AgentModel& m : models_)
    for (Parameter* p : m.parameters()) all.push_back(p);
  if (cfg_.use_exchange) {
    for (Parameter* p : nets::parameters(actor_)) all.push_back(p);
    for (Parameter* p : nets::parameters(critic_)) all.push_back(p);
    for (Parameter* p : nets::parameters(targets_.actor)) all.push_back(p);
    for (Parameter* p : nets::parameters(targets_.critic)) all.push_back(p);
  }
  return all;
}

std::vector<numerics::NamedTensor> Trainer::checkpoint() { return numerics::snapshot(parameters()); }

void Trainer::restore(const std::vector<numerics::NamedTensor>& records) { numerics::restore(parameters(), records); }

Rollout rollout(AgentModel& model, const GridSeries& series, std::size_t first, std::size_t end) {
  if (end > series.weeks || first > end) {
    throw DataError(Errc::split_out_of_range, "rollout weeks [" + std::to_string(first) + ", " +
                                                  std::to_string(end) + ") outside a series of " +
                                                  std::to_string(series.weeks));
  }
  Rollout out;
  Tensor h = model.initial_state();
  for (std::size_t t = 0; t < end; ++t) {
    Tensor x_hat;
    h = model.step(h, series.frame(t), &x_hat);
    if (t < first) continue;
    out.predictions.push_back(model.predict(h));
    if (!x_hat.empty()) out.reconstructions.push_back(std::move(x_hat));
  }
  return out;
}

Evaluation evaluate(std::vector<AgentModel>& models, const Dataset& data, Split split, const std::string& method) {
  if (models.size() != data.agents.size()) {
    mismatch(std::to_string(models.size()) + " models for " + std::to_string(data.agents.size()) + " agents");
  }
  const std::size_t begin = split == Split::train ? 0 : data.train_weeks();
  const std::size_t count = split == Split::train ? data.train_weeks() : data.val_weeks();
  const std::size_t end = begin + count;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const nets::NetConfig& net = models[i].net();
    const GridSeries& gs = data.agents[i];
    if (net.channels != gs.channels || net.height != gs.height || net.width != gs.width) {
      mismatch("agent " + std::to_string(i) + " model expects " + numerics::shape_string(net.grid_shape()) +
               " but the data has [" + std::to_string(gs.channels) + ", " + std::to_string(gs.height) + ", " +
               std::to_string(gs.width) + "]");
    }
    if (gs.weeks < end) mismatch("agent " + std::to_string(i) + " series is shorter than the split");
  }
  const std::size_t L = models.front().net().horizons;
  if (count <= L) {
    mismatch("split of " + std::to_string(count) + " weeks leaves nothing to score at " + std::to_string(L) +
             " horizons");
  }

  struct AgentScores {
    std::vector<metrics::MetricRow> rows;
    double mse_sum = 0.0;
    std::size_t mse_count = 0;
  };
  std::vector<AgentScores> scores(models.size());
  parallel_for(models.size(), [&](std::size_t i) {
    const GridSeries& gs = data.agents[i];
    const Rollout r = rollout(models[i], gs, begin, end);
    for (std::size_t l = 1; l <= L; ++l) {
      double bce = 0.0, iou = 0.0;
      std::vector<double> truth, score;
      std::size_t weeks = 0;
      for (std::size_t t = begin; t + l < end; ++t) {
        const Tensor f = gs.fire_map(t + l);
        const Tensor p = horizon_plane(r.predictions[t - begin], l - 1);
        bce += metrics::bce(f, p);
        iou += metrics::iou(f, p);
        truth.insert(truth.end(), f.data().begin(), f.data().end());
        score.insert(score.end(), p.data().begin(), p.data().end());
        ++weeks;
      }
      scores[i].rows.push_back({method, std::to_string(i), std::to_string(l), bce / double(weeks),
                                metrics::auroc(truth, score).value, iou / double(weeks)});
    }
    for (std::size_t k = 0; k + 1 < r.reconstructions.size(); ++k) {
      const Tensor next = gs.frame(begin + k + 1);
      const std::vector<Tensor> a{r.reconstructions[k]}, b{next};
      scores[i].mse_sum += sys_loss(a, b);
      ++scores[i].mse_count;
    }
  });

  Evaluation ev;
  double mse = 0.0;
  std::size_t mse_count = 0;
  for (AgentScores& s : scores) {
    for (auto& row : s.rows) ev.table.add(std::move(row));
    mse += s.mse_sum;
    mse_count += s.mse_count;
  }
  ev.obs_mse = mse_count ? mse / double(mse_count) : kNaN;
  return ev;
}

namespace {

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::ofstream open_csv(const fs::path& path, const char* header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << header << '\n';
  return out;
}

std::string checkpoint_name(std::size_t episode) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "checkpoint_%03zu.pgck", episode);
  return buf;
}

}  // namespace

RunArtifacts train(const TrainConfig& cfg, const Dataset& data, const fs::path& out,
                   const std::function<void(const std::string&)>& progress) {
  Trainer tr(cfg, data);
  const TrainConfig& rc = tr.config();
  const std::string method = method_name(rc);
  const bool can_validate = data.val_weeks() > rc.horizons;

  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
  write_text_file(out / "config.json", to_json(rc));

  RunArtifacts art;
  art.dir = out;
  const auto save = [&](std::size_t episode) {
    const fs::path p = out / checkpoint_name(episode);
    numerics::save_checkpoint(p, tr.checkpoint());
    art.checkpoints.push_back(p);
  };
  save(0);

  std::ofstream metrics_csv = open_csv(
      out / "metrics.csv", "tick,agent,split,bce,auroc,iou,reward,eps_sys,eps_pred,eps_critic,eps_actor");
  std::ofstream losses_csv = open_csv(out / "losses.csv", "tick,episode,week,agent,source,updated,sys_loss,pred_loss");
  std::ofstream exchange_csv;
  if (rc.use_exchange)
    exchange_csv = open_csv(out / "exchange.csv", "tick,dest_agent,src_agent,reward,J,critic_loss");

  for (std::size_t e = 1; e <= rc.episodes; ++e) {
    tr.begin_episode();
    double pred_sum = 0.0, sys_sum = 0.0;
    std::size_t updates = 0;
    Rates last_rates;
    while (!tr.episode_done()) {
      const TickReport rep = tr.tick();
      last_rates = rep.rates;
      const std::string rates = num(rep.rates.sys) + "," + num(rep.rates.pred) + "," + num(rep.rates.critic) + "," +
                                num(rep.rates.actor);
      const std::string reward = rep.reward ? num(*rep.reward) : "nan";
      for (std::size_t i = 0; i < rep.agents.size(); ++i) {
        const AgentTick& a = rep.agents[i];
        losses_csv << rep.tick << ',' << rep.episode << ',' << rep.week << ',' << i << ',' << a.source << ','
                   << (a.updated ? 1 : 0) << ',' << num(a.sys_loss) << ',' << num(a.pred_loss) << '\n';
        if (a.updated) {
          pred_sum += a.pred_loss;
          sys_sum += a.sys_loss;
          ++updates;
        }
        if (a.scored) {
          metrics_csv << rep.tick << ',' << i << ",train," << num(a.bce) << ',' << num(a.auroc) << ',' << num(a.iou)
                      << ',' << reward << ',' << rates << '\n';
        }
        if (rc.use_exchange) {
          exchange_csv << rep.tick << ',' << i << ',' << a.source << ',' << reward << ','
                       << (rep.rl_updated ? num(rep.objective) : "nan") << ','
                       << (rep.rl_updated ? num(rep.critic_loss) : "nan") << '\n';
        }
      }
    }
    art.episode_pred_loss.push_back(updates ? pred_sum / double(updates) : kNaN);
    art.episode_sys_loss.push_back(updates ? sys_sum / double(updates) : kNaN);
    save(e);

    if (can_validate) {
      const Evaluation ev = evaluate(tr.models(), data, Split::val, method);
      const std::string rates = num(last_rates.sys) + "," + num(last_rates.pred) + "," + num(last_rates.critic) +
                                "," + num(last_rates.actor);
      for (std::size_t i = 0; i < tr.agents(); ++i) {
        double bce = 0.0, auroc = 0.0, iou = 0.0;
        for (std::size_t l = 0; l < rc.horizons; ++l) {
          const metrics::MetricRow& r = ev.table.rows()[i * rc.horizons + l];
          bce += r.bce;
          auroc += r.auroc;
          iou += r.iou;
        }
        const double n = double(rc.horizons);
        metrics_csv << tr.ticks() << ',' << i << ",val," << num(bce / n) << ',' << num(auroc / n) << ','
                    << num(iou / n) << ",nan," << rates << '\n';
      }
    }
    if (progress) {
      std::ostringstream msg;
      msg << method << " episode " << e << "/" << rc.episodes << " pred_loss " << num(art.episode_pred_loss.back());
      if (rc.use_sys_id) msg << " sys_loss " << num(art.episode_sys_loss.back());
      progress(msg.str());
    }
  }
  metrics_csv.flush();
  losses_csv.flush();
  if (!metrics_csv || !losses_csv) throw IoError("failed writing logs in " + out.string());

  if (can_validate) {
    art.evaluation = evaluate(tr.models(), data, Split::val, method);
    art.evaluation.table.add_method_means();
    std::ostringstream csv, text;
    art.evaluation.table.write_csv(csv);
    art.evaluation.table.write_text(text);
    write_text_file(out / "evaluation.csv", csv.str());
    write_text_file(out / "evaluation.txt", text.str());
  }
  return art;
}

LoadedRun load_run(const fs::path& checkpoint, const Dataset& data) {
  const fs::path config_path = checkpoint.parent_path() / "config.json";
  if (!fs::exists(config_path)) throw IoError("no config.json beside " + checkpoint.string());
  const std::vector<char> bytes = detail::read_file(config_path);
  LoadedRun run;
  run.config = resolve(train_config_from_json(std::string_view(bytes.data(), bytes.size())), data);
  run.models = make_models(run.config, data);
  std::vector<Parameter*> params;
  for (AgentModel& m : run.models)
    for (Parameter* p : m.parameters()) params.push_back(p);
  numerics::restore(params, numerics::load_checkpoint(checkpoint));
  return run;
}

}  // namespace pyrogrid::trainer
