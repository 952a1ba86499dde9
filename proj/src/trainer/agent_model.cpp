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

#include "pyrogrid/trainer/agent_model.hpp"

#include <cmath>
#include <limits>

#include "pyrogrid/error.hpp"
#include "pyrogrid/numerics/optim.hpp"

namespace pyrogrid::trainer {

ModelKind model_kind(const TrainConfig& cfg) {
  if (cfg.logistic_only) return ModelKind::logistic;
  if (cfg.static_only) return ModelKind::static_model;
  return ModelKind::recurrent;
}

Var pred_loss(std::span<const Var> predictions, std::span<const Tensor> targets) {
  if (predictions.size() != targets.size() || predictions.empty()) {
    throw ShapeError("pred_loss needs one target per prediction, got " + std::to_string(predictions.size()) +
                     " and " + std::to_string(targets.size()));
  }
  std::vector<Var> terms;
  terms.reserve(predictions.size());
  for (std::size_t k = 0; k < predictions.size(); ++k) terms.push_back(numerics::bce(targets[k], predictions[k]));
  return numerics::mean(numerics::concat(terms));
}

double pred_loss(std::span<const Tensor> predictions, std::span<const Tensor> targets) {
  Tape tape(Tape::Mode::inference);
  std::vector<Var> p;
  for (const Tensor& t : predictions) p.push_back(tape.constant(t));
  return pred_loss(p, targets).value().item();
}

Var sys_loss(std::span<const Var> reconstructions, std::span<const Tensor> observations) {
  if (reconstructions.size() != observations.size() || reconstructions.empty()) {
    throw ShapeError("sys_loss needs one observation per reconstruction, got " +
                     std::to_string(reconstructions.size()) + " and " + std::to_string(observations.size()));
  }
  Tape& tape = reconstructions.front().tape();
  std::vector<Var> terms;
  terms.reserve(reconstructions.size());
  for (std::size_t k = 0; k < reconstructions.size(); ++k)
    terms.push_back(numerics::mse(reconstructions[k], tape.constant(observations[k])));
  return numerics::mean(numerics::concat(terms));
}

double sys_loss(std::span<const Tensor> reconstructions, std::span<const Tensor> observations) {
  Tape tape(Tape::Mode::inference);
  std::vector<Var> r;
  for (const Tensor& t : reconstructions) r.push_back(tape.constant(t));
  return sys_loss(r, observations).value().item();
}

namespace {

struct LogisticVars {
  Var weight, bias;
};

LogisticVars bind_logistic(Tape& tape, LogisticParams& p) {
  return {tape.parameter(p.weight), tape.parameter(p.bias)};
}

Var logistic_forward(Var x, const LogisticVars& v) {
  return numerics::sigmoid(numerics::add_channel_bias(numerics::conv2d(x, v.weight, 1, 0), v.bias));
}

}  // namespace

AgentModel::AgentModel(ModelKind kind, const nets::NetConfig& cfg, Rng& rng, const std::string& prefix)
    : kind_(kind), net_(cfg) {
  net_.validate();
  switch (kind_) {
    case ModelKind::recurrent:
      sys_ = nets::init_sys(net_, rng, prefix);
      pred_ = nets::init_pred(net_, rng, prefix);
      break;
    case ModelKind::static_model:
      static_ = nets::init_static(net_, rng, prefix);
      break;
    case ModelKind::logistic:
      logistic_.weight = Parameter(prefix + "logistic.weight", Tensor({net_.horizons, net_.channels, 1, 1}));
      logistic_.bias = Parameter(prefix + "logistic.bias", Tensor({net_.horizons}));
      break;
  }
}

Tensor AgentModel::initial_state() const {
  switch (kind_) {
    case ModelKind::logistic:
      return Tensor(net_.grid_shape());
    default:
      return Tensor({net_.d_h});
  }
}

Tensor AgentModel::step(const Tensor& state, const Tensor& x, Tensor* x_hat) {
  numerics::require_shape(x, net_.grid_shape(), "observation");
  if (x_hat) *x_hat = Tensor();
  switch (kind_) {
    case ModelKind::recurrent: {
      nets::StepResult r = nets::advance_state(state, x, sys_);
      if (x_hat) *x_hat = std::move(r.x_hat);
      return std::move(r.h);
    }
    case ModelKind::static_model: {
      Tape tape(Tape::Mode::inference);
      return nets::static_state(tape.constant(x), nets::bind(tape, static_)).value();
    }
    case ModelKind::logistic:
      return x;
  }
  return state;
}

Tensor AgentModel::predict(const Tensor& state) {
  switch (kind_) {
    case ModelKind::recurrent:
      return nets::predict_fire(state, pred_);
    case ModelKind::static_model:
      return nets::predict_fire(state, static_.pred);
    case ModelKind::logistic: {
      Tape tape(Tape::Mode::inference);
      return logistic_forward(tape.constant(state), bind_logistic(tape, logistic_)).value();
    }
  }
  return {};
}

AgentModel::Graph AgentModel::build(Tape& tape, std::span<const buffers::TrajectoryWindow> windows,
                                    const std::vector<std::vector<Tensor>>& targets, bool with_sys) {
  if (windows.empty()) throw Error(Errc::insufficient_data, "no windows to train on");
  if (targets.size() != windows.size()) throw ShapeError("one target list per window is required");
  std::vector<Var> preds, recon;
  std::vector<Tensor> pred_targets, observed;
  const auto collect_targets = [&](std::size_t m, std::size_t k) {
    if (targets[m].size() != windows[m].x.size()) throw ShapeError("one target stack per window position is required");
    pred_targets.push_back(targets[m][k]);
  };

  switch (kind_) {
    case ModelKind::recurrent: {
      const nets::SysVars sv = nets::bind(tape, sys_);
      const nets::PredVars pv = nets::bind(tape, pred_);
      for (std::size_t m = 0; m < windows.size(); ++m) {
        const auto& w = windows[m];
        Var h = tape.constant(w.h.front());
        for (std::size_t k = 0; k < w.x.size(); ++k) {
          nets::StateStep s = nets::advance_state(h, tape.constant(w.x[k]), sv);
          h = s.h;
          if (with_sys && k + 1 < w.x.size()) {
            recon.push_back(s.x_hat);
            observed.push_back(w.x[k + 1]);
          }
          preds.push_back(nets::predict_fire(h, pv));
          collect_targets(m, k);
        }
      }
      break;
    }
    case ModelKind::static_model: {
      const nets::StaticVars st = nets::bind(tape, static_);
      for (std::size_t m = 0; m < windows.size(); ++m)
        for (std::size_t k = 0; k < windows[m].x.size(); ++k) {
          preds.push_back(nets::predict_fire(nets::static_state(tape.constant(windows[m].x[k]), st), st.pred));
          collect_targets(m, k);
        }
      break;
    }
    case ModelKind::logistic: {
      const LogisticVars lv = bind_logistic(tape, logistic_);
      for (std::size_t m = 0; m < windows.size(); ++m)
        for (std::size_t k = 0; k < windows[m].x.size(); ++k) {
          preds.push_back(logistic_forward(tape.constant(windows[m].x[k]), lv));
          collect_targets(m, k);
        }
      break;
    }
  }
  Graph g;
  g.pred = pred_loss(preds, pred_targets);
  if (!recon.empty()) g.sys = sys_loss(recon, observed);
  return g;
}

WindowLosses AgentModel::losses(std::span<const buffers::TrajectoryWindow> windows,
                                const std::vector<std::vector<Tensor>>& targets, bool with_sys) {
  Tape tape(Tape::Mode::inference);
  const Graph g = build(tape, windows, targets, with_sys && kind_ == ModelKind::recurrent);
  return {g.sys.valid() ? g.sys.value().item() : std::numeric_limits<double>::quiet_NaN(), g.pred.value().item()};
}

WindowLosses AgentModel::train_step(std::span<const buffers::TrajectoryWindow> windows,
                                    const std::vector<std::vector<Tensor>>& targets, const Rates& rates,
                                    bool with_sys) {
  std::vector<Parameter*> sys_p = sys_parameters();
  std::vector<Parameter*> pred_p = pred_parameters();
  numerics::zero_grad(sys_p);
  numerics::zero_grad(pred_p);
  Tape tape;
  const Graph g = build(tape, windows, targets, with_sys && kind_ == ModelKind::recurrent);
  Var total = g.sys.valid() ? numerics::add(g.sys, g.pred) : g.pred;
  WindowLosses out{g.sys.valid() ? g.sys.value().item() : std::numeric_limits<double>::quiet_NaN(),
                   g.pred.value().item()};
  if (!std::isfinite(total.value().item())) throw NumericError("training loss is not finite");
  tape.backward(total);
  numerics::adam_step(sys_p, rates.sys);
  numerics::adam_step(pred_p, rates.pred);
  return out;
}

std::vector<Parameter*> AgentModel::sys_parameters() {
  switch (kind_) {
    case ModelKind::recurrent:
      return nets::parameters(sys_);
    case ModelKind::static_model: {
      // Encoder and bridge play the role of the identification stack.
      std::vector<Parameter*> all = nets::parameters(static_);
      const std::size_t heads = nets::parameters(static_.pred).size();
      return {all.begin(), all.end() - static_cast<std::ptrdiff_t>(heads)};
    }
    case ModelKind::logistic:
      return {};
  }
  return {};
}

std::vector<Parameter*> AgentModel::pred_parameters() {
  switch (kind_) {
    case ModelKind::recurrent:
      return nets::parameters(pred_);
    case ModelKind::static_model:
      return nets::parameters(static_.pred);
    case ModelKind::logistic:
      return {&logistic_.weight, &logistic_.bias};
  }
  return {};
}

std::vector<Parameter*> AgentModel::parameters() {
  std::vector<Parameter*> all = sys_parameters();
  for (Parameter* p : pred_parameters()) all.push_back(p);
  return all;
}

}  // namespace pyrogrid::trainer
