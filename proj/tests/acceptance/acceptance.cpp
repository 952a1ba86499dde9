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

// Acceptance report: one PASS/FAIL line per criterion, details indented below.
// Exits 0 once every check has run; pass --strict to exit 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <set>
#include <vector>

#include <unistd.h>

#include "pyrogrid/environment/dataset.hpp"
#include "pyrogrid/exchange/exchange.hpp"
#include "pyrogrid/metrics/metrics.hpp"
#include "pyrogrid/numerics/checkpoint.hpp"
#include "pyrogrid/trainer/trainer.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "support/toy_mdp.hpp"

using namespace pyrogrid;
using namespace pyrogrid::numerics;
namespace fs = std::filesystem;
using trainer::TrainConfig;

namespace {

struct Outcome {
  bool pass = false;
  std::vector<std::string> details;
  void note(const std::string& s) { details.push_back(s); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::size_t env_size(const char* name, std::size_t fallback) {
  const char* v = std::getenv(name);
  if (!v) return fallback;
  const long n = std::atol(v);
  return n > 0 ? std::size_t(n) : fallback;
}

fs::path scratch_root() {
  return fs::temp_directory_path() / ("pyrogrid_acceptance_" + std::to_string(::getpid()));
}

fs::path scratch(const std::string& name) {
  const fs::path p = scratch_root() / name;
  fs::remove_all(p);
  return p;
}

environment::Dataset desk_data(std::uint64_t seed, bool decorrelated = false) {
  environment::GeneratorConfig g;
  g.seed = seed;
  g.params.decorrelated = decorrelated;
  return environment::generate_dataset(g);
}

// Desk-scale model: same architecture as the defaults at a quarter of the
// channel widths, half the state size and two windows per batch.
TrainConfig desk_config(const std::string& method, std::uint64_t seed, std::size_t episodes) {
  TrainConfig c;
  c.d_enc = c.d_h = 16;
  c.widths = {4, 8, 16, 32};
  c.batch = 2;
  c.seed = seed;
  c.episodes = episodes;
  c.log_online_metrics = false;
  if (method == "logistic" || method == "static") {
    c.use_sys_id = c.use_exchange = false;
    (method == "logistic" ? c.logistic_only : c.static_only) = true;
  } else if (method == "gru") {
    c.use_sys_id = c.use_exchange = false;
  } else if (method == "proposed_no_exchange") {
    c.use_exchange = false;
  }
  return c;
}

double mean_row(const metrics::MetricTable& t, double metrics::MetricRow::*field) {
  for (const auto& r : t.rows())
    if (r.agent == "mean") return r.*field;
  double s = 0.0;
  for (const auto& r : t.rows()) s += r.*field;
  return s / double(t.size());
}

// ---------------------------------------------------------------------------

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  constexpr int kSeeds = 20;
  struct Case {
    const char* name;
    std::function<double(Rng&)> run;  // worst relative error for one seed
  };
  using testing::gradcheck;
  using testing::random_tensor;
  const auto one = [](Parameter& p, const std::function<Var(Tape&, Var)>& f) {
    return gradcheck([&](Tape& t) { return f(t, t.parameter(p)); }, std::vector<Parameter*>{&p}).worst_relative_error;
  };
  const auto two = [](Parameter& a, Parameter& b, const std::function<Var(Tape&, Var, Var)>& f) {
    return gradcheck([&](Tape& t) { return f(t, t.parameter(a), t.parameter(b)); }, std::vector<Parameter*>{&a, &b})
        .worst_relative_error;
  };
  // Weighted sums keep the upstream gradient non-uniform.
  // Seeded from the size so every re-evaluation of a loss sees the same weights.
  const auto wsum = [](Tape& t, Var v, Rng&) {
    Tensor w(v.value().shape());
    Rng rng(0x5eed + w.size());
    for (double& x : w.data()) x = rng.uniform(-1.0, 1.0);
    return sum(mul(v, t.constant(w)));
  };

  std::vector<Case> cases = {
      {"add", [&](Rng& r) { Parameter a("a", random_tensor(r, {5})), b("b", random_tensor(r, {5}));
                            return two(a, b, [&](Tape& t, Var x, Var y) { return wsum(t, add(x, y), r); }); }},
      {"sub", [&](Rng& r) { Parameter a("a", random_tensor(r, {5})), b("b", random_tensor(r, {5}));
                            return two(a, b, [&](Tape& t, Var x, Var y) { return wsum(t, sub(x, y), r); }); }},
      {"mul", [&](Rng& r) { Parameter a("a", random_tensor(r, {5})), b("b", random_tensor(r, {5}));
                            return two(a, b, [&](Tape& t, Var x, Var y) { return wsum(t, mul(x, y), r); }); }},
      {"scale", [&](Rng& r) { Parameter a("a", random_tensor(r, {4})); const double s = r.uniform(-2.0, 2.0);
                              return one(a, [&](Tape& t, Var x) { return wsum(t, scale(x, s), r); }); }},
      {"add_scalar", [&](Rng& r) { Parameter a("a", random_tensor(r, {4}));
                                   return one(a, [&](Tape& t, Var x) { return wsum(t, add_scalar(x, 0.3), r); }); }},
      {"sum", [&](Rng& r) { Parameter a("a", random_tensor(r, {2, 3}));
                            return one(a, [&](Tape&, Var x) { return mul(sum(x), sum(x)); }); }},
      {"mean", [&](Rng& r) { Parameter a("a", random_tensor(r, {2, 3}));
                             return one(a, [&](Tape&, Var x) { return mul(mean(x), mean(x)); }); }},
      {"reshape", [&](Rng& r) { Parameter a("a", random_tensor(r, {2, 3}));
                                return one(a, [&](Tape& t, Var x) { return wsum(t, reshape(x, {3, 2}), r); }); }},
      {"concat", [&](Rng& r) { Parameter a("a", random_tensor(r, {3})), b("b", random_tensor(r, {2, 2}));
                               return two(a, b, [&](Tape& t, Var x, Var y) { return wsum(t, concat({x, y, x}), r); }); }},
      {"slice", [&](Rng& r) { Parameter a("a", random_tensor(r, {7}));
                              return one(a, [&](Tape& t, Var x) { return wsum(t, slice(x, 2, 4), r); }); }},
      {"leaky_relu", [&](Rng& r) { Parameter a("a", random_tensor(r, {8}, -2.0, 2.0));
                                   return one(a, [&](Tape& t, Var x) { return wsum(t, leaky_relu(x), r); }); }},
      {"sigmoid", [&](Rng& r) { Parameter a("a", random_tensor(r, {6}, -3.0, 3.0));
                                return one(a, [&](Tape& t, Var x) { return wsum(t, sigmoid(x), r); }); }},
      {"tanh", [&](Rng& r) { Parameter a("a", random_tensor(r, {6}, -3.0, 3.0));
                             return one(a, [&](Tape& t, Var x) { return wsum(t, numerics::tanh(x), r); }); }},
      {"matvec", [&](Rng& r) { Parameter w("w", random_tensor(r, {3, 4})), x("x", random_tensor(r, {4}));
                               return two(w, x, [&](Tape& t, Var a, Var b) { return wsum(t, matvec(a, b), r); }); }},
      {"affine", [&](Rng& r) {
         Parameter w("w", random_tensor(r, {3, 4})), b("b", random_tensor(r, {3})), x("x", random_tensor(r, {4}));
         return gradcheck([&](Tape& t) { return wsum(t, affine(t.parameter(w), t.parameter(b), t.parameter(x)), r); },
                          std::vector<Parameter*>{&w, &b, &x}).worst_relative_error; }},
      {"add_channel_bias", [&](Rng& r) { Parameter x("x", random_tensor(r, {3, 2, 2})), b("b", random_tensor(r, {3}));
                                         return two(x, b, [&](Tape& t, Var a, Var c) { return wsum(t, add_channel_bias(a, c), r); }); }},
      {"conv2d", [&](Rng& r) {
         const int stride = 1 + int(r.uniform_index(2)), pad = int(r.uniform_index(2));
         Parameter x("x", random_tensor(r, {2, 6, 6})), k("k", random_tensor(r, {3, 2, 3, 3}));
         return two(x, k, [&](Tape& t, Var a, Var b) { return wsum(t, conv2d(a, b, stride, pad), r); }); }},
      {"conv_transpose2d", [&](Rng& r) {
         Parameter x("x", random_tensor(r, {3, 3, 3})), k("k", random_tensor(r, {3, 2, 4, 4}));
         return two(x, k, [&](Tape& t, Var a, Var b) { return wsum(t, conv_transpose2d(a, b, 2, 1), r); }); }},
      {"mse", [&](Rng& r) { Parameter a("a", random_tensor(r, {5})), b("b", random_tensor(r, {5}));
                            return two(a, b, [&](Tape&, Var x, Var y) { return mse(x, y); }); }},
      {"bce", [&](Rng& r) {
         Tensor target({6});
         for (double& v : target.data()) v = r.bernoulli(0.5) ? 1.0 : 0.0;
         Parameter a("a", random_tensor(r, {6}, 0.05, 0.95));
         return one(a, [&](Tape&, Var x) { return bce(target, x); }); }},
      {"action_matrix", [&](Rng& r) { Parameter a("a", random_tensor(r, {9}, -2.0, 2.0));
                                      return one(a, [&](Tape& t, Var x) { return wsum(t, action_matrix(x, 3, 0.8), r); }); }},
      {"gru_cell", [&](Rng& r) {
         std::vector<Parameter> p;
         const std::size_t dh = 3, dx = 4;
         for (const char* n : {"wz", "uz", "bz", "wr", "ur", "br", "wh", "uh", "bh"}) {
           const char kind = n[0];
           p.emplace_back(n, random_tensor(r, kind == 'w' ? Shape{dh, dx} : kind == 'u' ? Shape{dh, dh} : Shape{dh}));
         }
         p.emplace_back("h", random_tensor(r, {dh}));
         p.emplace_back("x", random_tensor(r, {dx}));
         std::vector<Parameter*> ptrs;
         for (Parameter& q : p) ptrs.push_back(&q);
         return gradcheck([&](Tape& t) {
           std::vector<Var> v;
           for (Parameter& q : p) v.push_back(t.parameter(q));
           const GruWeights w{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
           return wsum(t, gru_cell(v[9], v[10], w), r);
         }, ptrs).worst_relative_error; }},
  };

  // Full agent network: encoder, three GRU steps, both decoders, both losses.
  // Judged on the whole gradient vector: deep decoder layers have gradients
  // near 1e-8, where central differences carry ~1e-11 of roundoff.
  double network_per_param = 0.0;
  cases.push_back({"agent network", [&](Rng& r) {
    nets::NetConfig net;
    net.agents = 1;
    net.channels = 2;
    net.height = net.width = 16;
    net.d_enc = net.d_h = 3;
    net.widths = {2, 2, 2, 2};
    nets::SysParams sys = nets::init_sys(net, r, "");
    nets::PredParams pred = nets::init_pred(net, r, "");
    std::vector<Parameter*> params = nets::parameters(sys);
    for (Parameter* p : nets::parameters(pred)) params.push_back(p);
    testing::randomize(params, r, -1.0, 1.0);
    std::vector<Tensor> xs;
    for (int k = 0; k < 3; ++k) xs.push_back(random_tensor(r, net.grid_shape(), 0.0, 1.0));
    std::vector<Tensor> fire;
    for (int k = 0; k < 3; ++k) {
      Tensor f({net.horizons, 16, 16});
      for (double& v : f.data()) v = r.bernoulli(0.2) ? 1.0 : 0.0;
      fire.push_back(f);
    }
    const Tensor h0 = random_tensor(r, {net.d_h});
    const auto res = gradcheck([&](Tape& t) {
      const nets::SysVars sv = nets::bind(t, sys);
      const nets::PredVars pv = nets::bind(t, pred);
      Var h = t.constant(h0);
      std::vector<Var> recon, preds;
      std::vector<Tensor> observed;
      for (std::size_t k = 0; k < 3; ++k) {
        const nets::StateStep s = nets::advance_state(h, t.constant(xs[k]), sv);
        h = s.h;
        if (k + 1 < 3) {
          recon.push_back(s.x_hat);
          observed.push_back(xs[k + 1]);
        }
        preds.push_back(nets::predict_fire(h, pv));
      }
      return add(trainer::sys_loss(recon, observed), trainer::pred_loss(preds, fire));
    }, params);
    network_per_param = std::max(network_per_param, res.worst_relative_error);
    return res.global_relative_error; }});

  Outcome out;
  double worst_all = 0.0;
  std::string worst_name;
  for (const Case& c : cases) {
    double worst = 0.0;
    for (int s = 0; s < kSeeds; ++s) {
      Rng rng = Rng::stream(0xacce, {std::uint64_t(s), std::hash<std::string>{}(c.name)});
      worst = std::max(worst, c.run(rng));
    }
    if (worst >= worst_all) {
      worst_all = worst;
      worst_name = c.name;
    }
  }
  const double secs = seconds_since(t0);
  out.pass = worst_all < 1e-4 && secs < 120.0;
  out.note(std::to_string(cases.size()) + " operations incl. the composed agent network, " + std::to_string(kSeeds) +
           " seeds each; worst relative error " + fmt("%.2e", worst_all) + " (" + worst_name + ")");
  out.note("agent network worst single-tensor error " + fmt("%.2e", network_per_param) +
           " (includes tensors whose gradient is at the finite-difference noise floor)");
  out.note("runtime " + fmt("%.1f", secs) + " s (limit 120 s)");
  return out;
}

Outcome oracles() {
  Outcome out;
  Rng rng(2024);
  double conv_err = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t ci = 1 + rng.uniform_index(3), co = 1 + rng.uniform_index(3);
    const std::size_t h = 4 + rng.uniform_index(6), w = 4 + rng.uniform_index(6);
    const int k = 2 + int(rng.uniform_index(3)), s = 1 + int(rng.uniform_index(2)), p = int(rng.uniform_index(2));
    const Tensor x = testing::random_tensor(rng, {ci, h, w});
    const Tensor kc = testing::random_tensor(rng, {co, ci, std::size_t(k), std::size_t(k)});
    Tape t(Tape::Mode::inference);
    conv_err = std::max(conv_err, max_abs_diff(conv2d(t.constant(x), t.constant(kc), s, p).value(),
                                               testing::oracle::conv2d(x, kc, s, p)));
    const Tensor kt = testing::random_tensor(rng, {ci, co, std::size_t(k), std::size_t(k)});
    conv_err = std::max(conv_err, max_abs_diff(conv_transpose2d(t.constant(x), t.constant(kt), s, p).value(),
                                               testing::oracle::conv_transpose2d(x, kt, s, p)));
  }
  std::size_t auroc_exact = 0, auroc_trials = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> labels(50), scores(50);
    do {
      for (std::size_t i = 0; i < 50; ++i) {
        labels[i] = rng.bernoulli(0.3) ? 1.0 : 0.0;
        scores[i] = double(rng.uniform_index(12)) / 12.0;
      }
    } while (std::count(labels.begin(), labels.end(), 1.0) == 0 || std::count(labels.begin(), labels.end(), 0.0) == 0);
    ++auroc_trials;
    auroc_exact += metrics::auroc(labels, scores).value == testing::oracle::pairwise_auroc(labels, scores);
  }
  double hand_err = 0.0;
  const auto hand = [&](double got, double want) { hand_err = std::max(hand_err, std::abs(got - want)); };
  hand(metrics::bce(Tensor({2, 2}, {1, 0, 0, 1}), Tensor::filled({2, 2}, 0.5)), std::log(2.0));
  hand(metrics::bce(Tensor({1, 2}, {1, 0}), Tensor({1, 2}, {0.9, 0.1})), -(std::log(0.9) + std::log(0.9)) / 2.0);
  hand(metrics::iou(Tensor({1, 3}, {1, 1, 0}), Tensor({1, 3}, {0.9, 0.6, 0.2})), 1.0);
  hand(metrics::iou(Tensor({1, 4}, {1, 1, 0, 0}), Tensor({1, 4}, {0.1, 0.2, 0.9, 0.8})), 0.0);
  hand(metrics::iou(Tensor({2, 4}, {1, 1, 1, 1, 0, 0, 0, 0}), Tensor({2, 4}, {0.9, 0.9, 0.1, 0.1, 0.8, 0.8, 0, 0})),
       2.0 / 6.0);
  hand(metrics::iou(Tensor({2, 2}), Tensor({2, 2})), 1.0);
  out.pass = conv_err < 1e-10 && auroc_exact == auroc_trials && hand_err < 1e-9;
  out.note("conv/deconv vs loop oracles, 40 random geometries: max abs diff " + fmt("%.2e", conv_err));
  out.note("AUROC equal to the pairwise oracle on " + std::to_string(auroc_exact) + "/" + std::to_string(auroc_trials) +
           " instances");
  out.note("BCE/IOU hand values: max abs diff " + fmt("%.2e", hand_err));
  return out;
}

Outcome action_constraints() {
  Outcome out;
  constexpr double c = 0.8;
  const std::size_t n = 3;
  nets::NetConfig net;
  net.agents = n;
  net.d_h = 8;
  net.policy_hidden = 32;
  double col_err = 0.0;
  std::size_t diag_exact = 0, negatives = 0, evals = 0;
  Rng rng(77);
  std::vector<double> self(n, 0.0);
  std::size_t draws = 0;
  for (int actor_seed = 0; actor_seed < 100; ++actor_seed) {
    Rng init = Rng::stream(actor_seed, {1});
    nets::ActorParams actor = nets::init_actor(net, init, "");
    testing::randomize(nets::parameters(actor), init, -2.0, 2.0);
    for (int k = 0; k < 100; ++k) {
      const Tensor joint = testing::random_tensor(rng, {n * net.d_h}, -3.0, 3.0);
      const Tensor a = exchange::act(actor, joint, c);
      ++evals;
      bool diag = true;
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          s += a.at(i, j);
          negatives += a.at(i, j) < 0.0;
        }
        col_err = std::max(col_err, std::abs(s - 1.0));
        diag = diag && a.at(j, j) == c;
      }
      diag_exact += diag;
      const auto src = exchange::sample_sources(a, rng);
      for (std::size_t j = 0; j < n; ++j) self[j] += src[j] == j;
      ++draws;
    }
  }
  double worst_freq = 0.0;
  for (double s : self) worst_freq = std::max(worst_freq, std::abs(s / double(draws) - c));
  out.pass = col_err <= 1e-9 && diag_exact == evals && negatives == 0 && worst_freq <= 0.02;
  out.note(std::to_string(evals) + " actor evaluations (100 random actors, N=3): max |column sum - 1| " +
           fmt("%.2e", col_err) + ", diagonal exactly 0.8 in " + std::to_string(diag_exact) + ", negative entries " +
           std::to_string(negatives));
  out.note(std::to_string(draws) + " source draws per agent: self-selection frequency within " +
           fmt("%.4f", worst_freq) + " of 0.8 (limit 0.02)");
  return out;
}

Outcome critic_soundness() {
  Outcome out;
  std::vector<double> updates, errors;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const testing::ToyMdpResult r = testing::solve_toy_mdp(seed);
    updates.push_back(double(r.updates));
    errors.push_back(r.worst_relative_error());
    out.note("seed " + std::to_string(seed) + ": q(A)=" + fmt("%.4f", r.q_a) + " q(B)=" + fmt("%.4f", r.q_b) +
             " (exact 4/3, 2/3), within 5% after " + std::to_string(r.updates) + " updates");
  }
  const double med_updates = median(updates), med_err = median(errors);
  out.pass = med_updates < 5000 && med_err < 0.05;
  out.note("median updates " + fmt("%.0f", med_updates) + " (limit 5000), median final error " + fmt("%.4f", med_err));
  return out;
}

Outcome reduction(const environment::Dataset& ds) {
  Outcome out;
  TrainConfig c = desk_config("proposed_no_exchange", 0, 1);
  trainer::Trainer joint(c, ds);
  joint.begin_episode();
  while (!joint.episode_done()) joint.tick();
  const auto all = joint.checkpoint();
  bool same = true;
  for (std::size_t i = 0; i < ds.agents.size(); ++i) {
    environment::Dataset one;
    one.manifest = ds.manifest;
    one.manifest.agents = {ds.manifest.agents[i]};
    one.agents = {ds.agents[i]};
    TrainConfig ci = c;
    ci.agents = 0;
    trainer::Trainer alone(ci, one);
    alone.begin_episode();
    while (!alone.episode_done()) alone.tick();
    const std::string prefix = "agent" + std::to_string(ds.manifest.agents[i].id) + ".";
    std::vector<NamedTensor> mine;
    for (const auto& r : all)
      if (r.name.rfind(prefix, 0) == 0) mine.push_back(r);
    const bool eq = alone.checkpoint() == mine;
    same = same && eq;
    out.note("agent " + std::to_string(i) + ": " + std::to_string(mine.size()) + " tensors " +
             (eq ? "bit-identical" : "DIFFER"));
  }
  out.pass = same;
  out.note("exchange off, one episode of " + std::to_string(ds.train_weeks()) + " ticks on the desk dataset");
  return out;
}

Outcome schedule_ordering() {
  Outcome out;
  const trainer::StepSchedule s;
  bool ordered = true, decreasing = true;
  double prev = s.actor.at(0) / s.pred.at(0);
  for (std::uint64_t n = 0; n <= 1000000; ++n) {
    const trainer::Rates r = s.at(n);
    ordered = ordered && r.pred >= r.sys && r.sys >= r.critic && r.critic >= r.actor;
    if (n == 0) continue;
    const double ratio = r.actor / r.pred;
    decreasing = decreasing && ratio < prev;
    prev = ratio;
  }
  out.pass = ordered && decreasing;
  out.note(std::string("pred >= sys >= critic >= actor for n <= 1e6: ") + (ordered ? "yes" : "no"));
  out.note(std::string("actor/pred strictly decreasing: ") + (decreasing ? "yes" : "no") + ", ratio at 1e6 = " +
           fmt("%.3e", prev));
  return out;
}

struct MethodRun {
  std::string method;
  std::vector<double> bce, obs_mse, obs_mse_init;
  double seconds = 0.0;
};

struct Comparison {
  std::vector<MethodRun> runs;
  std::size_t episodes = 0;
  std::size_t sysid_episodes = 0;
  double seconds = 0.0;
};

// Every method trains for `episodes`; the full model keeps going to
// `sysid_episodes` and is scored for the ordering at its `episodes` checkpoint.
Comparison compare_methods(std::size_t seeds, std::size_t episodes, std::size_t sysid_episodes) {
  Comparison cmp;
  cmp.episodes = episodes;
  cmp.sysid_episodes = std::max(episodes, sysid_episodes);
  const auto t0 = std::chrono::steady_clock::now();
  for (const char* m : {"logistic", "static", "gru", "proposed_no_exchange", "proposed"}) cmp.runs.push_back({m});
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    const environment::Dataset ds = desk_data(seed);
    for (MethodRun& run : cmp.runs) {
      const auto t1 = std::chrono::steady_clock::now();
      const bool full = run.method == "proposed";
      const TrainConfig c = desk_config(run.method, seed, full ? cmp.sysid_episodes : episodes);
      const fs::path dir = scratch("compare_" + run.method + "_" + std::to_string(seed));
      const trainer::RunArtifacts art = trainer::train(c, ds, dir);
      if (full) {
        trainer::LoadedRun init = trainer::load_run(art.checkpoints.front(), ds);
        run.obs_mse_init.push_back(trainer::evaluate(init.models, ds, trainer::Split::val, run.method).obs_mse);
        trainer::LoadedRun mid = trainer::load_run(art.checkpoints.at(episodes), ds);
        run.bce.push_back(
            mean_row(trainer::evaluate(mid.models, ds, trainer::Split::val, run.method).table, &metrics::MetricRow::bce));
      } else {
        run.bce.push_back(mean_row(art.evaluation.table, &metrics::MetricRow::bce));
      }
      run.obs_mse.push_back(art.evaluation.obs_mse);
      run.seconds += seconds_since(t1);
      fs::remove_all(dir);
    }
  }
  cmp.seconds = seconds_since(t0);
  return cmp;
}

Outcome ordering(const Comparison& cmp) {
  Outcome out;
  std::vector<double> med;
  for (const MethodRun& r : cmp.runs) {
    med.push_back(median(r.bce));
    std::string per_seed;
    for (double b : r.bce) per_seed += " " + fmt("%.5f", b);
    out.note(r.method + ": median val BCE " + fmt("%.5f", med.back()) + " (seeds:" + per_seed + "), " +
             fmt("%.0f", r.seconds) + " s");
  }
  const bool monotone = med[0] >= med[1] && med[1] >= med[2] && med[2] >= med[3];
  const bool exchange_ok = med[4] <= med[3] * 1.05;
  const bool full_scale = cmp.episodes >= 50;
  const bool in_budget = cmp.seconds < 15.0 * 60.0;
  out.note(std::string("logistic >= static >= gru >= proposed_no_exchange: ") + (monotone ? "holds" : "violated"));
  out.note("proposed vs proposed_no_exchange: " + fmt("%+.2f%%", 100.0 * (med[4] / med[3] - 1.0)) +
           " (allowed up to +5%)");
  out.note("schedule: " + std::to_string(cmp.episodes) + " episodes x " + std::to_string(cmp.runs.front().bce.size()) +
           " seeds, " + fmt("%.0f", cmp.seconds) + " s total" +
           (cmp.sysid_episodes > cmp.episodes
                ? " (the full model ran on to " + std::to_string(cmp.sysid_episodes) + " episodes for check 8)"
                : std::string()) +
           (full_scale ? "" : "; the 50-episode schedule does not fit the 15 min budget here, so this is a shortened run"));
  out.pass = monotone && exchange_ok && full_scale && in_budget;
  return out;
}

Outcome sysid(const Comparison& cmp) {
  Outcome out;
  const MethodRun& p = cmp.runs.back();
  std::vector<double> ratios;
  for (std::size_t s = 0; s < p.obs_mse.size(); ++s) {
    ratios.push_back(p.obs_mse[s] / p.obs_mse_init[s]);
    out.note("seed " + std::to_string(s) + ": one-step obs MSE " + fmt("%.5f", p.obs_mse_init[s]) + " -> " +
             fmt("%.5f", p.obs_mse[s]) + " (" + fmt("%.1f%%", 100.0 * ratios.back()) + ")");
  }
  const double med = median(ratios);
  out.pass = med < 0.6;
  out.note("median ratio " + fmt("%.1f%%", 100.0 * med) + " (limit 60%) after " + std::to_string(cmp.sysid_episodes) +
           " episodes");
  return out;
}

Outcome logistic_sanity(std::size_t episodes) {
  Outcome out;
  const environment::Dataset ds = desk_data(0, true);
  const fs::path dir = scratch("logistic_decorrelated");
  const trainer::RunArtifacts art = trainer::train(desk_config("logistic", 0, episodes), ds, dir);
  const double auroc = mean_row(art.evaluation.table, &metrics::MetricRow::auroc);
  double lo = 1.0, hi = 0.0;
  for (const auto& r : art.evaluation.table.rows()) {
    lo = std::min(lo, r.auroc);
    hi = std::max(hi, r.auroc);
  }
  fs::remove_all(dir);
  out.pass = std::abs(auroc - 0.5) <= 0.05;
  out.note("decorrelated generator, " + std::to_string(episodes) + " episodes: mean val AUROC " + fmt("%.4f", auroc) +
           " (rows span " + fmt("%.4f", lo) + " to " + fmt("%.4f", hi) + ")");
  return out;
}

Outcome determinism_causality(const environment::Dataset& ds) {
  Outcome out;
  const TrainConfig c = desk_config("proposed", 0, 1);
  const auto run_with = [&](const char* threads, const std::string& name) {
    setenv("PYROGRID_THREADS", threads, 1);
    const trainer::RunArtifacts art = trainer::train(c, ds, scratch(name));
    unsetenv("PYROGRID_THREADS");
    return art;
  };
  const trainer::RunArtifacts a = run_with("1", "det_1"), b = run_with("3", "det_3");
  bool same = a.checkpoints.size() == b.checkpoints.size();
  for (std::size_t k = 0; same && k < a.checkpoints.size(); ++k) {
    std::ifstream fa(a.checkpoints[k], std::ios::binary), fb(b.checkpoints[k], std::ios::binary);
    same = std::string(std::istreambuf_iterator<char>(fa), {}) == std::string(std::istreambuf_iterator<char>(fb), {});
  }
  out.note(std::string("proposed, one episode, 1 vs 3 workers: checkpoint files ") +
           (same ? "byte-identical" : "DIFFER"));

  // Online predictions of the trained models against data corrupted after t.
  trainer::LoadedRun run = trainer::load_run(a.checkpoints.back(), ds);
  bool causal = true;
  std::size_t compared = 0;
  Rng rng(5);
  for (const std::size_t t : {std::size_t(50), std::size_t(259), std::size_t(300)}) {
    for (std::size_t i = 0; i < ds.agents.size(); ++i) {
      environment::GridSeries gs = ds.agents[i];
      const trainer::Rollout clean = trainer::rollout(run.models[i], gs, 0, t + 1);
      for (std::size_t k = (t + 1) * gs.frame_size(); k < gs.obs.size(); ++k) gs.obs[k] = float(rng.uniform());
      const trainer::Rollout dirty = trainer::rollout(run.models[i], gs, 0, gs.weeks);
      for (std::size_t w = 0; w <= t; ++w) {
        causal = causal && clean.predictions[w] == dirty.predictions[w];
        ++compared;
      }
    }
  }
  // Training itself: corrupt weeks after t and compare the whole state after tick t.
  environment::Dataset corrupt = ds;
  const std::size_t t = 120;
  for (auto& gs : corrupt.agents) {
    for (std::size_t k = (t + 1) * gs.frame_size(); k < gs.obs.size(); ++k) gs.obs[k] = float(rng.uniform());
    for (std::size_t k = (t + 1) * gs.map_size(); k < gs.fire.size(); ++k) gs.fire[k] = rng.bernoulli(0.5);
  }
  TrainConfig tc = desk_config("proposed", 0, 1);
  tc.reward = exchange::RewardKind::adversarial_max_loss;
  trainer::Trainer ta(tc, ds), tb(tc, corrupt);
  ta.begin_episode();
  tb.begin_episode();
  for (std::size_t k = 0; k <= t; ++k) {
    ta.tick();
    tb.tick();
  }
  bool train_causal = ta.checkpoint() == tb.checkpoint();
  for (std::size_t i = 0; i < ds.agents.size(); ++i) train_causal = train_causal && ta.state(i) == tb.state(i);
  out.note(std::to_string(compared) + " online predictions at weeks <= t (t = 50, 259, 300) after corrupting later "
           "observations: " + (causal ? "bit-identical" : "CHANGED"));
  out.note(std::string("training with exchange (loss-based reward) through tick 120 on data corrupted after week "
                       "120: parameters and states ") + (train_causal ? "bit-identical" : "CHANGED"));
  out.pass = same && causal && train_causal;
  fs::remove_all(a.dir);
  fs::remove_all(b.dir);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0) {
      strict = true;
    } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      std::istringstream ids(argv[++i]);
      for (std::string id; std::getline(ids, id, ',');) only.insert(std::atoi(id.c_str()));
    } else {
      std::cerr << "usage: acceptance [--strict] [--only 1,2,...]\n";
      return 2;
    }
  }
  const auto wanted = [&](int id) { return only.empty() || only.count(id) > 0; };
  const std::size_t episodes = env_size("PYROGRID_ACCEPTANCE_EPISODES", 3);
  const std::size_t sysid_episodes = env_size("PYROGRID_ACCEPTANCE_SYSID_EPISODES", 8);
  const std::size_t seeds = env_size("PYROGRID_ACCEPTANCE_SEEDS", 5);
  const auto t0 = std::chrono::steady_clock::now();
  int failures = 0, ran = 0;
  const auto report = [&](int id, const char* title, const std::function<Outcome()>& check) {
    if (!wanted(id)) return;
    const Outcome o = check();
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << id << ". " << title << "\n";
    for (const auto& d : o.details) std::cout << "         " << d << "\n";
    std::cout << std::flush;
    failures += !o.pass;
    ++ran;
  };

  report(1, "gradient correctness", gradients);
  report(2, "adjoint and oracle equivalence", oracles);
  report(3, "action-matrix constraints", action_constraints);
  report(4, "critic soundness on the two-state chain", critic_soundness);
  const environment::Dataset desk = desk_data(0);
  report(5, "reduction property without exchange", [&] { return reduction(desk); });
  report(6, "schedule ordering", schedule_ordering);
  Comparison cmp;
  if (wanted(7) || wanted(8)) cmp = compare_methods(seeds, episodes, sysid_episodes);
  report(7, "qualitative method ordering on synthetic data", [&] { return ordering(cmp); });
  report(8, "system identification lowers one-step observation error", [&] { return sysid(cmp); });
  report(9, "logistic baseline on decorrelated data", [&] { return logistic_sanity(episodes); });
  report(10, "determinism and causality", [&] { return determinism_causality(desk); });

  std::cout << (ran - failures) << "/" << ran << " criteria passed in " << fmt("%.0f", seconds_since(t0)) << " s\n";
  fs::remove_all(scratch_root());
  return strict && failures ? 1 : 0;
}
