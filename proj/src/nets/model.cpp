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

#include "pyrogrid/nets/model.hpp"

#include <cmath>

#include "pyrogrid/error.hpp"

namespace pyrogrid::nets {
namespace {

constexpr int kEncKernel = 3, kEncStride = 2, kEncPad = 1;
constexpr int kDecKernel = 4, kDecStride = 2, kDecPad = 1;

Tensor uniform_init(Rng& rng, Shape shape, double fan_in) {
  const double bound = std::sqrt(1.0 / fan_in);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
  return t;
}

Dense make_dense(Rng& rng, std::size_t in, std::size_t out, const std::string& name) {
  return {Parameter(name + ".weight", uniform_init(rng, {out, in}, static_cast<double>(in))),
          Parameter(name + ".bias", Tensor({out}))};
}

ConvLayer make_conv(Rng& rng, std::size_t in, std::size_t out, const std::string& name) {
  const std::size_t k = kEncKernel;
  return {Parameter(name + ".kernel", uniform_init(rng, {out, in, k, k}, double(in * k * k))),
          Parameter(name + ".bias", Tensor({out}))};
}

// Each output pixel of a stride-2, k4 deconvolution sees in*(k/s)^2 taps.
ConvLayer make_deconv(Rng& rng, std::size_t in, std::size_t out, const std::string& name) {
  const std::size_t k = kDecKernel;
  const double fan_in = double(in * k * k) / double(kDecStride * kDecStride);
  return {Parameter(name + ".kernel", uniform_init(rng, {in, out, k, k}, fan_in)),
          Parameter(name + ".bias", Tensor({out}))};
}

EncoderParams make_encoder(const NetConfig& cfg, Rng& rng, const std::string& prefix) {
  EncoderParams e;
  std::size_t in = cfg.channels;
  for (std::size_t i = 0; i < 4; ++i) {
    e.conv[i] = make_conv(rng, in, cfg.widths[i], prefix + "conv" + std::to_string(i));
    in = cfg.widths[i];
  }
  const std::size_t flat = cfg.widths[3] * (cfg.height / 16) * (cfg.width / 16);
  e.proj = make_dense(rng, flat, cfg.d_enc, prefix + "proj");
  return e;
}

DecoderHead make_head(const NetConfig& cfg, Rng& rng, std::size_t out_channels,
                      const std::string& prefix) {
  DecoderHead d;
  d.seed_shape = {cfg.widths[3], cfg.height / 16, cfg.width / 16};
  d.seed = make_dense(rng, cfg.d_h, numerics::shape_size(d.seed_shape), prefix + "seed");
  const std::array<std::size_t, 5> chans{cfg.widths[3], cfg.widths[2], cfg.widths[1],
                                         cfg.widths[0], out_channels};
  for (std::size_t i = 0; i < 4; ++i)
    d.deconv[i] = make_deconv(rng, chans[i], chans[i + 1], prefix + "deconv" + std::to_string(i));
  return d;
}

PredParams make_pred(const NetConfig& cfg, Rng& rng, const std::string& prefix) {
  PredParams p;
  for (std::size_t l = 0; l < cfg.horizons; ++l)
    p.heads.push_back(make_head(cfg, rng, 1, prefix + "head" + std::to_string(l) + "."));
  return p;
}

void push(std::vector<Parameter*>& out, Dense& d) {
  out.push_back(&d.weight);
  out.push_back(&d.bias);
}
void push(std::vector<Parameter*>& out, ConvLayer& c) {
  out.push_back(&c.kernel);
  out.push_back(&c.bias);
}
void push(std::vector<Parameter*>& out, EncoderParams& e) {
  for (auto& c : e.conv) push(out, c);
  push(out, e.proj);
}
void push(std::vector<Parameter*>& out, DecoderHead& d) {
  push(out, d.seed);
  for (auto& c : d.deconv) push(out, c);
}

Var put(Tape& t, Parameter& p, bool trainable) {
  return trainable ? t.parameter(p) : t.constant(p.value);
}
DenseVars bind_dense(Tape& t, Dense& d, bool tr) { return {put(t, d.weight, tr), put(t, d.bias, tr)}; }
ConvVars bind_conv(Tape& t, ConvLayer& c, bool tr) { return {put(t, c.kernel, tr), put(t, c.bias, tr)}; }
EncoderVars bind_encoder(Tape& t, EncoderParams& e, bool tr) {
  EncoderVars v;
  for (std::size_t i = 0; i < 4; ++i) v.conv[i] = bind_conv(t, e.conv[i], tr);
  v.proj = bind_dense(t, e.proj, tr);
  return v;
}
DecoderVars bind_head(Tape& t, DecoderHead& d, bool tr) {
  DecoderVars v;
  v.seed = bind_dense(t, d.seed, tr);
  for (std::size_t i = 0; i < 4; ++i) v.deconv[i] = bind_conv(t, d.deconv[i], tr);
  v.seed_shape = d.seed_shape;
  return v;
}

Var dense(Var x, const DenseVars& d) { return numerics::affine(d.weight, d.bias, x); }

}  // namespace

void NetConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError(field + ": " + why);
  };
  if (agents == 0) fail("agents", "must be at least 1");
  if (channels == 0) fail("channels", "must be at least 1");
  if (height == 0 || height % 16 != 0) fail("height", "must be a positive multiple of 16");
  if (width == 0 || width % 16 != 0) fail("width", "must be a positive multiple of 16");
  if (d_enc == 0) fail("d_enc", "must be at least 1");
  if (d_h == 0) fail("d_h", "must be at least 1");
  if (horizons == 0) fail("horizons", "must be at least 1");
  for (std::size_t w : widths)
    if (w == 0) fail("widths", "every width must be at least 1");
  if (policy_hidden == 0) fail("policy_hidden", "must be at least 1");
}

SysParams init_sys(const NetConfig& cfg, Rng& rng, const std::string& prefix) {
  cfg.validate();
  SysParams s;
  s.encoder = make_encoder(cfg, rng, prefix + "encoder.");
  const double fx = double(cfg.d_enc), fh = double(cfg.d_h);
  const std::string g = prefix + "gru.";
  auto gate = [&](const char* n, Parameter& w, Parameter& u, Parameter& b) {
    w = Parameter(g + "w_" + n, uniform_init(rng, {cfg.d_h, cfg.d_enc}, fx));
    u = Parameter(g + "u_" + n, uniform_init(rng, {cfg.d_h, cfg.d_h}, fh));
    b = Parameter(g + "b_" + n, Tensor({cfg.d_h}));
  };
  gate("z", s.gru.w_z, s.gru.u_z, s.gru.b_z);
  gate("r", s.gru.w_r, s.gru.u_r, s.gru.b_r);
  gate("h", s.gru.w_h, s.gru.u_h, s.gru.b_h);
  s.obs = make_head(cfg, rng, cfg.channels, prefix + "obs.");
  return s;
}

PredParams init_pred(const NetConfig& cfg, Rng& rng, const std::string& prefix) {
  cfg.validate();
  return make_pred(cfg, rng, prefix + "fire.");
}

StaticParams init_static(const NetConfig& cfg, Rng& rng, const std::string& prefix) {
  cfg.validate();
  StaticParams s;
  s.encoder = make_encoder(cfg, rng, prefix + "encoder.");
  s.bridge = make_dense(rng, cfg.d_enc, cfg.d_h, prefix + "bridge");
  s.pred = make_pred(cfg, rng, prefix + "fire.");
  return s;
}

ActorParams init_actor(const NetConfig& cfg, Rng& rng, const std::string& prefix) {
  cfg.validate();
  const std::size_t n = cfg.agents;
  return {make_dense(rng, n * cfg.d_h, cfg.policy_hidden, prefix + "actor.hidden"),
          make_dense(rng, cfg.policy_hidden, n * n, prefix + "actor.out")};
}

CriticParams init_critic(const NetConfig& cfg, Rng& rng, const std::string& prefix) {
  cfg.validate();
  const std::size_t n = cfg.agents;
  return {make_dense(rng, n * cfg.d_h + n * n, cfg.policy_hidden, prefix + "critic.hidden"),
          make_dense(rng, cfg.policy_hidden, 1, prefix + "critic.out")};
}

std::vector<Parameter*> parameters(SysParams& p) {
  std::vector<Parameter*> out;
  push(out, p.encoder);
  for (Parameter* q : {&p.gru.w_z, &p.gru.u_z, &p.gru.b_z, &p.gru.w_r, &p.gru.u_r, &p.gru.b_r,
                       &p.gru.w_h, &p.gru.u_h, &p.gru.b_h})
    out.push_back(q);
  push(out, p.obs);
  return out;
}

std::vector<Parameter*> parameters(PredParams& p) {
  std::vector<Parameter*> out;
  for (auto& h : p.heads) push(out, h);
  return out;
}

std::vector<Parameter*> parameters(StaticParams& p) {
  std::vector<Parameter*> out;
  push(out, p.encoder);
  push(out, p.bridge);
  for (auto& h : p.pred.heads) push(out, h);
  return out;
}

std::vector<Parameter*> parameters(ActorParams& p) {
  std::vector<Parameter*> out;
  push(out, p.hidden);
  push(out, p.out);
  return out;
}

std::vector<Parameter*> parameters(CriticParams& p) {
  std::vector<Parameter*> out;
  push(out, p.hidden);
  push(out, p.out);
  return out;
}

std::size_t parameter_count(const std::vector<Parameter*>& params) {
  std::size_t n = 0;
  for (const Parameter* p : params) n += p->value.size();
  return n;
}

SysVars bind(Tape& tape, SysParams& p, bool trainable) {
  SysVars v;
  v.encoder = bind_encoder(tape, p.encoder, trainable);
  auto& g = p.gru;
  v.gru = {put(tape, g.w_z, trainable), put(tape, g.u_z, trainable), put(tape, g.b_z, trainable),
           put(tape, g.w_r, trainable), put(tape, g.u_r, trainable), put(tape, g.b_r, trainable),
           put(tape, g.w_h, trainable), put(tape, g.u_h, trainable), put(tape, g.b_h, trainable)};
  v.obs = bind_head(tape, p.obs, trainable);
  return v;
}

PredVars bind(Tape& tape, PredParams& p, bool trainable) {
  PredVars v;
  for (auto& h : p.heads) v.heads.push_back(bind_head(tape, h, trainable));
  return v;
}

StaticVars bind(Tape& tape, StaticParams& p, bool trainable) {
  return {bind_encoder(tape, p.encoder, trainable), bind_dense(tape, p.bridge, trainable),
          bind(tape, p.pred, trainable)};
}

ActorVars bind(Tape& tape, ActorParams& p, bool trainable) {
  ActorVars v{bind_dense(tape, p.hidden, trainable), bind_dense(tape, p.out, trainable), 0};
  const std::size_t nn = p.out.bias.value.size();
  v.agents = static_cast<std::size_t>(std::lround(std::sqrt(double(nn))));
  return v;
}

CriticVars bind(Tape& tape, CriticParams& p, bool trainable) {
  return {bind_dense(tape, p.hidden, trainable), bind_dense(tape, p.out, trainable)};
}

Var encode(Var x, const EncoderVars& enc) {
  Var f = x;
  for (const ConvVars& c : enc.conv)
    f = numerics::leaky_relu(
        numerics::add_channel_bias(numerics::conv2d(f, c.kernel, kEncStride, kEncPad), c.bias));
  return dense(numerics::reshape(f, {f.value().size()}), enc.proj);
}

Var decode(Var h, const DecoderVars& head) {
  Var f = numerics::reshape(numerics::leaky_relu(dense(h, head.seed)), head.seed_shape);
  for (std::size_t i = 0; i < 4; ++i) {
    const ConvVars& c = head.deconv[i];
    f = numerics::add_channel_bias(numerics::conv_transpose2d(f, c.kernel, kDecStride, kDecPad),
                                   c.bias);
    f = i + 1 < 4 ? numerics::leaky_relu(f) : numerics::sigmoid(f);
  }
  return f;
}

StateStep advance_state(Var h, Var x, const SysVars& sys) {
  Var next = numerics::gru_cell(h, encode(x, sys.encoder), sys.gru);
  return {next, decode(next, sys.obs)};
}

Var predict_fire(Var h, const PredVars& pred) {
  std::vector<Var> maps;
  maps.reserve(pred.heads.size());
  for (const DecoderVars& head : pred.heads) maps.push_back(decode(h, head));
  const Shape& one = maps.front().shape();
  return numerics::reshape(numerics::concat(maps), {maps.size(), one[1], one[2]});
}

Var static_state(Var x, const StaticVars& st) {
  return numerics::tanh(dense(encode(x, st.encoder), st.bridge));
}

Var actor_logits(Var joint_h, const ActorVars& actor) {
  return dense(numerics::leaky_relu(dense(joint_h, actor.hidden)), actor.out);
}

Var actor_forward(Var joint_h, const ActorVars& actor, double self_weight) {
  return numerics::action_matrix(actor_logits(joint_h, actor), actor.agents, self_weight);
}

Var critic_forward(Var joint_h, Var action, const CriticVars& critic) {
  Var in = numerics::concat({joint_h, action});
  return dense(numerics::leaky_relu(dense(in, critic.hidden)), critic.out);
}

StepResult advance_state(const Tensor& h, const Tensor& x, SysParams& sys) {
  Tape tape(Tape::Mode::inference);
  const SysVars v = bind(tape, sys);
  StateStep s = advance_state(tape.constant(h), tape.constant(x), v);
  return {s.h.value(), s.x_hat.value()};
}

Tensor predict_fire(const Tensor& h, PredParams& pred) {
  Tape tape(Tape::Mode::inference);
  const PredVars v = bind(tape, pred);
  return predict_fire(tape.constant(h), v).value();
}

Tensor encode(const Tensor& x, EncoderParams& enc) {
  Tape tape(Tape::Mode::inference);
  return encode(tape.constant(x), bind_encoder(tape, enc, true)).value();
}

}  // namespace pyrogrid::nets
