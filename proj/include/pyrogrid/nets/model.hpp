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
#include <string>
#include <vector>

#include "pyrogrid/numerics/autodiff.hpp"
#include "pyrogrid/numerics/random.hpp"

namespace pyrogrid::nets {

using numerics::Parameter;
using numerics::Rng;
using numerics::Shape;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

// Sizes shared by every network of a run.
struct NetConfig {
  std::size_t agents = 7;
  std::size_t channels = 11;
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t d_enc = 64;
  std::size_t d_h = 64;
  std::size_t horizons = 4;
  std::array<std::size_t, 4> widths{8, 16, 32, 64};
  std::size_t policy_hidden = 128;

  // Throws ConfigError naming the first bad field.
  void validate() const;
  Shape grid_shape() const { return {channels, height, width}; }
};

struct Dense {
  Parameter weight;  // [out, in]
  Parameter bias;    // [out]
};

struct ConvLayer {
  Parameter kernel;  // conv: [out, in, k, k]; deconv: [in, out, k, k]
  Parameter bias;    // [out]
};

struct EncoderParams {
  std::array<ConvLayer, 4> conv;
  Dense proj;  // flattened features -> d_enc
};

struct GruParams {
  Parameter w_z, u_z, b_z;
  Parameter w_r, u_r, b_r;
  Parameter w_h, u_h, b_h;
};

// d_h -> seed grid [widths[3], H/16, W/16] -> four stride-2 deconvolutions.
struct DecoderHead {
  Dense seed;
  std::array<ConvLayer, 4> deconv;
  Shape seed_shape;
};

// Encoder, GRU and observation decoder.
struct SysParams {
  EncoderParams encoder;
  GruParams gru;
  DecoderHead obs;
};

// One independent fire head per horizon.
struct PredParams {
  std::vector<DecoderHead> heads;
};

// Baseline without recurrence: encoding mapped straight to a state vector.
struct StaticParams {
  EncoderParams encoder;
  Dense bridge;  // d_enc -> d_h
  PredParams pred;
};

struct ActorParams {
  Dense hidden;  // N*d_h -> hidden
  Dense out;     // hidden -> N*N logits
};

struct CriticParams {
  Dense hidden;  // N*d_h + N*N -> hidden
  Dense out;     // hidden -> 1
};

// Initialization draws uniform(-sqrt(1/fan_in), sqrt(1/fan_in)) for weights
// and zeros for biases. Every parameter name starts with `prefix`.
SysParams init_sys(const NetConfig& cfg, Rng& rng, const std::string& prefix);
PredParams init_pred(const NetConfig& cfg, Rng& rng, const std::string& prefix);
StaticParams init_static(const NetConfig& cfg, Rng& rng, const std::string& prefix);
ActorParams init_actor(const NetConfig& cfg, Rng& rng, const std::string& prefix);
CriticParams init_critic(const NetConfig& cfg, Rng& rng, const std::string& prefix);

std::vector<Parameter*> parameters(SysParams& p);
std::vector<Parameter*> parameters(PredParams& p);
std::vector<Parameter*> parameters(StaticParams& p);
std::vector<Parameter*> parameters(ActorParams& p);
std::vector<Parameter*> parameters(CriticParams& p);
std::size_t parameter_count(const std::vector<Parameter*>& params);

// Parameters placed on a tape once, so a forward pass that reuses a layer
// many times copies its weights only once. `trainable == false` binds them
// as constants.
struct DenseVars {
  Var weight, bias;
};
struct ConvVars {
  Var kernel, bias;
};
struct EncoderVars {
  std::array<ConvVars, 4> conv;
  DenseVars proj;
};
struct DecoderVars {
  DenseVars seed;
  std::array<ConvVars, 4> deconv;
  Shape seed_shape;
};
struct SysVars {
  EncoderVars encoder;
  numerics::GruWeights gru;
  DecoderVars obs;
};
struct PredVars {
  std::vector<DecoderVars> heads;
};
struct StaticVars {
  EncoderVars encoder;
  DenseVars bridge;
  PredVars pred;
};
struct ActorVars {
  DenseVars hidden, out;
  std::size_t agents = 0;
};
struct CriticVars {
  DenseVars hidden, out;
};

SysVars bind(Tape& tape, SysParams& p, bool trainable = true);
PredVars bind(Tape& tape, PredParams& p, bool trainable = true);
StaticVars bind(Tape& tape, StaticParams& p, bool trainable = true);
ActorVars bind(Tape& tape, ActorParams& p, bool trainable = true);
CriticVars bind(Tape& tape, CriticParams& p, bool trainable = true);

Var encode(Var x, const EncoderVars& enc);
Var decode(Var h, const DecoderVars& head);

struct StateStep {
  Var h;      // h_{t+1} = GRU(h_t, Enc(x_t))
  Var x_hat;  // Decoder0(h_{t+1}), each entry in (0, 1)
};
StateStep advance_state(Var h, Var x, const SysVars& sys);

// [L, H, W] fire probabilities, one grid per horizon.
Var predict_fire(Var h, const PredVars& pred);

// tanh(bridge(Enc(x))), the static model's stand-in for h.
Var static_state(Var x, const StaticVars& st);

// N*N logits; entry (i, j) at i*N + j.
Var actor_logits(Var joint_h, const ActorVars& actor);
Var actor_forward(Var joint_h, const ActorVars& actor, double self_weight);
// q(h, a) for the joint hidden state and a flattened or N x N action matrix.
Var critic_forward(Var joint_h, Var action, const CriticVars& critic);

// Plain-tensor conveniences evaluated on an inference tape.
struct StepResult {
  Tensor h;
  Tensor x_hat;
};
StepResult advance_state(const Tensor& h, const Tensor& x, SysParams& sys);
Tensor predict_fire(const Tensor& h, PredParams& pred);
Tensor encode(const Tensor& x, EncoderParams& enc);

}  // namespace pyrogrid::nets
