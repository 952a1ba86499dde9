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
#include <functional>
#include <string>
#include <vector>

#include "pyrogrid/numerics/tensor.hpp"

namespace pyrogrid::numerics {

// A trainable tensor plus its gradient accumulator and Adam moments.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor initial);

  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;
  std::uint64_t step_count = 0;

  void zero_grad() { grad.fill(0.0); }
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

// What a backward rule sees: the node's output and incoming gradient, its
// inputs' values, and gradient slots for the inputs that need one (null for
// inputs that do not).
struct BackwardArgs {
  const Tensor& out;
  const Tensor& grad_out;
  std::vector<const Tensor*> in;
  std::vector<Tensor*> grad_in;
};

using BackwardFn = std::function<void(BackwardArgs&)>;

// Define-by-run gradient tape. Nodes are appended in evaluation order, which
// is a topological order, so backward() is a single reverse sweep.
class Tape {
 public:
  enum class Mode { train, inference };

  explicit Tape(Mode mode = Mode::train) : mode_(mode) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Gradients reaching this node are added into p.grad by backward(). In
  // inference mode this is the same as constant(p.value).
  Var parameter(Parameter& p);
  Var record(Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  std::size_t size() const { return nodes_.size(); }
  Mode mode() const { return mode_; }

  // Accumulates d(loss)/d(p) into every reachable Parameter. Calling it twice
  // without zeroing adds the gradients twice.
  void backward(Var loss);

 private:
  struct Node {
    Tensor value;
    std::vector<std::uint32_t> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  Mode mode_;
  std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(*this); }

// Differentiable operations. Every op validates shapes and throws ShapeError
// naming the offending dimensions.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);
Var sum(Var a);
Var mean(Var a);
Var reshape(Var a, Shape shape);
Var concat(const std::vector<Var>& parts);  // flattens and joins
Var slice(Var a, std::size_t offset, std::size_t length);  // flat range

Var leaky_relu(Var a, double slope = 0.01);
Var sigmoid(Var a);
Var tanh(Var a);

// y = W x for W [m,n], x [n].
Var matvec(Var weight, Var x);
// y = W x + b.
Var affine(Var weight, Var bias, Var x);
// Adds bias[c] to every pixel of channel c of a [C,H,W] tensor.
Var add_channel_bias(Var x, Var bias);

// Cross-correlation, input [C_in,H,W], kernels [C_out,C_in,k,k].
Var conv2d(Var input, Var kernels, int stride, int padding);
// Adjoint of conv2d, input [C_in,H,W], kernels [C_in,C_out,k,k].
Var conv_transpose2d(Var input, Var kernels, int stride, int padding);

// Pixel-mean squared difference.
Var mse(Var a, Var b);
// Pixel-mean negated binary cross-entropy of probabilities `pred` against a
// binary target, with pred clipped to [clip, 1-clip].
Var bce(const Tensor& target, Var pred, double clip = 1e-7);

// Column-stochastic N x N matrix from N*N logits: diagonal pinned to
// self_weight, off-diagonals of column j get (1 - self_weight) times the
// softmax of logits over the off-diagonal slots of column j. Logit (i, j)
// lives at flat index i*N + j. For N == 1 the result is [[1]].
Var action_matrix(Var logits, std::size_t n, double self_weight);

// Gated recurrent unit:
//   z = sigmoid(W_z x + U_z h + b_z), r = sigmoid(W_r x + U_r h + b_r)
//   c = tanh(W_h x + U_h (r * h) + b_h), h' = (1 - z) * h + z * c
struct GruWeights {
  Var w_z, u_z, b_z;
  Var w_r, u_r, b_r;
  Var w_h, u_h, b_h;
};
Var gru_cell(Var h, Var x, const GruWeights& w);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

// Forward kernels on plain tensors.
Shape conv2d_output_shape(const Shape& input, const Shape& kernels, int stride, int padding);
Shape conv_transpose2d_output_shape(const Shape& input, const Shape& kernels, int stride,
                                    int padding);
Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, int stride, int padding);
Tensor conv_transpose2d_forward(const Tensor& input, const Tensor& kernels, int stride,
                                int padding);

}  // namespace pyrogrid::numerics
