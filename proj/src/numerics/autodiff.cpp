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

#include "pyrogrid/numerics/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pyrogrid/error.hpp"

namespace pyrogrid::numerics {

Parameter::Parameter(std::string n, Tensor initial)
    : name(std::move(n)),
      value(std::move(initial)),
      grad(value.shape()),
      adam_m(value.shape()),
      adam_v(value.shape()) {}

// ---------------------------------------------------------------------------
// Tape

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::parameter(Parameter& p) {
  if (mode_ == Mode::inference) return constant(p.value);
  Node node;
  node.value = p.value;
  node.param = &p;
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::record(Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (&in.tape() != this) throw ShapeError("operand belongs to a different tape");
    node.inputs.push_back(in.id());
    node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (node.requires_grad && mode_ == Mode::train) node.backward = std::move(backward);
  node.requires_grad = node.requires_grad && mode_ == Mode::train;
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

void Tape::backward(Var loss) {
  const Node& root = nodes_[loss.id()];
  if (root.value.size() != 1) {
    throw Error(Errc::non_scalar_loss,
                "backward() needs a scalar loss, got " + shape_string(root.value.shape()));
  }
  std::vector<Tensor> grads(loss.id() + 1);
  grads[loss.id()] = Tensor::filled(root.value.shape(), 1.0);

  for (std::int64_t i = loss.id(); i >= 0; --i) {
    Tensor& g = grads[static_cast<std::size_t>(i)];
    if (g.empty()) continue;
    Node& node = nodes_[static_cast<std::size_t>(i)];
    if (node.param != nullptr) {
      double* dst = node.param->grad.raw();
      for (std::size_t k = 0; k < g.size(); ++k) dst[k] += g[k];
    }
    if (node.backward) {
      BackwardArgs args{node.value, g, {}, {}};
      args.in.reserve(node.inputs.size());
      args.grad_in.reserve(node.inputs.size());
      for (auto in : node.inputs) {
        args.in.push_back(&nodes_[in].value);
        if (nodes_[in].requires_grad) {
          if (grads[in].empty()) grads[in] = Tensor(nodes_[in].value.shape());
          args.grad_in.push_back(&grads[in]);
        } else {
          args.grad_in.push_back(nullptr);
        }
      }
      node.backward(args);
    }
    g = Tensor();
  }
}

// ---------------------------------------------------------------------------
// Elementwise and structural ops

namespace {

void require_same(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": operand shapes " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()) + " differ");
  }
}

template <class F>
Tensor map(const Tensor& a, F f) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

void accumulate(Tensor* dst, const Tensor& src) {
  if (dst == nullptr) return;
  for (std::size_t i = 0; i < src.size(); ++i) (*dst)[i] += src[i];
}

}  // namespace

Var add(Var a, Var b) {
  require_same(a, b, "add");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return a.tape().record(std::move(out), {a, b}, [](BackwardArgs& g) {
    accumulate(g.grad_in[0], g.grad_out);
    accumulate(g.grad_in[1], g.grad_out);
  });
}

Var sub(Var a, Var b) {
  require_same(a, b, "sub");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return a.tape().record(std::move(out), {a, b}, [](BackwardArgs& g) {
    accumulate(g.grad_in[0], g.grad_out);
    if (g.grad_in[1]) {
      for (std::size_t i = 0; i < g.grad_out.size(); ++i) (*g.grad_in[1])[i] -= g.grad_out[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same(a, b, "mul");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return a.tape().record(std::move(out), {a, b}, [](BackwardArgs& g) {
    const Tensor& av = *g.in[0];
    const Tensor& bv = *g.in[1];
    if (g.grad_in[0]) {
      for (std::size_t i = 0; i < av.size(); ++i) (*g.grad_in[0])[i] += g.grad_out[i] * bv[i];
    }
    if (g.grad_in[1]) {
      for (std::size_t i = 0; i < av.size(); ++i) (*g.grad_in[1])[i] += g.grad_out[i] * av[i];
    }
  });
}

Var scale(Var a, double factor) {
  Tensor out = map(a.value(), [factor](double v) { return v * factor; });
  return a.tape().record(std::move(out), {a}, [factor](BackwardArgs& g) {
    for (std::size_t i = 0; i < g.grad_out.size(); ++i) (*g.grad_in[0])[i] += factor * g.grad_out[i];
  });
}

Var add_scalar(Var a, double offset) {
  Tensor out = map(a.value(), [offset](double v) { return v + offset; });
  return a.tape().record(std::move(out), {a},
                         [](BackwardArgs& g) { accumulate(g.grad_in[0], g.grad_out); });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return a.tape().record(Tensor::scalar(s), {a}, [](BackwardArgs& g) {
    const double d = g.grad_out[0];
    for (double& v : g.grad_in[0]->data()) v += d;
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  return scale(sum(a), 1.0 / n);
}

Var reshape(Var a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return a.tape().record(std::move(out), {a},
                         [](BackwardArgs& g) { accumulate(g.grad_in[0], g.grad_out); });
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  std::vector<double> data;
  for (const Var& p : parts) {
    const auto v = p.value().data();
    data.insert(data.end(), v.begin(), v.end());
  }
  const std::size_t total = data.size();
  return parts.front().tape().record(Tensor({total}, std::move(data)), parts, [](BackwardArgs& g) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < g.in.size(); ++k) {
      const std::size_t n = g.in[k]->size();
      if (g.grad_in[k]) {
        for (std::size_t i = 0; i < n; ++i) (*g.grad_in[k])[i] += g.grad_out[offset + i];
      }
      offset += n;
    }
  });
}

Var slice(Var a, std::size_t offset, std::size_t length) {
  if (length == 0 || offset + length > a.value().size()) {
    throw ShapeError("slice [" + std::to_string(offset) + ", " + std::to_string(offset + length) +
                     ") out of range for " + shape_string(a.shape()));
  }
  const auto src = a.value().data();
  std::vector<double> data(src.begin() + static_cast<std::ptrdiff_t>(offset),
                           src.begin() + static_cast<std::ptrdiff_t>(offset + length));
  return a.tape().record(Tensor({length}, std::move(data)), {a}, [offset](BackwardArgs& g) {
    for (std::size_t i = 0; i < g.grad_out.size(); ++i) (*g.grad_in[0])[offset + i] += g.grad_out[i];
  });
}

Var leaky_relu(Var a, double slope) {
  Tensor out = map(a.value(), [slope](double v) { return v > 0.0 ? v : slope * v; });
  return a.tape().record(std::move(out), {a}, [slope](BackwardArgs& g) {
    const Tensor& x = *g.in[0];
    for (std::size_t i = 0; i < x.size(); ++i) {
      (*g.grad_in[0])[i] += g.grad_out[i] * (x[i] > 0.0 ? 1.0 : slope);
    }
  });
}

Var sigmoid(Var a) {
  Tensor out = map(a.value(), [](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
  return a.tape().record(std::move(out), {a}, [](BackwardArgs& g) {
    for (std::size_t i = 0; i < g.out.size(); ++i) {
      const double s = g.out[i];
      (*g.grad_in[0])[i] += g.grad_out[i] * s * (1.0 - s);
    }
  });
}

Var tanh(Var a) {
  Tensor out = map(a.value(), [](double v) { return std::tanh(v); });
  return a.tape().record(std::move(out), {a}, [](BackwardArgs& g) {
    for (std::size_t i = 0; i < g.out.size(); ++i) {
      const double t = g.out[i];
      (*g.grad_in[0])[i] += g.grad_out[i] * (1.0 - t * t);
    }
  });
}

Var matvec(Var weight, Var x) {
  const Tensor& w = weight.value();
  const Tensor& xv = x.value();
  if (w.rank() != 2 || xv.size() != w.dim(1)) {
    throw ShapeError("matvec: weight " + shape_string(w.shape()) + " with input " +
                     shape_string(xv.shape()));
  }
  const std::size_t m = w.dim(0), n = w.dim(1);
  Tensor out({m});
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = w.raw() + i * n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * xv[j];
    out[i] = s;
  }
  return weight.tape().record(std::move(out), {weight, x}, [m, n](BackwardArgs& g) {
    const Tensor& w = *g.in[0];
    const Tensor& xv = *g.in[1];
    if (g.grad_in[0]) {
      double* dw = g.grad_in[0]->raw();
      for (std::size_t i = 0; i < m; ++i) {
        const double go = g.grad_out[i];
        if (go == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) dw[i * n + j] += go * xv[j];
      }
    }
    if (g.grad_in[1]) {
      double* dx = g.grad_in[1]->raw();
      for (std::size_t i = 0; i < m; ++i) {
        const double go = g.grad_out[i];
        const double* row = w.raw() + i * n;
        for (std::size_t j = 0; j < n; ++j) dx[j] += go * row[j];
      }
    }
  });
}

Var affine(Var weight, Var bias, Var x) {
  Var y = matvec(weight, x);
  return add(y, bias);
}

Var add_channel_bias(Var x, Var bias) {
  const Tensor& xv = x.value();
  if (xv.rank() != 3 || bias.value().size() != xv.dim(0)) {
    throw ShapeError("add_channel_bias: input " + shape_string(xv.shape()) + " with bias " +
                     shape_string(bias.shape()));
  }
  const std::size_t c = xv.dim(0), plane = xv.dim(1) * xv.dim(2);
  Tensor out = xv;
  for (std::size_t k = 0; k < c; ++k) {
    const double b = bias.value()[k];
    for (std::size_t i = 0; i < plane; ++i) out[k * plane + i] += b;
  }
  return x.tape().record(std::move(out), {x, bias}, [c, plane](BackwardArgs& g) {
    accumulate(g.grad_in[0], g.grad_out);
    if (g.grad_in[1]) {
      for (std::size_t k = 0; k < c; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < plane; ++i) s += g.grad_out[k * plane + i];
        (*g.grad_in[1])[k] += s;
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Convolution kernels

namespace {

// Geometry of a cross-correlation from a [ci,hi,wi] "fine" grid to a
// [co,ho,wo] "coarse" grid with kernels [co,ci,k,k]. conv2d runs it forwards;
// conv_transpose2d runs its adjoint (coarse to fine).
struct ConvGeom {
  std::size_t ci, hi, wi;
  std::size_t co, ho, wo;
  std::size_t k;
  std::ptrdiff_t stride, pad;
};

// Patch matrix of the fine grid: row p = oy*wo + ox holds the ci*k*k inputs
// seen by coarse position p, in kernel order (c, ky, kx); zero outside.
void im2col(const double* fine, double* col, const ConvGeom& g) {
  const std::size_t q_len = g.ci * g.k * g.k;
  for (std::size_t oy = 0; oy < g.ho; ++oy) {
    for (std::size_t ox = 0; ox < g.wo; ++ox) {
      double* row = col + (oy * g.wo + ox) * q_len;
      for (std::size_t c = 0; c < g.ci; ++c) {
        const double* plane = fine + c * g.hi * g.wi;
        for (std::size_t ky = 0; ky < g.k; ++ky) {
          const std::ptrdiff_t iy = std::ptrdiff_t(oy) * g.stride - g.pad + std::ptrdiff_t(ky);
          const bool row_ok = iy >= 0 && iy < std::ptrdiff_t(g.hi);
          for (std::size_t kx = 0; kx < g.k; ++kx) {
            const std::ptrdiff_t ix = std::ptrdiff_t(ox) * g.stride - g.pad + std::ptrdiff_t(kx);
            *row++ = row_ok && ix >= 0 && ix < std::ptrdiff_t(g.wi) ? plane[iy * std::ptrdiff_t(g.wi) + ix] : 0.0;
          }
        }
      }
    }
  }
}

// Adds a patch matrix back onto the fine grid; adjoint of im2col.
void col2im(const double* col, double* fine, const ConvGeom& g) {
  for (std::size_t oy = 0; oy < g.ho; ++oy) {
    for (std::size_t ox = 0; ox < g.wo; ++ox) {
      const double* row = col + (oy * g.wo + ox) * g.ci * g.k * g.k;
      for (std::size_t c = 0; c < g.ci; ++c) {
        double* plane = fine + c * g.hi * g.wi;
        for (std::size_t ky = 0; ky < g.k; ++ky) {
          const std::ptrdiff_t iy = std::ptrdiff_t(oy) * g.stride - g.pad + std::ptrdiff_t(ky);
          const bool row_ok = iy >= 0 && iy < std::ptrdiff_t(g.hi);
          for (std::size_t kx = 0; kx < g.k; ++kx, ++row) {
            const std::ptrdiff_t ix = std::ptrdiff_t(ox) * g.stride - g.pad + std::ptrdiff_t(kx);
            if (row_ok && ix >= 0 && ix < std::ptrdiff_t(g.wi)) plane[iy * std::ptrdiff_t(g.wi) + ix] += *row;
          }
        }
      }
    }
  }
}

std::vector<double>& scratch(std::size_t size) {
  thread_local std::vector<double> buf;
  buf.assign(size, 0.0);
  return buf;
}

double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void axpy(double* y, const double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

// coarse[o] += sum_c K[o,c] * fine[c] (windowed)
void correlate(const double* fine, const double* kernels, double* coarse, const ConvGeom& g) {
  const std::size_t q_len = g.ci * g.k * g.k, p_len = g.ho * g.wo;
  std::vector<double>& col = scratch(p_len * q_len);
  im2col(fine, col.data(), g);
  for (std::size_t o = 0; o < g.co; ++o)
    for (std::size_t p = 0; p < p_len; ++p) coarse[o * p_len + p] += dot(kernels + o * q_len, col.data() + p * q_len, q_len);
}

// fine[c] += sum_o K[o,c] * coarse[o] (scattered); adjoint of correlate.
void scatter(const double* coarse, const double* kernels, double* fine, const ConvGeom& g) {
  const std::size_t q_len = g.ci * g.k * g.k, p_len = g.ho * g.wo;
  std::vector<double>& col = scratch(p_len * q_len);
  for (std::size_t p = 0; p < p_len; ++p)
    for (std::size_t o = 0; o < g.co; ++o) axpy(col.data() + p * q_len, kernels + o * q_len, coarse[o * p_len + p], q_len);
  col2im(col.data(), fine, g);
}

// dK[o,c] += sum coarse[o] * fine[c] (windowed)
void kernel_grad(const double* coarse, const double* fine, double* dkernels, const ConvGeom& g) {
  const std::size_t q_len = g.ci * g.k * g.k, p_len = g.ho * g.wo;
  std::vector<double>& col = scratch(p_len * q_len);
  im2col(fine, col.data(), g);
  for (std::size_t o = 0; o < g.co; ++o)
    for (std::size_t p = 0; p < p_len; ++p) axpy(dkernels + o * q_len, col.data() + p * q_len, coarse[o * p_len + p], q_len);
}

void check_conv_args(const Shape& input, const Shape& kernels, int stride, int padding,
                     const char* op) {
  if (input.size() != 3 || kernels.size() != 4 || kernels[2] != kernels[3]) {
    throw ShapeError(std::string(op) + ": input " + shape_string(input) + ", kernels " +
                     shape_string(kernels));
  }
  if (stride < 1 || padding < 0) {
    throw ShapeError(std::string(op) + ": stride " + std::to_string(stride) + ", padding " +
                     std::to_string(padding));
  }
}

}  // namespace

Shape conv2d_output_shape(const Shape& input, const Shape& kernels, int stride, int padding) {
  check_conv_args(input, kernels, stride, padding, "conv2d");
  if (kernels[1] != input[0]) {
    throw ShapeError("conv2d: kernels " + shape_string(kernels) + " expect " +
                     std::to_string(kernels[1]) + " input channels, input " + shape_string(input));
  }
  const auto k = static_cast<std::ptrdiff_t>(kernels[2]);
  const auto hp = static_cast<std::ptrdiff_t>(input[1]) + 2 * padding;
  const auto wp = static_cast<std::ptrdiff_t>(input[2]) + 2 * padding;
  if (k > hp || k > wp) {
    throw ShapeError("conv2d: kernel size " + std::to_string(k) + " exceeds padded input " +
                     shape_string(input));
  }
  return {kernels[0], static_cast<std::size_t>((hp - k) / stride + 1),
          static_cast<std::size_t>((wp - k) / stride + 1)};
}

Shape conv_transpose2d_output_shape(const Shape& input, const Shape& kernels, int stride,
                                    int padding) {
  check_conv_args(input, kernels, stride, padding, "conv_transpose2d");
  if (kernels[0] != input[0]) {
    throw ShapeError("conv_transpose2d: kernels " + shape_string(kernels) + " expect " +
                     std::to_string(kernels[0]) + " input channels, input " + shape_string(input));
  }
  const auto k = static_cast<std::ptrdiff_t>(kernels[2]);
  const auto h = (static_cast<std::ptrdiff_t>(input[1]) - 1) * stride - 2 * padding + k;
  const auto w = (static_cast<std::ptrdiff_t>(input[2]) - 1) * stride - 2 * padding + k;
  if (h < 1 || w < 1) {
    throw ShapeError("conv_transpose2d: empty output for input " + shape_string(input));
  }
  return {kernels[1], static_cast<std::size_t>(h), static_cast<std::size_t>(w)};
}

namespace {
ConvGeom conv_geom(const Shape& fine, const Shape& coarse, std::size_t k, int stride, int pad) {
  return {fine[0], fine[1], fine[2], coarse[0], coarse[1], coarse[2], k, stride, pad};
}
}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, int stride, int padding) {
  Tensor out(conv2d_output_shape(input.shape(), kernels.shape(), stride, padding));
  correlate(input.raw(), kernels.raw(), out.raw(),
            conv_geom(input.shape(), out.shape(), kernels.dim(2), stride, padding));
  return out;
}

Tensor conv_transpose2d_forward(const Tensor& input, const Tensor& kernels, int stride,
                                int padding) {
  Tensor out(conv_transpose2d_output_shape(input.shape(), kernels.shape(), stride, padding));
  scatter(input.raw(), kernels.raw(), out.raw(),
          conv_geom(out.shape(), input.shape(), kernels.dim(2), stride, padding));
  return out;
}

Var conv2d(Var input, Var kernels, int stride, int padding) {
  Tensor out = conv2d_forward(input.value(), kernels.value(), stride, padding);
  const ConvGeom geom =
      conv_geom(input.shape(), out.shape(), kernels.value().dim(2), stride, padding);
  return input.tape().record(std::move(out), {input, kernels}, [geom](BackwardArgs& g) {
    if (g.grad_in[0]) scatter(g.grad_out.raw(), g.in[1]->raw(), g.grad_in[0]->raw(), geom);
    if (g.grad_in[1]) kernel_grad(g.grad_out.raw(), g.in[0]->raw(), g.grad_in[1]->raw(), geom);
  });
}

Var conv_transpose2d(Var input, Var kernels, int stride, int padding) {
  Tensor out = conv_transpose2d_forward(input.value(), kernels.value(), stride, padding);
  const ConvGeom geom =
      conv_geom(out.shape(), input.shape(), kernels.value().dim(2), stride, padding);
  return input.tape().record(std::move(out), {input, kernels}, [geom](BackwardArgs& g) {
    if (g.grad_in[0]) correlate(g.grad_out.raw(), g.in[1]->raw(), g.grad_in[0]->raw(), geom);
    if (g.grad_in[1]) kernel_grad(g.in[0]->raw(), g.grad_out.raw(), g.grad_in[1]->raw(), geom);
  });
}

// ---------------------------------------------------------------------------
// Losses

Var mse(Var a, Var b) {
  require_same(a, b, "mse");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const double n = static_cast<double>(av.size());
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    s += d * d;
  }
  return a.tape().record(Tensor::scalar(s / n), {a, b}, [n](BackwardArgs& g) {
    const Tensor& av = *g.in[0];
    const Tensor& bv = *g.in[1];
    const double k = 2.0 * g.grad_out[0] / n;
    for (std::size_t i = 0; i < av.size(); ++i) {
      const double d = k * (av[i] - bv[i]);
      if (g.grad_in[0]) (*g.grad_in[0])[i] += d;
      if (g.grad_in[1]) (*g.grad_in[1])[i] -= d;
    }
  });
}

Var bce(const Tensor& target, Var pred, double clip) {
  const Tensor& p = pred.value();
  if (target.shape() != p.shape()) {
    throw ShapeError("bce: target " + shape_string(target.shape()) + " vs prediction " +
                     shape_string(p.shape()));
  }
  const double n = static_cast<double>(p.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], clip, 1.0 - clip);
    const double t = target[i];
    if (t != 0.0) s -= t * std::log(q);
    if (t != 1.0) s -= (1.0 - t) * std::log(1.0 - q);
  }
  return pred.tape().record(Tensor::scalar(s / n), {pred},
                            [target, n, clip](BackwardArgs& g) {
                              const Tensor& p = *g.in[0];
                              const double k = g.grad_out[0] / n;
                              for (std::size_t i = 0; i < p.size(); ++i) {
                                if (p[i] < clip || p[i] > 1.0 - clip) continue;
                                const double t = target[i];
                                (*g.grad_in[0])[i] += k * (-(t / p[i]) + (1.0 - t) / (1.0 - p[i]));
                              }
                            });
}

Var action_matrix(Var logits, std::size_t n, double self_weight) {
  const Tensor& l = logits.value();
  if (l.size() != n * n || n == 0) {
    throw ShapeError("action_matrix: " + std::to_string(n * n) + " logits expected, got " +
                     shape_string(l.shape()));
  }
  if (n > 1 && !(self_weight > 0.0 && self_weight < 1.0)) {
    throw Error(Errc::config, "action_matrix: self weight must lie in (0, 1), got " +
                                  std::to_string(self_weight));
  }
  Tensor out({n, n});
  if (n == 1) {
    out[0] = 1.0;
    return logits.tape().record(std::move(out), {logits}, [](BackwardArgs&) {});
  }
  const double rest = 1.0 - self_weight;
  for (std::size_t j = 0; j < n; ++j) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (i != j) top = std::max(top, l[i * n + j]);
    }
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != j) z += std::exp(l[i * n + j] - top);
    }
    for (std::size_t i = 0; i < n; ++i) {
      out[i * n + j] = (i == j) ? self_weight : rest * std::exp(l[i * n + j] - top) / z;
    }
  }
  return logits.tape().record(std::move(out), {logits}, [n, rest](BackwardArgs& g) {
    for (std::size_t j = 0; j < n; ++j) {
      // softmax Jacobian on the off-diagonal slots of column j
      double weighted = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != j) weighted += (g.out[i * n + j] / rest) * g.grad_out[i * n + j];
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (i == j) continue;
        const double s = g.out[i * n + j] / rest;
        (*g.grad_in[0])[i * n + j] += rest * s * (g.grad_out[i * n + j] - weighted);
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Recurrent cell

Var gru_cell(Var h, Var x, const GruWeights& w) {
  const auto d_h = h.value().size();
  if (w.u_z.value().rank() != 2 || w.u_z.value().dim(0) != d_h || w.u_z.value().dim(1) != d_h) {
    throw ShapeError("gru_cell: state " + shape_string(h.shape()) + " with U_z " +
                     shape_string(w.u_z.shape()));
  }
  Var z = sigmoid(add(add(matvec(w.w_z, x), matvec(w.u_z, h)), w.b_z));
  Var r = sigmoid(add(add(matvec(w.w_r, x), matvec(w.u_r, h)), w.b_r));
  Var candidate = tanh(add(add(matvec(w.w_h, x), matvec(w.u_h, mul(r, h))), w.b_h));
  return add(h, mul(z, sub(candidate, h)));
}

}  // namespace pyrogrid::numerics
