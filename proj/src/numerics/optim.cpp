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

#include "pyrogrid/numerics/optim.hpp"

#include <cmath>

namespace pyrogrid::numerics {

void adam_step(Parameter& p, double lr, const AdamOptions& o) {
  p.step_count += 1;
  const double t = static_cast<double>(p.step_count);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);
  double* value = p.value.raw();
  double* grad = p.grad.raw();
  double* m = p.adam_m.raw();
  double* v = p.adam_v.raw();
  for (std::size_t i = 0; i < p.value.size(); ++i) {
    const double g = grad[i];
    m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g;
    v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g * g;
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    value[i] -= lr * m_hat / (std::sqrt(v_hat) + o.eps);
    grad[i] = 0.0;
  }
}

void adam_step(std::span<Parameter* const> params, double lr, const AdamOptions& options) {
  for (Parameter* p : params) adam_step(*p, lr, options);
}

void zero_grad(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace pyrogrid::numerics
