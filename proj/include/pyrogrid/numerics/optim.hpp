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

#include <span>

#include "pyrogrid/numerics/autodiff.hpp"

namespace pyrogrid::numerics {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam update at learning rate lr; increments step_count and
// zeroes the gradient afterwards.
void adam_step(Parameter& param, double lr, const AdamOptions& options = {});
void adam_step(std::span<Parameter* const> params, double lr, const AdamOptions& options = {});

void zero_grad(std::span<Parameter* const> params);

}  // namespace pyrogrid::numerics
