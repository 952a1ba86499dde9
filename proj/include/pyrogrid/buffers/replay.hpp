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
#include <deque>
#include <vector>

#include "pyrogrid/numerics/random.hpp"
#include "pyrogrid/numerics/tensor.hpp"

namespace pyrogrid::buffers {

using numerics::Rng;
using numerics::Tensor;

// One online step: the observation x_t and the recurrent state h_t held just
// before x_t was consumed.
struct TrajectoryEntry {
  Tensor x;            // [C,H,W]
  Tensor h;            // [d_h]
  std::uint64_t tick;  // absolute push counter, strictly increasing
  std::size_t week;    // dataset week of x
};

// T_w consecutive entries, copied out of the buffer.
struct TrajectoryWindow {
  std::vector<Tensor> x;
  std::vector<Tensor> h;
  std::size_t first_week = 0;
  std::uint64_t first_tick = 0;
};

class TrajectoryBuffer {
 public:
  explicit TrajectoryBuffer(std::size_t capacity);

  // Appends, evicting the oldest entry when full. Shapes must match earlier
  // entries and ticks must increase.
  void push(TrajectoryEntry entry);

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const TrajectoryEntry& operator[](std::size_t i) const { return entries_[i]; }
  void clear() { entries_.clear(); }

  // Start positions i whose entries i .. i+span-1 are consecutive in both
  // tick and week, so the window never straddles an episode boundary.
  std::vector<std::size_t> valid_starts(std::size_t span) const;

  // M windows of length `window`, starts drawn uniformly from
  // valid_starts(window + horizon_max). Throws InsufficientData when there
  // are none.
  std::vector<TrajectoryWindow> sample(std::size_t window, std::size_t batch, std::size_t horizon_max,
                                       Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<TrajectoryEntry> entries_;
};

struct Transition {
  Tensor joint_h;       // [N*d_h]
  Tensor action;        // [N,N]
  double reward = 0.0;
  Tensor next_joint_h;  // [N*d_h]
};

class TransitionBuffer {
 public:
  // Pushed actions must be column-stochastic with diagonal `self_weight`
  // (any diagonal when N == 1).
  TransitionBuffer(std::size_t capacity, double self_weight);

  void push(Transition t);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return entries_[i]; }

  // M distinct entries drawn uniformly. Throws InsufficientData if M > size.
  std::vector<Transition> sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  double self_weight_;
  std::deque<Transition> entries_;
};

// Throws RangeViolation unless every column sums to 1 within 1e-9, entries
// are non-negative and the diagonal equals `self_weight` exactly.
void check_action_matrix(const Tensor& a, double self_weight);

}  // namespace pyrogrid::buffers
