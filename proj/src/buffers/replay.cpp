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

#include "pyrogrid/buffers/replay.hpp"

#include <cmath>
#include <numeric>

#include "pyrogrid/error.hpp"

namespace pyrogrid::buffers {

TrajectoryBuffer::TrajectoryBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("trajectory buffer capacity must be at least 1");
}

void TrajectoryBuffer::push(TrajectoryEntry entry) {
  if (!entries_.empty()) {
    const TrajectoryEntry& last = entries_.back();
    if (entry.x.shape() != last.x.shape() || entry.h.shape() != last.h.shape()) {
      throw ShapeError("trajectory entry shapes " + numerics::shape_string(entry.x.shape()) + "/" +
                       numerics::shape_string(entry.h.shape()) + " differ from " +
                       numerics::shape_string(last.x.shape()) + "/" + numerics::shape_string(last.h.shape()));
    }
    if (entry.tick <= last.tick) {
      throw Error(Errc::range_violation, "trajectory tick " + std::to_string(entry.tick) +
                                             " does not follow " + std::to_string(last.tick));
    }
  }
  entries_.push_back(std::move(entry));
  if (entries_.size() > capacity_) entries_.pop_front();
}

std::vector<std::size_t> TrajectoryBuffer::valid_starts(std::size_t span) const {
  std::vector<std::size_t> out;
  if (span == 0 || entries_.size() < span) return out;
  // run[i]: length of the consecutive run starting at i.
  std::vector<std::size_t> run(entries_.size(), 1);
  for (std::size_t i = entries_.size() - 1; i-- > 0;) {
    const auto& a = entries_[i];
    const auto& b = entries_[i + 1];
    if (b.tick == a.tick + 1 && b.week == a.week + 1) run[i] = run[i + 1] + 1;
  }
  for (std::size_t i = 0; i + span <= entries_.size(); ++i)
    if (run[i] >= span) out.push_back(i);
  return out;
}

std::vector<TrajectoryWindow> TrajectoryBuffer::sample(std::size_t window, std::size_t batch,
                                                       std::size_t horizon_max, Rng& rng) const {
  if (window == 0) throw ConfigError("trajectory window must be at least 1");
  const std::vector<std::size_t> starts = valid_starts(window + horizon_max);
  if (starts.empty()) {
    throw Error(Errc::insufficient_data, "no run of " + std::to_string(window + horizon_max) +
                                             " consecutive entries among " + std::to_string(size()));
  }
  std::vector<TrajectoryWindow> out;
  out.reserve(batch);
  for (std::size_t m = 0; m < batch; ++m) {
    const std::size_t s = starts[rng.uniform_index(starts.size())];
    TrajectoryWindow w;
    w.first_week = entries_[s].week;
    w.first_tick = entries_[s].tick;
    for (std::size_t k = 0; k < window; ++k) {
      w.x.push_back(entries_[s + k].x);
      w.h.push_back(entries_[s + k].h);
    }
    out.push_back(std::move(w));
  }
  return out;
}

void check_action_matrix(const Tensor& a, double self_weight) {
  if (a.rank() != 2 || a.dim(0) != a.dim(1)) {
    throw ShapeError("action matrix must be square, got " + numerics::shape_string(a.shape()));
  }
  const std::size_t n = a.dim(0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(a.at(i, j) >= 0.0)) throw Error(Errc::range_violation, "action matrix has a negative entry");
      s += a.at(i, j);
    }
    if (std::abs(s - 1.0) > 1e-9) {
      throw Error(Errc::range_violation, "action matrix column " + std::to_string(j) + " sums to " + std::to_string(s));
    }
    if (n > 1 && a.at(j, j) != self_weight) {
      throw Error(Errc::range_violation, "action matrix diagonal " + std::to_string(a.at(j, j)) +
                                             " differs from the self weight");
    }
  }
}

TransitionBuffer::TransitionBuffer(std::size_t capacity, double self_weight)
    : capacity_(capacity), self_weight_(self_weight) {
  if (capacity == 0) throw ConfigError("transition buffer capacity must be at least 1");
}

void TransitionBuffer::push(Transition t) {
  check_action_matrix(t.action, self_weight_);
  if (t.joint_h.shape() != t.next_joint_h.shape()) {
    throw ShapeError("transition states " + numerics::shape_string(t.joint_h.shape()) + " and " +
                     numerics::shape_string(t.next_joint_h.shape()) + " differ");
  }
  if (!entries_.empty() && (t.joint_h.shape() != entries_.back().joint_h.shape() ||
                            t.action.shape() != entries_.back().action.shape())) {
    throw ShapeError("transition shapes differ from earlier entries");
  }
  if (!std::isfinite(t.reward)) throw NumericError("transition reward is not finite");
  entries_.push_back(std::move(t));
  if (entries_.size() > capacity_) entries_.pop_front();
}

std::vector<Transition> TransitionBuffer::sample(std::size_t batch, Rng& rng) const {
  if (batch > entries_.size()) {
    throw Error(Errc::insufficient_data, "batch of " + std::to_string(batch) + " from " +
                                             std::to_string(entries_.size()) + " transitions");
  }
  std::vector<std::size_t> idx(entries_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<Transition> out;
  out.reserve(batch);
  for (std::size_t m = 0; m < batch; ++m) {
    const std::size_t k = m + rng.uniform_index(idx.size() - m);
    std::swap(idx[m], idx[k]);
    out.push_back(entries_[idx[m]]);
  }
  return out;
}

}  // namespace pyrogrid::buffers
