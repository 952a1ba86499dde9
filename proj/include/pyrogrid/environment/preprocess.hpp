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
#include <vector>

#include "pyrogrid/environment/grid_series.hpp"

namespace pyrogrid::environment {

// Folds daily raw frames [C,H,W] into weekly frames: max over the week for
// the fire channel, mean for every other channel.
class WeeklyAggregator {
 public:
  explicit WeeklyAggregator(std::size_t fire_channel = 0, std::size_t days_per_week = 7);

  // True when this day completed a week.
  bool push(const Tensor& day);
  std::size_t pending_days() const { return days_; }
  std::vector<Tensor> take_weeks();

 private:
  std::size_t fire_channel_;
  std::size_t days_per_week_;
  std::size_t days_ = 0;
  Tensor acc_;
  std::vector<Tensor> weeks_;
};

// Block means of a [C,H,W] frame onto [C,h,w]; H and W must be multiples of
// h and w.
Tensor area_resample(const Tensor& frame, std::size_t height, std::size_t width);

struct PreprocessOptions {
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t train_weeks = 0;  // weeks used for the normalization statistics
  std::size_t fire_channel = 0;
  double fire_threshold = 0.05;
};

struct PreprocessResult {
  GridSeries series;
  std::vector<std::size_t> degenerate_channels;  // constant over train, set to 0.5
};

// Daily raw frames to a normalized weekly series. Fire targets are
// (resampled weekly confidence > threshold); every channel is min-max scaled
// with train-split statistics and clipped to [0,1].
PreprocessResult preprocess(std::span<const Tensor> daily, const PreprocessOptions& options);

// Same, starting from already aggregated raw weekly frames.
PreprocessResult preprocess_weekly(std::span<const Tensor> weekly, const PreprocessOptions& options);

}  // namespace pyrogrid::environment
