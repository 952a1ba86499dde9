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

#include "pyrogrid/environment/preprocess.hpp"

#include <algorithm>
#include <limits>
#include <utility>

#include "pyrogrid/error.hpp"

namespace pyrogrid::environment {

WeeklyAggregator::WeeklyAggregator(std::size_t fire_channel, std::size_t days_per_week)
    : fire_channel_(fire_channel), days_per_week_(days_per_week) {
  if (days_per_week == 0) throw ConfigError("days_per_week: must be at least 1");
}

bool WeeklyAggregator::push(const Tensor& day) {
  if (day.rank() != 3) throw ShapeError("daily frame must be [C,H,W], got " + numerics::shape_string(day.shape()));
  if (fire_channel_ >= day.dim(0)) throw ShapeError("fire channel index outside the frame's channels");
  if (days_ == 0) {
    acc_ = day;
  } else {
    if (day.shape() != acc_.shape()) {
      throw ShapeError("daily frame " + numerics::shape_string(day.shape()) + " differs from " +
                       numerics::shape_string(acc_.shape()));
    }
    const std::size_t plane = day.dim(1) * day.dim(2);
    for (std::size_t c = 0; c < day.dim(0); ++c) {
      double* a = acc_.raw() + c * plane;
      const double* d = day.raw() + c * plane;
      if (c == fire_channel_) {
        for (std::size_t i = 0; i < plane; ++i) a[i] = std::max(a[i], d[i]);
      } else {
        for (std::size_t i = 0; i < plane; ++i) a[i] += d[i];
      }
    }
  }
  if (++days_ < days_per_week_) return false;
  const std::size_t plane = acc_.dim(1) * acc_.dim(2);
  const double n = static_cast<double>(days_per_week_);
  for (std::size_t c = 0; c < acc_.dim(0); ++c) {
    if (c == fire_channel_) continue;
    for (std::size_t i = 0; i < plane; ++i) acc_[c * plane + i] /= n;
  }
  weeks_.push_back(std::move(acc_));
  acc_ = Tensor();
  days_ = 0;
  return true;
}

std::vector<Tensor> WeeklyAggregator::take_weeks() { return std::exchange(weeks_, {}); }

Tensor area_resample(const Tensor& frame, std::size_t height, std::size_t width) {
  if (frame.rank() != 3) throw ShapeError("resample expects [C,H,W], got " + numerics::shape_string(frame.shape()));
  const std::size_t c = frame.dim(0), h = frame.dim(1), w = frame.dim(2);
  if (height == 0 || width == 0 || h % height != 0 || w % width != 0) {
    throw ShapeError("cannot area-resample " + std::to_string(h) + "x" + std::to_string(w) + " onto " +
                     std::to_string(height) + "x" + std::to_string(width));
  }
  if (h == height && w == width) return frame;
  const std::size_t fy = h / height, fx = w / width;
  const double inv = 1.0 / double(fy * fx);
  Tensor out({c, height, width});
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x) {
        double s = 0.0;
        for (std::size_t dy = 0; dy < fy; ++dy)
          for (std::size_t dx = 0; dx < fx; ++dx) s += frame.at(k, y * fy + dy, x * fx + dx);
        out.at(k, y, x) = s * inv;
      }
  return out;
}

PreprocessResult preprocess_weekly(std::span<const Tensor> weekly, const PreprocessOptions& opt) {
  if (weekly.empty()) throw DataError(Errc::empty_input, "no weekly frames to preprocess");
  if (opt.train_weeks == 0) throw DataError(Errc::empty_train, "normalization needs at least one train week");
  if (opt.train_weeks > weekly.size()) {
    throw DataError(Errc::split_out_of_range, "train weeks " + std::to_string(opt.train_weeks) +
                                                  " exceed the " + std::to_string(weekly.size()) +
                                                  " weeks available");
  }
  std::vector<Tensor> frames;
  frames.reserve(weekly.size());
  for (const Tensor& w : weekly) frames.push_back(area_resample(w, opt.height, opt.width));
  const std::size_t c = frames.front().dim(0), plane = opt.height * opt.width;
  if (opt.fire_channel >= c) throw ShapeError("fire channel index outside the frame's channels");

  std::vector<double> lo(c, std::numeric_limits<double>::infinity());
  std::vector<double> hi(c, -std::numeric_limits<double>::infinity());
  for (std::size_t t = 0; t < opt.train_weeks; ++t)
    for (std::size_t k = 0; k < c; ++k)
      for (std::size_t i = 0; i < plane; ++i) {
        const double v = frames[t][k * plane + i];
        lo[k] = std::min(lo[k], v);
        hi[k] = std::max(hi[k], v);
      }

  PreprocessResult result;
  for (std::size_t k = 0; k < c; ++k)
    if (!(hi[k] > lo[k])) result.degenerate_channels.push_back(k);

  GridSeries& gs = result.series;
  gs = GridSeries(frames.size(), c, opt.height, opt.width);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const Tensor& f = frames[t];
    if (f.shape() != frames.front().shape()) throw ShapeError("weekly frames differ in shape");
    float* dst = gs.obs.data() + t * gs.frame_size();
    for (std::size_t k = 0; k < c; ++k) {
      const double span = hi[k] - lo[k];
      for (std::size_t i = 0; i < plane; ++i) {
        const double v = f[k * plane + i];
        const double n = span > 0.0 ? std::clamp((v - lo[k]) / span, 0.0, 1.0) : 0.5;
        dst[k * plane + i] = static_cast<float>(n);
      }
    }
    std::uint8_t* fire = gs.fire.data() + t * plane;
    for (std::size_t i = 0; i < plane; ++i)
      fire[i] = f[opt.fire_channel * plane + i] > opt.fire_threshold ? 1 : 0;
  }
  return result;
}

PreprocessResult preprocess(std::span<const Tensor> daily, const PreprocessOptions& opt) {
  WeeklyAggregator agg(opt.fire_channel);
  for (const Tensor& d : daily) agg.push(d);
  const std::vector<Tensor> weeks = agg.take_weeks();
  if (weeks.empty()) throw DataError(Errc::empty_input, "fewer than seven daily frames");
  return preprocess_weekly(weeks, opt);
}

}  // namespace pyrogrid::environment
