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
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pyrogrid/numerics/tensor.hpp"

namespace pyrogrid::environment {

using numerics::Tensor;

inline constexpr std::uint16_t kGridSeriesVersion = 1;

std::vector<std::string> default_channel_names(std::size_t channels);

// Weekly observation stack [T,C,H,W] in [0,1] plus binary fire maps [T,H,W].
// Storage is single precision so files round-trip exactly.
struct GridSeries {
  std::size_t weeks = 0, channels = 0, height = 0, width = 0;
  std::vector<float> obs;
  std::vector<std::uint8_t> fire;
  std::vector<std::string> channel_names;

  GridSeries() = default;
  GridSeries(std::size_t t, std::size_t c, std::size_t h, std::size_t w);

  std::size_t frame_size() const { return channels * height * width; }
  std::size_t map_size() const { return height * width; }

  // [C,H,W] and [H,W] views copied out as doubles.
  Tensor frame(std::size_t t) const;
  Tensor fire_map(std::size_t t) const;

  // Contiguous weeks [begin, begin + count).
  GridSeries slice(std::size_t begin, std::size_t count) const;

  // Throws RangeViolation if an observation leaves [0,1] or a fire byte is
  // not 0/1.
  void validate() const;

  friend bool operator==(const GridSeries&, const GridSeries&) = default;
};

// "WFGM" file: magic, u16 version, u32 T, C, H, W, float32 LE obs, then one
// byte per fire pixel.
std::vector<char> encode_grid_series(const GridSeries& gs);
GridSeries decode_grid_series(std::span<const char> bytes);
void save_grid_series(const GridSeries& gs, const std::filesystem::path& path);
GridSeries load_grid_series(const std::filesystem::path& path);

struct WeekRange {
  std::size_t begin = 0;
  std::size_t count = 0;
  std::size_t end() const { return begin + count; }
};

// Train must be non-empty and end at or before validation begins.
std::pair<GridSeries, GridSeries> split(const GridSeries& gs, WeekRange train, WeekRange val);
// [0, train) and [train, train + val).
std::pair<GridSeries, GridSeries> split(const GridSeries& gs, std::size_t train_weeks,
                                        std::size_t val_weeks);

}  // namespace pyrogrid::environment
