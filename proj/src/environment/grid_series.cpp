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

#include "pyrogrid/environment/grid_series.hpp"

#include <bit>
#include <cstring>
#include <iterator>
#include <limits>

#include "detail/byte_io.hpp"
#include "pyrogrid/error.hpp"

namespace pyrogrid::environment {
namespace {

constexpr char kMagic[4] = {'W', 'F', 'G', 'M'};

std::uint32_t narrow_dim(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max())
    throw IoError(std::string("grid series ") + what + " too large for the file format");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<std::string> default_channel_names(std::size_t channels) {
  static const char* const kNames[] = {
      "fire_confidence", "temperature_mean", "temperature_min", "temperature_max",
      "dewpoint",        "precipitation",    "surface_pressure", "sea_level_pressure",
      "wind_u",          "wind_v",           "relative_humidity"};
  std::vector<std::string> out;
  for (std::size_t c = 0; c < channels; ++c)
    out.push_back(c < std::size(kNames) ? kNames[c] : "channel" + std::to_string(c));
  return out;
}

GridSeries::GridSeries(std::size_t t, std::size_t c, std::size_t h, std::size_t w)
    : weeks(t), channels(c), height(h), width(w), obs(t * c * h * w, 0.0f), fire(t * h * w, 0),
      channel_names(default_channel_names(c)) {}

Tensor GridSeries::frame(std::size_t t) const {
  if (t >= weeks) {
    throw DataError(Errc::range_violation,
                    "week " + std::to_string(t) + " outside series of " + std::to_string(weeks));
  }
  Tensor out({channels, height, width});
  const float* src = obs.data() + t * frame_size();
  for (std::size_t i = 0; i < frame_size(); ++i) out[i] = src[i];
  return out;
}

Tensor GridSeries::fire_map(std::size_t t) const {
  if (t >= weeks) {
    throw DataError(Errc::range_violation,
                    "week " + std::to_string(t) + " outside series of " + std::to_string(weeks));
  }
  Tensor out({height, width});
  const std::uint8_t* src = fire.data() + t * map_size();
  for (std::size_t i = 0; i < map_size(); ++i) out[i] = src[i];
  return out;
}

GridSeries GridSeries::slice(std::size_t begin, std::size_t count) const {
  if (begin + count > weeks) {
    throw DataError(Errc::split_out_of_range, "weeks [" + std::to_string(begin) + ", " +
                                                  std::to_string(begin + count) + ") outside series of " +
                                                  std::to_string(weeks));
  }
  GridSeries out;
  out.weeks = count;
  out.channels = channels;
  out.height = height;
  out.width = width;
  out.channel_names = channel_names;
  out.obs.assign(obs.begin() + std::ptrdiff_t(begin * frame_size()),
                 obs.begin() + std::ptrdiff_t((begin + count) * frame_size()));
  out.fire.assign(fire.begin() + std::ptrdiff_t(begin * map_size()),
                  fire.begin() + std::ptrdiff_t((begin + count) * map_size()));
  return out;
}

void GridSeries::validate() const {
  if (obs.size() != weeks * frame_size() || fire.size() != weeks * map_size())
    throw ShapeError("grid series payload does not match its dimensions");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!(obs[i] >= 0.0f && obs[i] <= 1.0f)) {
      throw DataError(Errc::range_violation,
                      "observation value " + std::to_string(obs[i]) + " at flat index " +
                          std::to_string(i) + " outside [0,1]");
    }
  }
  for (std::size_t i = 0; i < fire.size(); ++i) {
    if (fire[i] > 1) {
      throw DataError(Errc::range_violation,
                      "fire byte " + std::to_string(fire[i]) + " at flat index " + std::to_string(i));
    }
  }
}

std::vector<char> encode_grid_series(const GridSeries& gs) {
  std::vector<char> out(std::begin(kMagic), std::end(kMagic));
  out.reserve(22 + gs.obs.size() * 4 + gs.fire.size());
  detail::put_le<std::uint16_t>(out, kGridSeriesVersion);
  detail::put_le(out, narrow_dim(gs.weeks, "T"));
  detail::put_le(out, narrow_dim(gs.channels, "C"));
  detail::put_le(out, narrow_dim(gs.height, "H"));
  detail::put_le(out, narrow_dim(gs.width, "W"));
  for (float v : gs.obs) detail::put_le(out, std::bit_cast<std::uint32_t>(v));
  for (std::uint8_t f : gs.fire) out.push_back(static_cast<char>(f));
  return out;
}

GridSeries decode_grid_series(std::span<const char> bytes) {
  detail::ByteReader in(bytes, "grid series");
  auto magic = in.take(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw DataError(Errc::bad_magic, "not a WFGM grid series");
  const auto version = in.get_le<std::uint16_t>("version");
  if (version != kGridSeriesVersion) {
    throw DataError(Errc::version_mismatch, "grid series version " + std::to_string(version) +
                                                ", expected " + std::to_string(kGridSeriesVersion));
  }
  const std::size_t t = in.get_le<std::uint32_t>("T"), c = in.get_le<std::uint32_t>("C"),
                    h = in.get_le<std::uint32_t>("H"), w = in.get_le<std::uint32_t>("W");
  if (c == 0 || h == 0 || w == 0) throw ShapeError("grid series with a zero C, H or W");
  GridSeries gs(t, c, h, w);
  if (in.remaining() < gs.obs.size() * 4 + gs.fire.size())
    throw DataError(Errc::truncated_file, "grid series payload shorter than its header implies");
  for (float& v : gs.obs) v = std::bit_cast<float>(in.get_le<std::uint32_t>("observations"));
  auto fire = in.take(gs.fire.size(), "fire maps");
  for (std::size_t i = 0; i < gs.fire.size(); ++i) gs.fire[i] = static_cast<std::uint8_t>(fire[i]);
  if (!in.at_end()) throw DataError(Errc::range_violation, "trailing bytes after grid series payload");
  gs.validate();
  return gs;
}

void save_grid_series(const GridSeries& gs, const std::filesystem::path& path) {
  detail::write_file(path, encode_grid_series(gs));
}

GridSeries load_grid_series(const std::filesystem::path& path) {
  return decode_grid_series(detail::read_file(path));
}

std::pair<GridSeries, GridSeries> split(const GridSeries& gs, WeekRange train, WeekRange val) {
  auto range = [](WeekRange r) {
    return "[" + std::to_string(r.begin) + ", " + std::to_string(r.end()) + ")";
  };
  if (train.count == 0) throw DataError(Errc::empty_train, "train split has zero weeks");
  if (train.end() > val.begin) {
    throw DataError(Errc::split_out_of_range,
                    "train " + range(train) + " must end before validation " + range(val) + " begins");
  }
  if (val.end() > gs.weeks) {
    throw DataError(Errc::split_out_of_range,
                    "validation " + range(val) + " exceeds the series length " + std::to_string(gs.weeks));
  }
  return {gs.slice(train.begin, train.count), gs.slice(val.begin, val.count)};
}

std::pair<GridSeries, GridSeries> split(const GridSeries& gs, std::size_t train_weeks,
                                        std::size_t val_weeks) {
  return split(gs, WeekRange{0, train_weeks}, WeekRange{train_weeks, val_weeks});
}

}  // namespace pyrogrid::environment
