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

#include "pyrogrid/numerics/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <iterator>
#include <limits>
#include <unordered_map>

#include "detail/byte_io.hpp"
#include "pyrogrid/error.hpp"

namespace pyrogrid::numerics {

namespace {

using detail::put_le;

constexpr char kMagic[4] = {'P', 'G', 'C', 'K'};

}  // namespace

std::vector<char> encode_checkpoint(std::span<const NamedTensor> records) {
  std::vector<char> out(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint16_t>(out, kCheckpointVersion);
  for (const auto& r : records) {
    if (r.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw IoError("checkpoint record name too long: " + r.name.substr(0, 64));
    }
    if (r.value.rank() > std::numeric_limits<std::uint8_t>::max()) {
      throw ShapeError("checkpoint record rank too large for " + r.name);
    }
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(r.name.size()));
    out.insert(out.end(), r.name.begin(), r.name.end());
    out.push_back(static_cast<char>(r.value.rank()));
    for (auto d : r.value.shape()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (double v : r.value.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

std::vector<NamedTensor> decode_checkpoint(std::span<const char> bytes) {
  detail::ByteReader in(bytes, "checkpoint");
  auto magic = in.take(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw DataError(Errc::bad_magic, "not a PGCK checkpoint");
  }
  const auto version = in.get_le<std::uint16_t>("version");
  if (version != kCheckpointVersion) {
    throw DataError(Errc::version_mismatch,
                    "checkpoint version " + std::to_string(version) + ", expected " +
                        std::to_string(kCheckpointVersion));
  }
  std::vector<NamedTensor> records;
  while (!in.at_end()) {
    const auto name_len = in.get_le<std::uint16_t>("record name length");
    auto name = in.take(name_len, "record name");
    const auto rank = in.get_le<std::uint8_t>("record rank");
    Shape shape;
    for (std::uint8_t i = 0; i < rank; ++i) shape.push_back(in.get_le<std::uint32_t>("dims"));
    const std::size_t n = shape_size(shape);
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) {
      data[i] = std::bit_cast<double>(in.get_le<std::uint64_t>("payload"));
    }
    records.push_back({std::string(name.begin(), name.end()), Tensor(std::move(shape), std::move(data))});
  }
  return records;
}

void save_checkpoint(const std::filesystem::path& path, std::span<const NamedTensor> records) {
  detail::write_file(path, encode_checkpoint(records));
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(detail::read_file(path));
}

std::vector<NamedTensor> snapshot(std::span<Parameter* const> params) {
  std::vector<NamedTensor> out;
  out.reserve(params.size());
  for (const Parameter* p : params) out.push_back({p->name, p->value});
  return out;
}

void restore(std::span<Parameter* const> params, std::span<const NamedTensor> records) {
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& r : records) by_name[r.name] = &r.value;
  for (Parameter* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw DataError(Errc::range_violation, "checkpoint lacks " + p->name);
    if (it->second->shape() != p->value.shape()) {
      throw ShapeError("checkpoint record " + p->name + " has shape " +
                       shape_string(it->second->shape()) + ", model expects " +
                       shape_string(p->value.shape()));
    }
    p->value = *it->second;
  }
}

}  // namespace pyrogrid::numerics
