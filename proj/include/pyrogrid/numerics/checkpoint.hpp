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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pyrogrid/numerics/autodiff.hpp"

namespace pyrogrid::numerics {

struct NamedTensor {
  std::string name;
  Tensor value;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

// Binary parameter checkpoint ("PGCK"):
//   magic "PGCK", u16 version = 1, then records until end of file:
//   u16 name length, UTF-8 name, u8 rank, u32 dims[rank], f64 payload.
// All integers and doubles little-endian.
inline constexpr std::uint16_t kCheckpointVersion = 1;

std::vector<char> encode_checkpoint(std::span<const NamedTensor> records);
std::vector<NamedTensor> decode_checkpoint(std::span<const char> bytes);

void save_checkpoint(const std::filesystem::path& path, std::span<const NamedTensor> records);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

std::vector<NamedTensor> snapshot(std::span<Parameter* const> params);
// Copies values by name into params; every param must be present.
void restore(std::span<Parameter* const> params, std::span<const NamedTensor> records);

}  // namespace pyrogrid::numerics
