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

#include <stdexcept>
#include <string>
#include <string_view>

namespace pyrogrid {

// Every failure the library reports carries one of these codes. The CLI maps
// the code family onto its exit status.
enum class Errc {
  shape,
  non_scalar_loss,
  numeric,
  bad_magic,
  version_mismatch,
  truncated_file,
  range_violation,
  empty_input,
  split_out_of_range,
  empty_train,
  split_mismatch,
  insufficient_data,
  missing_ground_truth,
  length_mismatch,
  empty_run,
  io,
  config,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& message) : Error(Errc::shape, message) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message) : Error(Errc::numeric, message) {}
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(Errc::config, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(Errc::io, message) {}
};

}  // namespace pyrogrid
