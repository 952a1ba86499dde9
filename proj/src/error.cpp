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

#include "pyrogrid/error.hpp"

namespace pyrogrid {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::shape: return "ShapeError";
    case Errc::non_scalar_loss: return "NonScalarLoss";
    case Errc::numeric: return "NumericError";
    case Errc::bad_magic: return "BadMagic";
    case Errc::version_mismatch: return "VersionMismatch";
    case Errc::truncated_file: return "TruncatedFile";
    case Errc::range_violation: return "RangeViolation";
    case Errc::empty_input: return "EmptyInput";
    case Errc::split_out_of_range: return "SplitOutOfRange";
    case Errc::empty_train: return "EmptyTrain";
    case Errc::split_mismatch: return "SplitMismatch";
    case Errc::insufficient_data: return "InsufficientData";
    case Errc::missing_ground_truth: return "MissingGroundTruth";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::empty_run: return "EmptyRun";
    case Errc::io: return "IoError";
    case Errc::config: return "ConfigError";
  }
  return "Error";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

}  // namespace pyrogrid
