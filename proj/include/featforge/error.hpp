// Copyright 2026 The featforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace featforge {

enum class ErrorCode {
  kMissingFile,
  kMalformedRow,
  kSingleClassDataset,
  kNonNumericSample,
  kEmptySignal,
  kWindowTooLong,
  kSignalTooShort,
  kUnknownWavelet,
  kLengthMismatch,
  kZeroEnergy,
  kAllCandidatesFailed,
  kKTooLarge,
  kMethodMismatch,
  kSingleClass,
  kDegenerateMatrix,
  kWidthMismatch,
  kProtocolCompositionImpossible,
  kInvalidArgument,
  kInvalidSpec,
  kEmptyReport,
  kUnknownConfigKey,
  kUnsupportedMethod,
  kIo,
};

std::string_view to_string(ErrorCode code) noexcept;

// Validation errors are caused by bad user input (files, config, arguments);
// everything else is a runtime failure of the computation itself.
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  // `location` is the 1-based line or row the error refers to.
  Error(ErrorCode code, const std::string& message, std::size_t location)
      : Error(code, message + " (at " + std::to_string(location) + ")") {
    location_ = location;
  }

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> location() const noexcept { return location_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> location_;
};

}  // namespace featforge
