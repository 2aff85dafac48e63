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

#include "featforge/error.hpp"

namespace featforge {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kSingleClassDataset: return "SingleClassDataset";
    case ErrorCode::kNonNumericSample: return "NonNumericSample";
    case ErrorCode::kEmptySignal: return "EmptySignal";
    case ErrorCode::kWindowTooLong: return "WindowTooLong";
    case ErrorCode::kSignalTooShort: return "SignalTooShort";
    case ErrorCode::kUnknownWavelet: return "UnknownWavelet";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kZeroEnergy: return "ZeroEnergy";
    case ErrorCode::kAllCandidatesFailed: return "AllCandidatesFailed";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kMethodMismatch: return "MethodMismatch";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kDegenerateMatrix: return "DegenerateMatrix";
    case ErrorCode::kWidthMismatch: return "WidthMismatch";
    case ErrorCode::kProtocolCompositionImpossible: return "ProtocolCompositionImpossible";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kEmptyReport: return "EmptyReport";
    case ErrorCode::kUnknownConfigKey: return "UnknownConfigKey";
    case ErrorCode::kUnsupportedMethod: return "UnsupportedMethod";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kMissingFile:
    case ErrorCode::kMalformedRow:
    case ErrorCode::kSingleClassDataset:
    case ErrorCode::kNonNumericSample:
    case ErrorCode::kEmptySignal:
    case ErrorCode::kWindowTooLong:
    case ErrorCode::kUnknownWavelet:
    case ErrorCode::kProtocolCompositionImpossible:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidSpec:
    case ErrorCode::kUnknownConfigKey:
    case ErrorCode::kUnsupportedMethod:
    case ErrorCode::kKTooLarge:
      return true;
    default:
      return false;
  }
}

}  // namespace featforge
