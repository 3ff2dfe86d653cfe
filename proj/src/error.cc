// Copyright 2026 The fwcbf Authors
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

#include "fwcbf/error.h"

namespace fwcbf {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kNegativeRadicand:
      return "NegativeRadicand";
    case ErrorCode::kDegenerateGradient:
      return "DegenerateGradient";
    case ErrorCode::kInvalidManeuver:
      return "InvalidManeuver";
    case ErrorCode::kIncompatibleSafetyKind:
      return "IncompatibleSafetyKind";
    case ErrorCode::kDegenerateRelativeMotion:
      return "DegenerateRelativeMotion";
    case ErrorCode::kNonUniqueMinimizer:
      return "NonUniqueMinimizer";
    case ErrorCode::kInfeasible:
      return "Infeasible";
    case ErrorCode::kIterationLimit:
      return "IterationLimit";
    case ErrorCode::kUnsafeState:
      return "UnsafeState";
    case ErrorCode::kUnsafeStart:
      return "UnsafeStart";
    case ErrorCode::kConfigError:
      return "ConfigError";
  }
  return "Unknown";
}

}  // namespace fwcbf
