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

#ifndef FWCBF_ERROR_H_
#define FWCBF_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fwcbf {

enum class ErrorCode {
  kInvalidArgument,
  kNegativeRadicand,
  kDegenerateGradient,
  kInvalidManeuver,
  kIncompatibleSafetyKind,
  kDegenerateRelativeMotion,
  kNonUniqueMinimizer,
  kInfeasible,
  kIterationLimit,
  kUnsafeState,
  kUnsafeStart,
  kConfigError,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure in the library is reported through this exception type. The
// code is stable and meant to be switched on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const { return code_; }
  // The message without the code prefix.
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace fwcbf

#endif  // FWCBF_ERROR_H_
