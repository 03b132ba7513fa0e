// Copyright 2026 The rhythmaug Authors. All Rights Reserved.
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

#include <stdexcept>
#include <string>
#include <string_view>

namespace rhythmaug {

enum class Errc {
  kNotFound,
  kUnsupportedFormat,
  kEmptyAudio,
  kIoError,
  kParseError,
  kDuplicateId,
  kBadMagic,
  kVersionMismatch,
  kTooShort,
  kInconsistentFrameLength,
  kLagTooLarge,
  kUnstableFrame,
  kTooManyMels,
  kPlanMismatch,
  kShapeMismatch,
  kInsufficientClasses,
  kUnknownAttack,
  kInvalidArgument,
  kConfigError,
};

inline constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kNotFound: return "NotFound";
    case Errc::kUnsupportedFormat: return "UnsupportedFormat";
    case Errc::kEmptyAudio: return "EmptyAudio";
    case Errc::kIoError: return "IoError";
    case Errc::kParseError: return "ParseError";
    case Errc::kDuplicateId: return "DuplicateId";
    case Errc::kBadMagic: return "BadMagic";
    case Errc::kVersionMismatch: return "VersionMismatch";
    case Errc::kTooShort: return "TooShort";
    case Errc::kInconsistentFrameLength: return "InconsistentFrameLength";
    case Errc::kLagTooLarge: return "LagTooLarge";
    case Errc::kUnstableFrame: return "UnstableFrame";
    case Errc::kTooManyMels: return "TooManyMels";
    case Errc::kPlanMismatch: return "PlanMismatch";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kInsufficientClasses: return "InsufficientClasses";
    case Errc::kUnknownAttack: return "UnknownAttack";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

// Every failure in the library is reported as an Error carrying a code and a
// message that names the offending property, e.g. "UnsupportedFormat:
// channels=2".
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace rhythmaug
