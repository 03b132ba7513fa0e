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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rhythmaug/matrix.hpp"

namespace rhythmaug {

// Time-aligned vocoder input: log-mel frames and an F0 track sharing one
// frame grid.
struct FeatureBundle {
  MatrixD mel;             // n_frames x n_mels, natural log of mel energy
  std::vector<double> f0;  // Hz per frame, 0.0 = unvoiced
  double sample_rate = 0.0;
  std::uint32_t hop_length = 0;
  std::uint32_t win_length = 0;

  std::size_t n_frames() const noexcept { return f0.size(); }
  std::size_t n_mels() const noexcept { return mel.cols(); }

  friend bool operator==(const FeatureBundle&, const FeatureBundle&) = default;
};

}  // namespace rhythmaug
