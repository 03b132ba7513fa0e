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

// Rhythm perturbation: the feature timeline is cut into random-length
// segments and every segment is time-resampled by its own random factor.
// Mel bands and F0 values are interpolated along time only, so frequency
// content is left as it was.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rhythmaug/audio_io.hpp"
#include "rhythmaug/dsp.hpp"
#include "rhythmaug/error.hpp"
#include "rhythmaug/feature_bundle.hpp"

namespace rhythmaug {

// splitmix64. Each draw advances the state by the golden-ratio increment
// 0x9E3779B97F4A7C15 and mixes it; uniform reals use the high 53 bits.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi].
  std::size_t uniform_int(std::size_t lo, std::size_t hi) noexcept {
    const double span = static_cast<double>(hi - lo + 1);
    const auto offset = static_cast<std::size_t>(uniform01() * span);
    return std::min(lo + offset, hi);
  }

  // Uniform real in [lo, hi).
  double uniform_real(double lo, double hi) noexcept { return lo + uniform01() * (hi - lo); }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline SplitMix64 utterance_rng(std::uint64_t seed, std::string_view utt_id) noexcept {
  return SplitMix64(seed ^ fnv1a64(utt_id));
}

struct RpmConfig {
  std::size_t seg_min = 19;
  std::size_t seg_max = 32;
  double factor_lo = 0.5;
  double factor_hi = 1.5;
  std::uint64_t seed = 0;
  // Resampled F0 values below this are unvoiced-voiced blends and snap to 0.
  double f0_min = 50.0;

  void validate() const {
    if (!(seg_min >= 1 && seg_min <= seg_max)) {
      throw Error(Errc::kConfigError, "rpm requires 1 <= seg_min <= seg_max");
    }
    if (!(factor_lo > 0.0 && factor_lo <= factor_hi)) {
      throw Error(Errc::kConfigError, "rpm requires 0 < factor_lo <= factor_hi");
    }
  }
};

struct Segment {
  std::size_t start = 0;
  std::size_t length = 0;
  double factor = 1.0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct SegmentPlan {
  std::vector<Segment> segments;

  std::size_t input_frames() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.length;
    return n;
  }

  // Sum of max(1, round(length * factor)).
  std::size_t output_frames() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += resampled_length(s.length, s.factor);
    return n;
  }

  bool tiles(std::size_t total_frames) const {
    std::size_t next = 0;
    for (const auto& s : segments) {
      if (s.start != next || s.length == 0) return false;
      next += s.length;
    }
    return next == total_frames && (total_frames == 0 || !segments.empty());
  }

  friend bool operator==(const SegmentPlan&, const SegmentPlan&) = default;
};

// Per segment: length ~ U{seg_min..seg_max} then factor ~ U[factor_lo,
// factor_hi). The last segment is clipped to the frames that remain and keeps
// its own factor draw.
inline SegmentPlan sample_segment_plan(std::size_t total_frames, const RpmConfig& cfg,
                                       SplitMix64& rng) {
  cfg.validate();
  if (total_frames == 0) throw Error(Errc::kInvalidArgument, "cannot segment an empty timeline");
  SegmentPlan plan;
  std::size_t start = 0;
  while (start < total_frames) {
    std::size_t length = rng.uniform_int(cfg.seg_min, cfg.seg_max);
    const double factor = rng.uniform_real(cfg.factor_lo, cfg.factor_hi);
    length = std::min(length, total_frames - start);
    plan.segments.push_back({start, length, factor});
    start += length;
  }
  return plan;
}

inline FeatureBundle apply_plan(const FeatureBundle& bundle, const SegmentPlan& plan,
                                double f0_min = RpmConfig{}.f0_min) {
  if (bundle.mel.rows() != bundle.f0.size()) {
    throw Error(Errc::kShapeMismatch, "mel and f0 frame counts differ");
  }
  if (!plan.tiles(bundle.n_frames())) {
    throw Error(Errc::kPlanMismatch, "plan covers " + std::to_string(plan.input_frames()) +
                                         " frames, bundle has " +
                                         std::to_string(bundle.n_frames()));
  }
  const std::size_t n_mels = bundle.n_mels();
  FeatureBundle out;
  out.sample_rate = bundle.sample_rate;
  out.hop_length = bundle.hop_length;
  out.win_length = bundle.win_length;
  out.mel = MatrixD(plan.output_frames(), n_mels);
  out.f0.reserve(out.mel.rows());

  std::size_t row = 0;
  for (const Segment& seg : plan.segments) {
    MatrixD block(seg.length, n_mels);
    for (std::size_t t = 0; t < seg.length; ++t) {
      const auto src = bundle.mel.row(seg.start + t);
      std::copy(src.begin(), src.end(), block.row(t).begin());
    }
    const MatrixD stretched = linear_resample(block, seg.factor);
    for (std::size_t t = 0; t < stretched.rows(); ++t, ++row) {
      const auto src = stretched.row(t);
      std::copy(src.begin(), src.end(), out.mel.row(row).begin());
    }

    const std::span<const double> f0_slice(bundle.f0.data() + seg.start, seg.length);
    for (double v : linear_resample(f0_slice, seg.factor)) {
      out.f0.push_back(v < f0_min ? 0.0 : v);
    }
  }
  return out;
}

struct RpmResult {
  FeatureBundle bundle;
  SegmentPlan plan;
};

inline RpmResult rhythm_perturb(const FeatureBundle& bundle, const RpmConfig& cfg,
                                std::string_view utt_id) {
  SplitMix64 rng = utterance_rng(cfg.seed, utt_id);
  SegmentPlan plan = sample_segment_plan(bundle.n_frames(), cfg, rng);
  FeatureBundle perturbed = apply_plan(bundle, plan, cfg.f0_min);
  return {std::move(perturbed), std::move(plan)};
}

// Waveform-domain contrast case: resampling raw samples at an unchanged
// sample rate stretches duration by factor and scales every frequency by
// 1/factor.
inline AudioBuffer speed_perturb(const AudioBuffer& audio, double factor) {
  return {linear_resample(audio.samples, factor), audio.sample_rate};
}

inline nlohmann::json plan_to_json(std::string_view utt_id, std::uint64_t seed,
                                   const SegmentPlan& plan) {
  nlohmann::json segments = nlohmann::json::array();
  for (const auto& s : plan.segments) {
    segments.push_back({{"start", s.start}, {"len", s.length}, {"factor", s.factor}});
  }
  return {{"utt_id", std::string(utt_id)}, {"seed", seed}, {"segments", std::move(segments)}};
}

inline SegmentPlan plan_from_json(const nlohmann::json& doc) {
  SegmentPlan plan;
  try {
    for (const auto& s : doc.at("segments")) {
      plan.segments.push_back(
          {s.at("start").get<std::size_t>(), s.at("len").get<std::size_t>(), s.at("factor").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParseError, std::string("segment plan: ") + e.what());
  }
  return plan;
}

}  // namespace rhythmaug
