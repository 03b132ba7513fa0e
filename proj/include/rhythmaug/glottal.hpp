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

// Glottal flow estimation by iterative adaptive inverse filtering (IAIF).
//
// Each frame alternates LPC estimates of the glottal spectral tilt and the
// vocal tract, cancelling lip radiation by leaky integration, and the
// per-frame glottal estimates are overlap-added into one utterance-level
// signal.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rhythmaug/audio_io.hpp"
#include "rhythmaug/dsp.hpp"
#include "rhythmaug/error.hpp"
#include "rhythmaug/matrix.hpp"

namespace rhythmaug {

struct IaifConfig {
  std::size_t vocal_tract_order = 18;
  std::size_t glottal_order = 4;
  double lip_d = kDefaultLipCoefficient;
  FrameSpec frame{400, 80, WindowKind::kHann};
  double highpass_cutoff = 70.0;

  // Vocal-tract order 2 + fs/1000, 25 ms frames with a 5 ms hop.
  static IaifConfig defaults(int sample_rate) {
    IaifConfig cfg;
    const double fs = sample_rate;
    cfg.vocal_tract_order = static_cast<std::size_t>(std::lround(2.0 + fs / 1000.0));
    cfg.frame.win_length = static_cast<std::size_t>(std::lround(0.025 * fs));
    cfg.frame.hop_length = static_cast<std::size_t>(std::lround(0.005 * fs));
    return cfg;
  }

  void validate() const {
    frame.validate();
    if (!(glottal_order > 0 && glottal_order < vocal_tract_order &&
          vocal_tract_order < frame.win_length)) {
      throw Error(Errc::kConfigError,
                  "iaif requires 0 < glottal_order < vocal_tract_order < win_length (got g=" +
                      std::to_string(glottal_order) + ", p=" + std::to_string(vocal_tract_order) +
                      ", win=" + std::to_string(frame.win_length) + ")");
    }
    if (!(lip_d > 0.0 && lip_d < 1.0)) {
      throw Error(Errc::kConfigError, "iaif.lip_d must lie in (0, 1)");
    }
    if (!(highpass_cutoff > 0.0)) {
      throw Error(Errc::kConfigError, "iaif.highpass_cutoff must be positive");
    }
  }
};

struct GlottalFrameResult {
  std::vector<double> glottal;
  LpcModel vocal_tract;
  LpcModel glottal_source_model;
};

// LPC models are fitted on windowed copies; every inverse filter runs on the
// unwindowed frame. Throws Errc::kUnstableFrame when any fit is unstable.
inline GlottalFrameResult iaif_frame(std::span<const double> frame, const IaifConfig& cfg) {
  cfg.validate();
  if (frame.size() != cfg.frame.win_length) {
    throw Error(Errc::kInconsistentFrameLength,
                "iaif frame length " + std::to_string(frame.size()) + " != " +
                    std::to_string(cfg.frame.win_length));
  }
  const std::vector<double> window = make_window(cfg.frame.window, frame.size());
  const auto fit = [&](std::span<const double> x, std::size_t order) {
    std::vector<double> windowed(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) windowed[n] = window[n] * x[n];
    return lpc_analysis(windowed, order);
  };
  const LipRadiation lips{cfg.lip_d};

  // Coarse glottal tilt, then a first vocal-tract estimate on the de-tilted
  // frame.
  const LpcModel tilt = fit(frame, 1);
  const std::vector<double> detilted = inverse_filter(frame, tilt);
  const LpcModel tract_initial = fit(detilted, cfg.vocal_tract_order);
  const std::vector<double> glottal_initial = lips.cancel(inverse_filter(frame, tract_initial));

  // Refined glottal envelope, then the final vocal tract.
  LpcModel source = fit(glottal_initial, cfg.glottal_order);
  const std::vector<double> tilt_free = lips.cancel(inverse_filter(frame, source));
  LpcModel tract = fit(tilt_free, cfg.vocal_tract_order);

  GlottalFrameResult result;
  result.glottal = lips.cancel(inverse_filter(frame, tract));
  result.vocal_tract = std::move(tract);
  result.glottal_source_model = std::move(source);
  return result;
}

struct GlottalFlow {
  AudioBuffer audio;
  std::size_t frames = 0;
  // Frames whose LPC fit was unstable and were passed through raw.
  std::vector<std::size_t> skipped_frames;
};

inline GlottalFlow extract_glottal_flow(const AudioBuffer& input, const IaifConfig& cfg) {
  cfg.validate();
  if (input.samples.size() < cfg.frame.win_length) {
    throw Error(Errc::kTooShort, "audio length " + std::to_string(input.samples.size()) +
                                     " < window " + std::to_string(cfg.frame.win_length));
  }
  const std::vector<double> filtered =
      butterworth_highpass4(input.samples, cfg.highpass_cutoff, input.sample_rate);

  const FrameSpec slicing{cfg.frame.win_length, cfg.frame.hop_length, WindowKind::kRect};
  MatrixD frames = frame_signal(filtered, slicing);
  const std::vector<double> synthesis = make_window(cfg.frame.window, cfg.frame.win_length);

  GlottalFlow flow;
  flow.frames = frames.rows();
  for (std::size_t i = 0; i < frames.rows(); ++i) {
    auto row = frames.row(i);
    try {
      const GlottalFrameResult r = iaif_frame(row, cfg);
      std::copy(r.glottal.begin(), r.glottal.end(), row.begin());
    } catch (const Error& e) {
      if (e.code() != Errc::kUnstableFrame) throw;
      flow.skipped_frames.push_back(i);
    }
    for (std::size_t n = 0; n < row.size(); ++n) row[n] *= synthesis[n];
  }

  flow.audio.sample_rate = input.sample_rate;
  flow.audio.samples = overlap_add(frames, cfg.frame);
  peak_normalize(flow.audio.samples, kOutputPeak);
  return flow;
}

}  // namespace rhythmaug
