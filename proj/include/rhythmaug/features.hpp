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

// Vocoder-facing features: log-mel spectrogram and an autocorrelation F0
// track computed on one shared frame grid.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rhythmaug/audio_io.hpp"
#include "rhythmaug/dsp.hpp"
#include "rhythmaug/error.hpp"
#include "rhythmaug/feature_bundle.hpp"
#include "rhythmaug/matrix.hpp"
#include "rhythmaug/spectral.hpp"

namespace rhythmaug {

inline constexpr double kMelFloor = 1e-10;

struct FeatureConfig {
  std::size_t n_fft = 1024;
  FrameSpec frame{1024, 256, WindowKind::kHann};
  std::size_t n_mels = 80;
  double fmin = 0.0;
  std::optional<double> fmax;  // Nyquist when unset
  double f0_min = 50.0;
  double f0_max = 500.0;
  double voicing_threshold = 0.3;

  double resolved_fmax(double sample_rate) const { return fmax.value_or(sample_rate / 2.0); }

  void validate(double sample_rate) const {
    frame.validate();
    if (frame.win_length > n_fft) {
      throw Error(Errc::kConfigError, "features.win_length exceeds n_fft");
    }
    if (n_mels == 0) throw Error(Errc::kConfigError, "features.n_mels must be positive");
    const double top = resolved_fmax(sample_rate);
    if (!(fmin >= 0.0 && fmin < top && top <= sample_rate / 2.0)) {
      throw Error(Errc::kConfigError, "features require 0 <= fmin < fmax <= Nyquist");
    }
    if (!(f0_min > 0.0 && f0_min < f0_max)) {
      throw Error(Errc::kConfigError, "features require 0 < f0_min < f0_max");
    }
    if (!(voicing_threshold > 0.0 && voicing_threshold < 1.0)) {
      throw Error(Errc::kConfigError, "features.voicing_threshold must lie in (0, 1)");
    }
  }
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

inline MatrixD stft_magnitude(std::span<const double> audio, const FeatureConfig& cfg) {
  return magnitude(stft(audio, cfg.frame, cfg.n_fft));
}

inline MatrixD stft_magnitude(const AudioBuffer& audio, const FeatureConfig& cfg) {
  return stft_magnitude(audio.samples, cfg);
}

// Triangular filters whose centers are equally spaced on the mel scale
// between fmin and fmax, each scaled so its largest weight is 1.
inline MatrixD mel_filterbank(const FeatureConfig& cfg, double sample_rate) {
  cfg.validate(sample_rate);
  const std::size_t n_bins = cfg.n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.resolved_fmax(sample_rate));
  std::vector<double> edges(cfg.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + static_cast<double>(i) * (mel_hi - mel_lo) /
                                      static_cast<double>(cfg.n_mels + 1));
  }
  const double bin_hz = sample_rate / static_cast<double>(cfg.n_fft);

  for (std::size_t m = 1; m < cfg.n_mels; ++m) {
    if (std::lround(edges[m] / bin_hz) == std::lround(edges[m + 1] / bin_hz)) {
      throw Error(Errc::kTooManyMels,
                  "mel bands " + std::to_string(m - 1) + " and " + std::to_string(m) +
                      " share DFT bin " + std::to_string(std::lround(edges[m] / bin_hz)));
    }
  }

  MatrixD fb(cfg.n_mels, n_bins);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    auto row = fb.row(m);
    double peak = 0.0;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double v = 0.0;
      if (f > lo && f <= center) {
        v = (f - lo) / (center - lo);
      } else if (f > center && f < hi) {
        v = (hi - f) / (hi - center);
      }
      row[k] = v;
      peak = std::max(peak, v);
    }
    if (peak <= 0.0) {
      throw Error(Errc::kTooManyMels, "mel band " + std::to_string(m) + " covers no DFT bin");
    }
    for (double& v : row) v /= peak;
  }
  return fb;
}

// Center frequency (Hz) of every mel band.
inline std::vector<double> mel_band_centers(const FeatureConfig& cfg, double sample_rate) {
  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.resolved_fmax(sample_rate));
  std::vector<double> centers(cfg.n_mels);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    centers[m] = mel_to_hz(mel_lo + static_cast<double>(m + 1) * (mel_hi - mel_lo) /
                                        static_cast<double>(cfg.n_mels + 1));
  }
  return centers;
}

// log(max(filterbank . |X|^2, kMelFloor)) per frame.
inline MatrixD mel_spectrogram(std::span<const double> audio, double sample_rate,
                               const FeatureConfig& cfg) {
  const MatrixD fb = mel_filterbank(cfg, sample_rate);
  const MatrixD mag = stft_magnitude(audio, cfg);
  MatrixD mel(mag.rows(), cfg.n_mels);
  for (std::size_t t = 0; t < mag.rows(); ++t) {
    const auto spec = mag.row(t);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      const auto weights = fb.row(m);
      double energy = 0.0;
      for (std::size_t k = 0; k < spec.size(); ++k) energy += weights[k] * spec[k] * spec[k];
      mel(t, m) = std::log(std::max(energy, kMelFloor));
    }
  }
  return mel;
}

inline MatrixD mel_spectrogram(const AudioBuffer& audio, const FeatureConfig& cfg) {
  return mel_spectrogram(audio.samples, audio.sample_rate, cfg);
}

// F0 of one windowed frame, or 0.0 when unvoiced. The candidate is the
// strongest local maximum of r(k)/r(0) inside the lag range; its lag is
// refined by a parabola through the peak and its two neighbours.
inline double frame_f0(std::span<const double> frame, double sample_rate,
                       const FeatureConfig& cfg) {
  if (frame.size() < 3) return 0.0;
  const auto lag_lo = static_cast<std::size_t>(std::ceil(sample_rate / cfg.f0_max));
  const std::size_t lag_hi = std::min(static_cast<std::size_t>(std::floor(sample_rate / cfg.f0_min)),
                                      frame.size() - 2);
  if (lag_lo < 1 || lag_lo > lag_hi) return 0.0;

  const std::vector<double> r = autocorrelation(frame, lag_hi + 1);
  if (!(r[0] > 0.0)) return 0.0;

  std::size_t best = 0;
  double best_rho = -1.0;
  for (std::size_t k = lag_lo; k <= lag_hi; ++k) {
    if (r[k] >= r[k - 1] && r[k] >= r[k + 1] && r[k] > best_rho * r[0]) {
      best = k;
      best_rho = r[k] / r[0];
    }
  }
  if (best == 0 || best_rho < cfg.voicing_threshold) return 0.0;

  const double left = r[best - 1] / r[0];
  const double right = r[best + 1] / r[0];
  const double curvature = left - 2.0 * best_rho + right;
  double offset = 0.0;
  if (curvature < 0.0) offset = std::clamp(0.5 * (left - right) / curvature, -0.5, 0.5);
  const double f0 = sample_rate / (static_cast<double>(best) + offset);
  return std::clamp(f0, cfg.f0_min, cfg.f0_max);
}

inline std::vector<double> estimate_f0(std::span<const double> audio, double sample_rate,
                                       const FeatureConfig& cfg) {
  cfg.validate(sample_rate);
  const MatrixD frames = frame_signal(audio, cfg.frame);
  std::vector<double> f0(frames.rows());
  for (std::size_t t = 0; t < frames.rows(); ++t) f0[t] = frame_f0(frames.row(t), sample_rate, cfg);
  return f0;
}

inline std::vector<double> estimate_f0(const AudioBuffer& audio, const FeatureConfig& cfg) {
  return estimate_f0(audio.samples, audio.sample_rate, cfg);
}

inline FeatureBundle extract_features(const AudioBuffer& audio, const FeatureConfig& cfg) {
  FeatureBundle bundle;
  bundle.mel = mel_spectrogram(audio, cfg);
  bundle.f0 = estimate_f0(audio, cfg);
  bundle.sample_rate = audio.sample_rate;
  bundle.hop_length = static_cast<std::uint32_t>(cfg.frame.hop_length);
  bundle.win_length = static_cast<std::uint32_t>(cfg.frame.win_length);
  return bundle;
}

}  // namespace rhythmaug
