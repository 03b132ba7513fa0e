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

// Desk-scale copy synthesis: log-mel frames are inverted to linear
// magnitudes and a waveform is recovered with Griffin-Lim phase estimation.
// The F0 track is carried through untouched for vocoders that need it.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "rhythmaug/audio_io.hpp"
#include "rhythmaug/dsp.hpp"
#include "rhythmaug/error.hpp"
#include "rhythmaug/feature_bundle.hpp"
#include "rhythmaug/features.hpp"
#include "rhythmaug/matrix.hpp"
#include "rhythmaug/rpm.hpp"
#include "rhythmaug/spectral.hpp"

namespace rhythmaug {

inline constexpr double kMelInversionRidge = 1e-5;

// Per frame: power p = exp(mel); x = F^T (F F^T + lambda I)^-1 p, which is
// the Tikhonov-regularized pseudo-inverse solution of F x = p, with lambda =
// 1e-5 * trace(F F^T) / n_mels. Negative powers are clipped before the
// square root.
inline MatrixD mel_to_linear(const MatrixD& mel, const MatrixD& filterbank) {
  if (mel.cols() != filterbank.rows()) {
    throw Error(Errc::kShapeMismatch, "mel frames have " + std::to_string(mel.cols()) +
                                          " bands, filterbank has " +
                                          std::to_string(filterbank.rows()));
  }
  const auto n_mels = static_cast<Eigen::Index>(filterbank.rows());
  const auto n_bins = static_cast<Eigen::Index>(filterbank.cols());
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> fb(filterbank.data().data(), n_mels, n_bins);

  Eigen::MatrixXd gram = fb * fb.transpose();
  const double lambda = kMelInversionRidge * gram.trace() / static_cast<double>(n_mels);
  gram.diagonal().array() += lambda;
  const Eigen::LLT<Eigen::MatrixXd> solver(gram);

  MatrixD out(mel.rows(), filterbank.cols());
  Eigen::VectorXd power(n_mels);
  for (std::size_t t = 0; t < mel.rows(); ++t) {
    const auto frame = mel.row(t);
    for (Eigen::Index m = 0; m < n_mels; ++m) power[m] = std::exp(frame[static_cast<std::size_t>(m)]);
    const Eigen::VectorXd linear = fb.transpose() * solver.solve(power);
    auto dst = out.row(t);
    for (Eigen::Index k = 0; k < n_bins; ++k) {
      dst[static_cast<std::size_t>(k)] = std::sqrt(std::max(linear[k], 0.0));
    }
  }
  return out;
}

enum class PhaseInit { kZeros, kRandom };

struct GriffinLimConfig {
  std::size_t n_iters = 60;
  PhaseInit init_phase = PhaseInit::kZeros;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_iters < 1) throw Error(Errc::kConfigError, "griffin_lim.n_iters must be >= 1");
  }
};

struct GriffinLimResult {
  AudioBuffer audio;
  // Spectral distance after the initial inversion and after each iteration
  // (n_iters + 1 values).
  std::vector<double> distances;
};

// Frobenius distance between |X| and the target magnitudes over the full
// (two-sided) spectrum: interior bins count twice.
inline double spectral_distance(const ComplexMatrix& spectra, const MatrixD& target) {
  const std::size_t bins = target.cols();
  double acc = 0.0;
  for (std::size_t t = 0; t < target.rows(); ++t) {
    for (std::size_t k = 0; k < bins; ++k) {
      const double diff = std::abs(spectra(t, k)) - target(t, k);
      const double weight = (k == 0 || k + 1 == bins) ? 1.0 : 2.0;
      acc += weight * diff * diff;
    }
  }
  return std::sqrt(acc);
}

// Samples covered only by near-zero window tails are tapered in the returned
// waveform: the squared-window envelope is floored at this fraction of its
// maximum.
inline constexpr double kOutputEnvelopeFloorRatio = 1e-2;

// Classic Griffin-Lim without momentum. Each iteration re-imposes the target
// magnitudes on the current STFT phase and takes the least-squares inverse
// STFT, so the spectral distance never increases.
inline GriffinLimResult griffin_lim(const MatrixD& magnitudes, const FrameSpec& spec,
                                    std::size_t n_fft, const GriffinLimConfig& cfg,
                                    int sample_rate) {
  cfg.validate();
  spec.validate();
  if (magnitudes.cols() != n_fft / 2 + 1) {
    throw Error(Errc::kShapeMismatch, "magnitudes have " + std::to_string(magnitudes.cols()) +
                                          " bins, n_fft " + std::to_string(n_fft) + " needs " +
                                          std::to_string(n_fft / 2 + 1));
  }
  for (double v : magnitudes.data()) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(Errc::kInvalidArgument, "magnitudes must be finite and nonnegative");
    }
  }

  GriffinLimResult result;
  result.audio.sample_rate = sample_rate;
  if (magnitudes.rows() == 0) return result;

  ComplexMatrix target(magnitudes.rows(), magnitudes.cols());
  SplitMix64 rng(cfg.seed);
  for (std::size_t i = 0; i < target.data().size(); ++i) {
    const double phase = cfg.init_phase == PhaseInit::kRandom
                             ? rng.uniform_real(0.0, 2.0 * std::numbers::pi)
                             : 0.0;
    target.data()[i] = std::polar(magnitudes.data()[i], phase);
  }

  constexpr double kExact = std::numeric_limits<double>::min();
  std::vector<double> x = istft(target, spec, n_fft, kExact);
  for (std::size_t it = 0; it <= cfg.n_iters; ++it) {
    const ComplexMatrix spectra = stft(x, spec, n_fft);
    result.distances.push_back(spectral_distance(spectra, magnitudes));
    if (it == cfg.n_iters) break;
    for (std::size_t i = 0; i < target.data().size(); ++i) {
      const Complex z = spectra.data()[i];
      const double mag = std::abs(z);
      const double m = magnitudes.data()[i];
      target.data()[i] = mag > 0.0 ? z * (m / mag) : Complex(m, 0.0);
    }
    x = istft(target, spec, n_fft, kExact);
  }

  const std::vector<double> w = make_window(spec.window, spec.win_length);
  double peak_envelope = 0.0;
  {
    std::vector<double> envelope(spec.ola_length(magnitudes.rows()), 0.0);
    for (std::size_t i = 0; i < magnitudes.rows(); ++i) {
      for (std::size_t n = 0; n < spec.win_length; ++n) {
        envelope[i * spec.hop_length + n] += w[n] * w[n];
      }
    }
    for (double e : envelope) peak_envelope = std::max(peak_envelope, e);
  }
  result.audio.samples = istft(target, spec, n_fft, kOutputEnvelopeFloorRatio * peak_envelope);
  peak_normalize(result.audio.samples, kOutputPeak);
  return result;
}

struct CopySynthesisResult {
  AudioBuffer audio;
  FeatureBundle features;  // after rhythm perturbation when enabled
  std::optional<SegmentPlan> plan;
  std::vector<double> distances;
};

// extract_features -> optional rhythm_perturb -> mel_to_linear -> griffin_lim.
inline CopySynthesisResult copy_synthesize(const AudioBuffer& audio, const FeatureConfig& feat_cfg,
                                           const std::optional<RpmConfig>& rpm_cfg,
                                           const GriffinLimConfig& gl_cfg,
                                           std::string_view utt_id) {
  CopySynthesisResult result;
  result.features = extract_features(audio, feat_cfg);
  if (rpm_cfg) {
    RpmResult perturbed = rhythm_perturb(result.features, *rpm_cfg, utt_id);
    result.features = std::move(perturbed.bundle);
    result.plan = std::move(perturbed.plan);
  }
  const MatrixD fb = mel_filterbank(feat_cfg, audio.sample_rate);
  const MatrixD linear = mel_to_linear(result.features.mel, fb);
  GriffinLimResult gl = griffin_lim(linear, feat_cfg.frame, feat_cfg.n_fft, gl_cfg, audio.sample_rate);
  result.audio = std::move(gl.audio);
  result.distances = std::move(gl.distances);
  return result;
}

}  // namespace rhythmaug
