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

#include "rhythmaug/features.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "test_support.hpp"

namespace rhythmaug {
namespace {

constexpr double kFs = 16000.0;

TEST(StftMagnitude, BinCenteredSinePeaksAtItsBin) {
  FeatureConfig cfg;
  const std::size_t k = 40;
  const double f = k * kFs / cfg.n_fft;
  const MatrixD mag = stft_magnitude(testing::sine(f, kFs, 8000), cfg);
  ASSERT_EQ(mag.cols(), cfg.n_fft / 2 + 1);
  for (std::size_t t = 0; t < mag.rows(); ++t) {
    const auto row = mag.row(t);
    EXPECT_EQ(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()), k);
  }
}

TEST(StftMagnitude, ZeroSignal) {
  const MatrixD mag = stft_magnitude(std::vector<double>(4096, 0.0), FeatureConfig{});
  for (double v : mag.data()) EXPECT_EQ(v, 0.0);
}

TEST(StftMagnitude, ParsevalAgainstTimeDomainEnergy) {
  FeatureConfig cfg;
  cfg.frame = {800, 200, WindowKind::kHann};  // zero-padded to n_fft
  const auto x = testing::white_noise(6000, 31, 0.3);
  const MatrixD mag = stft_magnitude(x, cfg);
  const auto w = make_window(WindowKind::kHann, 800);
  for (std::size_t t = 0; t < mag.rows(); ++t) {
    double time_energy = 0.0;
    for (std::size_t n = 0; n < 800; ++n) {
      const double v = w[n] * x[t * 200 + n];
      time_energy += v * v;
    }
    double freq_energy = 0.0;
    for (std::size_t k = 0; k < mag.cols(); ++k) {
      const double weight = (k == 0 || k + 1 == mag.cols()) ? 1.0 : 2.0;
      freq_energy += weight * mag(t, k) * mag(t, k);
    }
    EXPECT_NEAR(freq_energy / cfg.n_fft, time_energy, 1e-6 * time_energy);
  }
}

TEST(MelFilterbank, Construction) {
  FeatureConfig cfg;
  const MatrixD fb = mel_filterbank(cfg, kFs);
  ASSERT_EQ(fb.rows(), 80u);
  ASSERT_EQ(fb.cols(), 513u);
  for (std::size_t m = 0; m < fb.rows(); ++m) {
    const auto row = fb.row(m);
    EXPECT_DOUBLE_EQ(*std::max_element(row.begin(), row.end()), 1.0) << m;
    for (double v : row) EXPECT_GE(v, 0.0);
  }
  for (std::size_t k = 0; k < fb.cols(); ++k) {
    double sum = 0.0;
    for (std::size_t m = 0; m < fb.rows(); ++m) sum += fb(m, k);
    EXPECT_LE(sum, 2.0) << k;
  }
}

TEST(MelFilterbank, MelScaleFormula) {
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-12);
  EXPECT_NEAR(hz_to_mel(700.0), 781.17, 0.01);
  EXPECT_NEAR(mel_to_hz(hz_to_mel(1234.5)), 1234.5, 1e-9);
}

TEST(MelFilterbank, TooManyMelsForResolution) {
  FeatureConfig cfg;
  cfg.n_fft = 64;
  cfg.frame = {64, 16, WindowKind::kHann};
  try {
    mel_filterbank(cfg, kFs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kTooManyMels);
  }
}

TEST(MelSpectrogram, SilenceSitsOnTheFloor) {
  const MatrixD mel = mel_spectrogram(std::vector<double>(4096, 0.0), kFs, FeatureConfig{});
  for (double v : mel.data()) EXPECT_EQ(v, std::log(kMelFloor));
}

TEST(MelSpectrogram, DoublingAmplitudeAddsLog4) {
  const auto x = testing::white_noise(8000, 12, 0.1);
  std::vector<double> x2(x);
  for (double& v : x2) v *= 2.0;
  FeatureConfig cfg;
  const MatrixD a = mel_spectrogram(x, kFs, cfg);
  const MatrixD b = mel_spectrogram(x2, kFs, cfg);
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    if (a.data()[i] > std::log(kMelFloor) + 1.0) {
      EXPECT_NEAR(b.data()[i] - a.data()[i], std::log(4.0), 1e-9);
    }
  }
}

TEST(MelSpectrogram, SinePeaksInNearestBand) {
  FeatureConfig cfg;
  const auto centers = mel_band_centers(cfg, kFs);
  std::size_t nearest = 0;
  for (std::size_t m = 0; m < centers.size(); ++m) {
    if (std::abs(centers[m] - 1000.0) < std::abs(centers[nearest] - 1000.0)) nearest = m;
  }
  const MatrixD mel = mel_spectrogram(testing::sine(1000.0, kFs, 8000), kFs, cfg);
  for (std::size_t t = 0; t < mel.rows(); ++t) {
    const auto row = mel.row(t);
    EXPECT_EQ(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()), nearest);
  }
}

TEST(EstimateF0, PureSine) {
  const auto f0 = estimate_f0(testing::sine(220.0, kFs, 16000), kFs, FeatureConfig{});
  ASSERT_EQ(f0.size(), 59u);
  for (std::size_t t = 1; t + 1 < f0.size(); ++t) EXPECT_NEAR(f0[t], 220.0, 2.0) << t;
}

TEST(EstimateF0, WhiteNoiseIsMostlyUnvoiced) {
  const auto f0 = estimate_f0(testing::white_noise(32000, 404, 0.2), kFs, FeatureConfig{});
  const auto unvoiced = std::count(f0.begin(), f0.end(), 0.0);
  EXPECT_GE(static_cast<double>(unvoiced), 0.9 * static_cast<double>(f0.size()));
}

TEST(EstimateF0, SilenceIsUnvoiced) {
  for (double v : estimate_f0(std::vector<double>(8000, 0.0), kFs, FeatureConfig{})) EXPECT_EQ(v, 0.0);
}

TEST(EstimateF0, NeverEmitsOutOfRangePitch) {
  FeatureConfig cfg;
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> freq(20.0, 2000.0);
  for (int trial = 0; trial < 40; ++trial) {
    auto x = testing::sine(freq(gen), kFs, 6000);
    const auto noise = testing::white_noise(6000, gen(), 0.05 * trial / 10.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += noise[i];
    for (double v : estimate_f0(x, kFs, cfg)) {
      ASSERT_TRUE(v == 0.0 || (v >= cfg.f0_min && v <= cfg.f0_max)) << v;
    }
  }
}

TEST(ExtractFeatures, SharedFramingAndMetadata) {
  const AudioBuffer audio{testing::white_noise(16000, 1, 0.1), 16000};
  const FeatureBundle b = extract_features(audio, FeatureConfig{});
  EXPECT_EQ(b.n_frames(), 1u + (16000u - 1024u) / 256u);
  EXPECT_EQ(b.n_frames(), 59u);
  EXPECT_EQ(b.mel.rows(), b.f0.size());
  EXPECT_EQ(b.n_mels(), 80u);
  EXPECT_EQ(b.sample_rate, 16000.0);
  EXPECT_EQ(b.hop_length, 256u);
  EXPECT_EQ(b.win_length, 1024u);
  for (double v : b.mel.data()) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, std::log(kMelFloor));
  }
}

TEST(ExtractFeatures, SurvivesFeatureFileRoundTrip) {
  testing::TempDir dir("features");
  const AudioBuffer audio{testing::sine(150.0, kFs, 12000), 16000};
  const FeatureBundle b = extract_features(audio, FeatureConfig{});
  write_features(dir / "x.rfb", b);
  EXPECT_EQ(read_features(dir / "x.rfb"), b);
}

TEST(ExtractFeatures, OneHopDelayShiftsFramesByOne) {
  FeatureConfig cfg;
  const auto x = testing::white_noise(12000, 77, 0.2);
  std::vector<double> delayed(cfg.frame.hop_length, 0.0);
  delayed.insert(delayed.end(), x.begin(), x.end());
  const FeatureBundle a = extract_features({x, 16000}, cfg);
  const FeatureBundle b = extract_features({delayed, 16000}, cfg);
  ASSERT_EQ(b.n_frames(), a.n_frames() + 1);
  for (std::size_t t = 0; t < a.n_frames(); ++t) {
    for (std::size_t m = 0; m < a.n_mels(); ++m) ASSERT_NEAR(b.mel(t + 1, m), a.mel(t, m), 1e-8);
    ASSERT_EQ(b.f0[t + 1], a.f0[t]);
  }
}

TEST(FeatureConfig, RejectsBadRanges) {
  FeatureConfig cfg;
  cfg.fmax = 9000.0;
  EXPECT_THROW(cfg.validate(kFs), Error);
  cfg = FeatureConfig{};
  cfg.f0_min = 600.0;
  EXPECT_THROW(cfg.validate(kFs), Error);
  cfg = FeatureConfig{};
  cfg.frame.win_length = 2048;
  EXPECT_THROW(cfg.validate(kFs), Error);
}

}  // namespace
}  // namespace rhythmaug
