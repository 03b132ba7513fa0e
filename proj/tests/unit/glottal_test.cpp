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

#include "rhythmaug/glottal.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"

namespace rhythmaug {
namespace {

using testing::argmax_in_band;
using testing::averaged_dft_power;
using testing::db;
using testing::max_in_band;

constexpr std::size_t kAnalysisN = 2048;
constexpr double kBinHz = 16000.0 / kAnalysisN;

double formant_level_db(const std::vector<double>& power, double formant) {
  return db(max_in_band(power, formant - 60.0, formant + 60.0, kBinHz) /
            max_in_band(power, 60.0, 180.0, kBinHz));
}

class GlottalOracle : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    oracle_ = new testing::FormantOracle(testing::make_formant_oracle(1.0, true));
    flow_ = new GlottalFlow(extract_glottal_flow({oracle_->speech, 16000}, IaifConfig::defaults(16000)));
  }
  static void TearDownTestSuite() {
    delete oracle_;
    delete flow_;
  }
  static testing::FormantOracle* oracle_;
  static GlottalFlow* flow_;
};

testing::FormantOracle* GlottalOracle::oracle_ = nullptr;
GlottalFlow* GlottalOracle::flow_ = nullptr;

TEST_F(GlottalOracle, FormantsAreSuppressed) {
  const auto pin = averaged_dft_power(oracle_->speech, kAnalysisN, kAnalysisN);
  const auto pout = averaged_dft_power(flow_->audio.samples, kAnalysisN, kAnalysisN);
  for (double f : oracle_->formants) {
    EXPECT_GE(formant_level_db(pin, f) - formant_level_db(pout, f), 12.0) << f;
  }
}

TEST_F(GlottalOracle, FundamentalIsPreserved) {
  const auto pin = averaged_dft_power(oracle_->speech, kAnalysisN, kAnalysisN);
  const auto pout = averaged_dft_power(flow_->audio.samples, kAnalysisN, kAnalysisN);
  const auto bin_in = static_cast<long>(argmax_in_band(pin, 60.0, 180.0, kBinHz));
  const auto bin_out = static_cast<long>(argmax_in_band(pout, 60.0, 180.0, kBinHz));
  EXPECT_LE(std::abs(bin_in - bin_out), 1);
}

TEST_F(GlottalOracle, EnergyEnvelopeTracksInput) {
  const auto rin = testing::frame_rms(oracle_->speech, 400, 80);
  const auto rout = testing::frame_rms(flow_->audio.samples, 400, 80);
  EXPECT_GE(testing::pearson(rin, rout), 0.8);
}

TEST_F(GlottalOracle, OutputContract) {
  const IaifConfig cfg = IaifConfig::defaults(16000);
  EXPECT_EQ(flow_->audio.sample_rate, 16000);
  EXPECT_EQ(flow_->frames, cfg.frame.frame_count(oracle_->speech.size()));
  EXPECT_EQ(flow_->audio.samples.size(), cfg.frame.ola_length(flow_->frames));
  EXPECT_LE(flow_->audio.samples.size(), oracle_->speech.size());
  EXPECT_NEAR(peak_abs(flow_->audio.samples), kOutputPeak, 1e-12);
  EXPECT_TRUE(flow_->skipped_frames.empty());
}

TEST(IaifFrame, WhiteNoiseDerivativeStaysFlat) {
  const IaifConfig cfg = IaifConfig::defaults(16000);
  for (std::uint64_t seed : {7u, 8u, 9u}) {
    const auto noise = testing::white_noise(400, seed);
    const GlottalFrameResult r = iaif_frame(noise, cfg);
    const auto derivative = LipRadiation{cfg.lip_d}.apply(r.glottal);
    const double in = testing::spectral_flatness_db(testing::dft_power(noise, 0, 400));
    const double out = testing::spectral_flatness_db(testing::dft_power(derivative, 0, 400));
    EXPECT_GE(out, in - 3.0) << seed;
  }
}

TEST(IaifFrame, ZeroFrameGivesZeros) {
  const IaifConfig cfg = IaifConfig::defaults(16000);
  const GlottalFrameResult r = iaif_frame(std::vector<double>(400, 0.0), cfg);
  ASSERT_EQ(r.glottal.size(), 400u);
  for (double v : r.glottal) EXPECT_EQ(v, 0.0);
}

TEST(IaifFrame, ModelOrdersAndStability) {
  const IaifConfig cfg = IaifConfig::defaults(16000);
  const auto o = testing::make_formant_oracle(0.1, false);
  const GlottalFrameResult r = iaif_frame(std::span(o.speech).subspan(200, 400), cfg);
  EXPECT_EQ(r.vocal_tract.order(), 18u);
  EXPECT_EQ(r.glottal_source_model.order(), 4u);
  EXPECT_TRUE(r.vocal_tract.is_minimum_phase());
  EXPECT_TRUE(r.glottal_source_model.is_minimum_phase());
}

TEST(IaifFrame, WrongFrameLength) {
  try {
    iaif_frame(std::vector<double>(399, 0.1), IaifConfig::defaults(16000));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kInconsistentFrameLength);
  }
}

TEST(ExtractGlottalFlow, Deterministic) {
  const AudioBuffer in{testing::white_noise(4000, 5), 16000};
  const IaifConfig cfg = IaifConfig::defaults(16000);
  EXPECT_EQ(extract_glottal_flow(in, cfg).audio, extract_glottal_flow(in, cfg).audio);
}

TEST(ExtractGlottalFlow, SilenceStaysSilent) {
  const GlottalFlow flow = extract_glottal_flow({std::vector<double>(2000, 0.0), 16000},
                                                IaifConfig::defaults(16000));
  for (double v : flow.audio.samples) EXPECT_EQ(v, 0.0);
}

TEST(ExtractGlottalFlow, TooShort) {
  try {
    extract_glottal_flow({std::vector<double>(399, 0.1), 16000}, IaifConfig::defaults(16000));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kTooShort);
  }
}

TEST(IaifConfig, DefaultsFollowSampleRate) {
  const IaifConfig a = IaifConfig::defaults(16000);
  EXPECT_EQ(a.vocal_tract_order, 18u);
  EXPECT_EQ(a.frame.win_length, 400u);
  EXPECT_EQ(a.frame.hop_length, 80u);
  const IaifConfig b = IaifConfig::defaults(8000);
  EXPECT_EQ(b.vocal_tract_order, 10u);
  EXPECT_EQ(b.frame.win_length, 200u);
  EXPECT_EQ(b.frame.hop_length, 40u);
}

TEST(IaifConfig, Validation) {
  IaifConfig cfg;
  cfg.glottal_order = 18;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = IaifConfig{};
  cfg.lip_d = 1.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = IaifConfig{};
  cfg.vocal_tract_order = 400;
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_NO_THROW(IaifConfig{}.validate());
}

}  // namespace
}  // namespace rhythmaug
