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

// Signal generators and brute-force oracles shared by the unit and
// acceptance suites. Nothing here calls into the library's transforms, so
// the oracles stay independent of the code they check.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace rhythmaug::testing {

inline constexpr double kPi = std::numbers::pi;

inline std::vector<double> sine(double freq, double sample_rate, std::size_t n,
                                double amplitude = 0.5, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amplitude * std::sin(2.0 * kPi * freq * static_cast<double>(i) / sample_rate + phase);
  }
  return x;
}

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double stddev = 0.1) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> x(n);
  for (auto& v : x) v = dist(gen);
  return x;
}

inline std::vector<double> uniform_values(std::size_t n, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> x(n);
  for (auto& v : x) v = dist(gen);
  return x;
}

// Multiplies out prod_i (1 - 2 r_i cos(theta_i) z^-1 + r_i^2 z^-2) and
// returns the coefficients after the leading 1.
inline std::vector<double> polynomial_from_pole_pairs(const std::vector<double>& radii,
                                                      const std::vector<double>& angles) {
  std::vector<double> poly{1.0};
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double section[3] = {1.0, -2.0 * radii[i] * std::cos(angles[i]), radii[i] * radii[i]};
    std::vector<double> next(poly.size() + 2, 0.0);
    for (std::size_t a = 0; a < poly.size(); ++a) {
      for (std::size_t b = 0; b < 3; ++b) next[a + b] += poly[a] * section[b];
    }
    poly = std::move(next);
  }
  return {poly.begin() + 1, poly.end()};
}

// Direct-form recursion y[n] = x[n] - sum_k a[k] y[n-k].
inline std::vector<double> reference_allpole(const std::vector<double>& x,
                                             const std::vector<double>& a) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = x[n];
    for (std::size_t k = 1; k <= a.size() && k <= n; ++k) acc -= a[k - 1] * y[n - k];
    y[n] = acc;
  }
  return y;
}

// Resonator coefficients for a formant at freq with the given bandwidth.
inline std::vector<double> formant_filter(const std::vector<double>& freqs,
                                          const std::vector<double>& bandwidths,
                                          double sample_rate) {
  std::vector<double> radii, angles;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    radii.push_back(std::exp(-kPi * bandwidths[i] / sample_rate));
    angles.push_back(2.0 * kPi * freqs[i] / sample_rate);
  }
  return polynomial_from_pole_pairs(radii, angles);
}

// O(N^2) DFT power of a Hann-windowed segment, bins 0..N/2.
inline std::vector<double> dft_power(const std::vector<double>& x, std::size_t start,
                                     std::size_t n) {
  std::vector<double> power(n / 2 + 1, 0.0);
  std::vector<double> seg(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
    seg[i] = w * x[start + i];
  }
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += seg[i] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * i % n) / static_cast<double>(n));
    }
    power[k] = std::norm(acc);
  }
  return power;
}

// DFT power averaged over consecutive non-overlapping segments of length n.
inline std::vector<double> averaged_dft_power(const std::vector<double>& x, std::size_t n,
                                              std::size_t hop) {
  std::vector<double> avg(n / 2 + 1, 0.0);
  std::size_t count = 0;
  for (std::size_t start = 0; start + n <= x.size(); start += hop, ++count) {
    const auto p = dft_power(x, start, n);
    for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += p[k];
  }
  for (auto& v : avg) v /= static_cast<double>(std::max<std::size_t>(count, 1));
  return avg;
}

inline std::size_t argmax_in_band(const std::vector<double>& power, double lo_hz, double hi_hz,
                                  double bin_hz) {
  const auto lo = static_cast<std::size_t>(std::ceil(lo_hz / bin_hz));
  const auto hi = std::min(power.size() - 1, static_cast<std::size_t>(std::floor(hi_hz / bin_hz)));
  std::size_t best = lo;
  for (std::size_t k = lo; k <= hi; ++k) {
    if (power[k] > power[best]) best = k;
  }
  return best;
}

inline double max_in_band(const std::vector<double>& power, double lo_hz, double hi_hz,
                          double bin_hz) {
  return power[argmax_in_band(power, lo_hz, hi_hz, bin_hz)];
}

inline double db(double power_ratio) { return 10.0 * std::log10(power_ratio); }

// Spectral flatness in dB: geometric over arithmetic mean of the power
// spectrum, skipping DC.
inline double spectral_flatness_db(const std::vector<double>& power) {
  double log_sum = 0.0, sum = 0.0;
  for (std::size_t k = 1; k < power.size(); ++k) {
    log_sum += std::log(std::max(power[k], 1e-300));
    sum += power[k];
  }
  const double n = static_cast<double>(power.size() - 1);
  return db(std::exp(log_sum / n) / (sum / n));
}

inline std::vector<double> frame_rms(const std::vector<double>& x, std::size_t win,
                                     std::size_t hop) {
  std::vector<double> rms;
  for (std::size_t start = 0; start + win <= x.size(); start += hop) {
    double acc = 0.0;
    for (std::size_t i = 0; i < win; ++i) acc += x[start + i] * x[start + i];
    rms.push_back(std::sqrt(acc / static_cast<double>(win)));
  }
  return rms;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Synthetic voiced utterance: a 120 Hz impulse train smoothed by a two-pole
// low-pass (glottal-pulse-like source), shaped by formants at 700 and
// 1200 Hz and gated by a syllable-rate amplitude envelope.
struct FormantOracle {
  double sample_rate = 16000.0;
  double f0 = 120.0;
  std::vector<double> formants{700.0, 1200.0};
  std::vector<double> bandwidths{60.0, 80.0};
  std::vector<double> source;
  std::vector<double> speech;
  std::vector<double> envelope;
};

inline FormantOracle make_formant_oracle(double seconds = 1.0, bool syllables = true) {
  FormantOracle o;
  const auto n = static_cast<std::size_t>(seconds * o.sample_rate);
  std::vector<double> pulses(n, 0.0);
  const double period = o.sample_rate / o.f0;
  for (double t = 0.0; t < static_cast<double>(n); t += period) {
    pulses[static_cast<std::size_t>(std::lround(t)) % n] = 1.0;
  }
  o.source = reference_allpole(pulses, {-1.8, 0.81});
  o.envelope.assign(n, 1.0);
  if (syllables) {
    // 4 syllables per second with 50 ms of silence between them.
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / o.sample_rate;
      const double phase = std::fmod(t, 0.25);
      o.envelope[i] = phase < 0.2 ? std::pow(std::sin(kPi * phase / 0.2), 2.0) : 0.0;
    }
  }
  std::vector<double> excitation(n);
  for (std::size_t i = 0; i < n; ++i) excitation[i] = o.source[i] * o.envelope[i];
  o.speech = reference_allpole(excitation, formant_filter(o.formants, o.bandwidths, o.sample_rate));
  double peak = 0.0;
  for (double v : o.speech) peak = std::max(peak, std::abs(v));
  for (double& v : o.speech) v *= 0.8 / peak;
  return o;
}

// Brute-force EER: FAR/FRR are counted directly at thresholds below all
// scores, at every midpoint between adjacent distinct scores and above all
// scores. The first threshold where FAR - FRR <= 0 is bracketed with its
// predecessor and the rates are interpolated linearly.
inline double brute_force_eer(const std::vector<double>& bonafide,
                              const std::vector<double>& spoof) {
  std::vector<double> all(bonafide);
  all.insert(all.end(), spoof.begin(), spoof.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  std::vector<double> thresholds{all.front() - 1.0};
  for (std::size_t i = 0; i + 1 < all.size(); ++i) thresholds.push_back(0.5 * (all[i] + all[i + 1]));
  thresholds.push_back(all.back() + 1.0);

  double prev_far = 0.0, prev_frr = 0.0;
  for (std::size_t j = 0; j < thresholds.size(); ++j) {
    const double t = thresholds[j];
    double rejected = 0.0, accepted = 0.0;
    for (double b : bonafide) rejected += b < t ? 1.0 : 0.0;
    for (double s : spoof) accepted += s >= t ? 1.0 : 0.0;
    const double frr = rejected / static_cast<double>(bonafide.size());
    const double far = accepted / static_cast<double>(spoof.size());
    if (far - frr <= 0.0) {
      if (far == frr || j == 0) return far;
      const double d0 = prev_far - prev_frr, d1 = far - frr;
      return prev_far + d0 / (d0 - d1) * (far - prev_far);
    }
    prev_far = far;
    prev_frr = frr;
  }
  return 0.5;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("rhythmaug_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace rhythmaug::testing
