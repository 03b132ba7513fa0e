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

// Numeric kernel: framing, windows, overlap-add, autocorrelation LPC,
// FIR/IIR filtering and endpoint-anchored linear resampling.
//
// All filters run from a zero initial state, so every frame is processed
// independently and the analysis/synthesis pairs are exact inverses.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "rhythmaug/error.hpp"
#include "rhythmaug/matrix.hpp"

namespace rhythmaug {

enum class WindowKind { kHann, kHamming, kRect };

// Periodic windows, so hann at hop = win/2 sums to a constant.
inline std::vector<double> make_window(WindowKind kind, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (kind == WindowKind::kRect) return w;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(length);
  for (std::size_t n = 0; n < length; ++n) {
    const double c = std::cos(step * static_cast<double>(n));
    w[n] = kind == WindowKind::kHann ? 0.5 - 0.5 * c : 0.54 - 0.46 * c;
  }
  return w;
}

struct FrameSpec {
  std::size_t win_length = 0;
  std::size_t hop_length = 0;
  WindowKind window = WindowKind::kHann;

  void validate() const {
    if (hop_length == 0 || hop_length > win_length) {
      throw Error(Errc::kInvalidArgument,
                  "frame spec requires 0 < hop <= win (win=" + std::to_string(win_length) +
                      ", hop=" + std::to_string(hop_length) + ")");
    }
  }

  std::size_t frame_count(std::size_t signal_length) const {
    if (signal_length < win_length) return 0;
    return 1 + (signal_length - win_length) / hop_length;
  }

  std::size_t ola_length(std::size_t n_frames) const {
    return n_frames == 0 ? 0 : (n_frames - 1) * hop_length + win_length;
  }
};

// y[0] = x[0], y[n] = x[n] - a*x[n-1].
inline std::vector<double> pre_emphasis(std::span<const double> x, double a) {
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  y[0] = x[0];
  for (std::size_t n = 1; n < x.size(); ++n) y[n] = x[n] - a * x[n - 1];
  return y;
}

// Splits x into windowed frames; trailing samples that do not fill a full
// frame are dropped.
inline MatrixD frame_signal(std::span<const double> x, const FrameSpec& spec) {
  spec.validate();
  if (x.size() < spec.win_length) {
    throw Error(Errc::kTooShort, "signal length " + std::to_string(x.size()) +
                                     " < window " + std::to_string(spec.win_length));
  }
  const std::size_t n_frames = spec.frame_count(x.size());
  const std::vector<double> w = make_window(spec.window, spec.win_length);
  MatrixD frames(n_frames, spec.win_length);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const double* src = x.data() + i * spec.hop_length;
    auto dst = frames.row(i);
    for (std::size_t n = 0; n < spec.win_length; ++n) dst[n] = w[n] * src[n];
  }
  return frames;
}

inline constexpr double kOlaEnvelopeFloor = 1e-8;

// Sums frames at hop spacing and divides each sample by the summed window
// envelope, floored at kOlaEnvelopeFloor.
inline std::vector<double> overlap_add(const MatrixD& frames, const FrameSpec& spec) {
  spec.validate();
  if (frames.rows() > 0 && frames.cols() != spec.win_length) {
    throw Error(Errc::kInconsistentFrameLength,
                "frame length " + std::to_string(frames.cols()) + " != window " +
                    std::to_string(spec.win_length));
  }
  const std::vector<double> w = make_window(spec.window, spec.win_length);
  std::vector<double> out(spec.ola_length(frames.rows()), 0.0);
  std::vector<double> envelope(out.size(), 0.0);
  for (std::size_t i = 0; i < frames.rows(); ++i) {
    const std::size_t offset = i * spec.hop_length;
    const auto frame = frames.row(i);
    for (std::size_t n = 0; n < spec.win_length; ++n) {
      out[offset + n] += frame[n];
      envelope[offset + n] += w[n];
    }
  }
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] /= std::max(envelope[n], kOlaEnvelopeFloor);
  }
  return out;
}

inline std::vector<double> overlap_add(std::span<const std::vector<double>> frames,
                                       const FrameSpec& spec) {
  MatrixD packed(frames.size(), spec.win_length);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].size() != spec.win_length) {
      throw Error(Errc::kInconsistentFrameLength,
                  "frame " + std::to_string(i) + " has length " + std::to_string(frames[i].size()) +
                      ", expected " + std::to_string(spec.win_length));
    }
    std::copy(frames[i].begin(), frames[i].end(), packed.row(i).begin());
  }
  return overlap_add(packed, spec);
}

// Biased autocorrelation r[k] = sum_n x[n] x[n+k], k = 0..max_lag.
inline std::vector<double> autocorrelation(std::span<const double> frame, std::size_t max_lag) {
  if (max_lag >= frame.size()) {
    throw Error(Errc::kLagTooLarge, "max_lag " + std::to_string(max_lag) +
                                        " >= frame length " + std::to_string(frame.size()));
  }
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double acc = 0.0;
    for (std::size_t n = 0; n + k < frame.size(); ++n) acc += frame[n] * frame[n + k];
    r[k] = acc;
  }
  return r;
}

// All-pole model 1/A(z) with A(z) = 1 + sum_k coeffs[k-1] z^-k.
struct LpcModel {
  std::vector<double> coeffs;
  double gain = 0.0;
  // Reflection coefficients from the Levinson recursion; all |k| < 1.
  std::vector<double> reflection;

  std::size_t order() const noexcept { return coeffs.size(); }

  bool is_minimum_phase() const {
    return std::all_of(reflection.begin(), reflection.end(),
                       [](double k) { return std::abs(k) < 1.0; });
  }
};

inline constexpr double kAutocorrelationRegularization = 1e-6;

// Levinson-Durbin recursion on r[0..order]. r[0] is scaled by
// (1 + regularization) first. A silent frame (r[0] == 0) yields the
// all-zero model with zero gain.
inline LpcModel levinson_durbin(std::span<const double> r, std::size_t order,
                                double regularization = kAutocorrelationRegularization) {
  if (r.size() < order + 1) {
    throw Error(Errc::kInvalidArgument, "autocorrelation has " + std::to_string(r.size()) +
                                            " lags, order " + std::to_string(order) + " needs " +
                                            std::to_string(order + 1));
  }
  LpcModel model;
  model.coeffs.assign(order, 0.0);
  model.reflection.assign(order, 0.0);
  for (std::size_t k = 0; k <= order; ++k) {
    if (!std::isfinite(r[k])) throw Error(Errc::kUnstableFrame, "non-finite autocorrelation");
  }
  double error = r[0] * (1.0 + regularization);
  if (error == 0.0) return model;
  if (error < 0.0) throw Error(Errc::kUnstableFrame, "negative frame energy");

  std::vector<double>& a = model.coeffs;
  std::vector<double> prev(order, 0.0);
  for (std::size_t i = 1; i <= order; ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc += a[j - 1] * r[i - j];
    const double k = -acc / error;
    if (!(std::abs(k) < 1.0)) {
      throw Error(Errc::kUnstableFrame,
                  "reflection coefficient " + std::to_string(i) + " = " + std::to_string(k));
    }
    std::copy(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(i - 1), prev.begin());
    for (std::size_t j = 1; j < i; ++j) a[j - 1] = prev[j - 1] + k * prev[i - j - 1];
    a[i - 1] = k;
    model.reflection[i - 1] = k;
    error *= 1.0 - k * k;
  }
  model.gain = std::sqrt(std::max(error, 0.0));
  return model;
}

inline LpcModel lpc_analysis(std::span<const double> frame, std::size_t order) {
  return levinson_durbin(autocorrelation(frame, order), order);
}

// FIR inverse filter e[n] = x[n] + sum_k a[k] x[n-k].
inline std::vector<double> inverse_filter(std::span<const double> x, const LpcModel& model) {
  const auto& a = model.coeffs;
  std::vector<double> e(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = x[n];
    const std::size_t taps = std::min(a.size(), n);
    for (std::size_t k = 1; k <= taps; ++k) acc += a[k - 1] * x[n - k];
    e[n] = acc;
  }
  return e;
}

// IIR synthesis filter y[n] = e[n] - sum_k a[k] y[n-k].
inline std::vector<double> allpole_filter(std::span<const double> e, const LpcModel& model) {
  const auto& a = model.coeffs;
  std::vector<double> y(e.size());
  for (std::size_t n = 0; n < e.size(); ++n) {
    double acc = e[n];
    const std::size_t taps = std::min(a.size(), n);
    for (std::size_t k = 1; k <= taps; ++k) acc -= a[k - 1] * y[n - k];
    y[n] = acc;
  }
  return y;
}

// y[n] = x[n] + d*y[n-1]; inverse of the lip-radiation differentiator.
inline std::vector<double> leaky_integrate(std::span<const double> x, double d) {
  std::vector<double> y(x.size());
  double prev = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    prev = x[n] + d * prev;
    y[n] = prev;
  }
  return y;
}

inline constexpr double kDefaultLipCoefficient = 0.99;

// Lip radiation L(z) = 1 - d z^-1.
struct LipRadiation {
  double d = kDefaultLipCoefficient;

  std::vector<double> apply(std::span<const double> x) const { return pre_emphasis(x, d); }
  std::vector<double> cancel(std::span<const double> x) const { return leaky_integrate(x, d); }
};

// max(1, round(length * factor)), rounding half away from zero.
inline std::size_t resampled_length(std::size_t length, double factor) {
  const double scaled = std::round(static_cast<double>(length) * factor);
  return scaled < 1.0 ? 1 : static_cast<std::size_t>(scaled);
}

namespace detail {

struct InterpPoint {
  std::size_t index = 0;
  double frac = 0.0;
};

// Endpoint-anchored grid: output i samples input position i*(L-1)/(L'-1).
inline std::vector<InterpPoint> interpolation_grid(std::size_t in_length, std::size_t out_length) {
  std::vector<InterpPoint> grid(out_length);
  if (out_length == 1 || in_length == 1) return grid;
  const double last = static_cast<double>(in_length - 1);
  const double denom = static_cast<double>(out_length - 1);
  for (std::size_t i = 0; i < out_length; ++i) {
    const double pos = static_cast<double>(i) * last / denom;
    auto idx = static_cast<std::size_t>(std::floor(pos));
    if (idx >= in_length - 1) {
      grid[i] = {in_length - 1, 0.0};
    } else {
      grid[i] = {idx, pos - static_cast<double>(idx)};
    }
  }
  return grid;
}

inline double lerp_bounded(double a, double b, double t) {
  if (t == 0.0) return a;
  const double v = a + t * (b - a);
  return std::clamp(v, std::min(a, b), std::max(a, b));
}

}  // namespace detail

inline std::vector<double> linear_resample(std::span<const double> seq, double factor) {
  if (seq.empty()) throw Error(Errc::kInvalidArgument, "cannot resample an empty sequence");
  if (!(factor > 0.0)) throw Error(Errc::kInvalidArgument, "resampling factor must be > 0");
  const std::size_t out_length = resampled_length(seq.size(), factor);
  const auto grid = detail::interpolation_grid(seq.size(), out_length);
  std::vector<double> out(out_length);
  for (std::size_t i = 0; i < out_length; ++i) {
    const auto [idx, t] = grid[i];
    out[i] = t == 0.0 ? seq[idx] : detail::lerp_bounded(seq[idx], seq[idx + 1], t);
  }
  return out;
}

// Frame-major variant: every column is resampled along the row (time) axis.
inline MatrixD linear_resample(const MatrixD& seq, double factor) {
  if (seq.rows() == 0) throw Error(Errc::kInvalidArgument, "cannot resample an empty sequence");
  if (!(factor > 0.0)) throw Error(Errc::kInvalidArgument, "resampling factor must be > 0");
  const std::size_t out_length = resampled_length(seq.rows(), factor);
  const auto grid = detail::interpolation_grid(seq.rows(), out_length);
  MatrixD out(out_length, seq.cols());
  for (std::size_t i = 0; i < out_length; ++i) {
    const auto [idx, t] = grid[i];
    const auto lo = seq.row(idx);
    auto dst = out.row(i);
    if (t == 0.0) {
      std::copy(lo.begin(), lo.end(), dst.begin());
      continue;
    }
    const auto hi = seq.row(idx + 1);
    for (std::size_t c = 0; c < seq.cols(); ++c) dst[c] = detail::lerp_bounded(lo[c], hi[c], t);
  }
  return out;
}

// Second-order section, transposed direct form II, normalized so a0 = 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  void process(std::span<double> x) const {
    double s1 = 0.0, s2 = 0.0;
    for (double& v : x) {
      const double in = v;
      const double out = b0 * in + s1;
      s1 = b1 * in - a1 * out + s2;
      s2 = b2 * in - a2 * out;
      v = out;
    }
  }
};

// Bilinear-transform high-pass section with pre-warping:
//   w0 = 2*pi*fc/fs, alpha = sin(w0)/(2Q)
//   b = [(1+cos w0)/2, -(1+cos w0), (1+cos w0)/2], a = [1+alpha, -2cos w0, 1-alpha]
inline Biquad highpass_section(double cutoff_hz, double sample_rate, double q) {
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / sample_rate;
  const double cw = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  Biquad s;
  s.b0 = (1.0 + cw) / 2.0 / a0;
  s.b1 = -(1.0 + cw) / a0;
  s.b2 = s.b0;
  s.a1 = -2.0 * cw / a0;
  s.a2 = (1.0 - alpha) / a0;
  return s;
}

// 4th-order Butterworth high-pass as two cascaded sections. The pole pairs
// of a 4th-order Butterworth prototype sit at angles pi/8 and 3pi/8, giving
// Q = 1/(2cos(pi/8)) = 0.5412 and Q = 1/(2cos(3pi/8)) = 1.3066.
inline std::vector<double> butterworth_highpass4(std::span<const double> x, double cutoff_hz,
                                                 double sample_rate) {
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate / 2.0)) {
    throw Error(Errc::kInvalidArgument, "high-pass cutoff must lie in (0, fs/2)");
  }
  std::vector<double> y(x.begin(), x.end());
  const double q1 = 1.0 / (2.0 * std::cos(std::numbers::pi / 8.0));
  const double q2 = 1.0 / (2.0 * std::cos(3.0 * std::numbers::pi / 8.0));
  highpass_section(cutoff_hz, sample_rate, q1).process(y);
  highpass_section(cutoff_hz, sample_rate, q2).process(y);
  return y;
}

inline constexpr double kOutputPeak = 0.95;

inline double peak_abs(std::span<const double> x) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  return peak;
}

// Scales x so its peak magnitude equals target; an all-zero signal is left
// untouched.
inline void peak_normalize(std::span<double> x, double target) {
  const double peak = peak_abs(x);
  if (peak == 0.0) return;
  const double scale = target / peak;
  for (double& v : x) v *= scale;
}

}  // namespace rhythmaug
