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

#include <complex>
#include <cstddef>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "rhythmaug/dsp.hpp"
#include "rhythmaug/error.hpp"
#include "rhythmaug/matrix.hpp"

namespace rhythmaug {

using Complex = std::complex<double>;
using ComplexMatrix = Matrix<Complex>;

// Real-input FFT returning the one-sided spectrum (n_fft/2 + 1 bins).
// Instances cache twiddle plans and are not safe to share across threads.
class RealFft {
 public:
  explicit RealFft(std::size_t n_fft) : n_fft_(n_fft), input_(n_fft, 0.0) {
    if (n_fft < 2 || n_fft % 2 != 0) {
      throw Error(Errc::kInvalidArgument, "n_fft must be even and >= 2");
    }
    fft_.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  }

  std::size_t size() const noexcept { return n_fft_; }
  std::size_t bins() const noexcept { return n_fft_ / 2 + 1; }

  // Zero-pads frame to n_fft.
  void forward(std::span<const double> frame, std::span<Complex> out) {
    std::fill(input_.begin(), input_.end(), 0.0);
    std::copy(frame.begin(), frame.end(), input_.begin());
    fft_.fwd(spectrum_, input_);
    std::copy(spectrum_.begin(), spectrum_.begin() + static_cast<std::ptrdiff_t>(bins()),
              out.begin());
  }

  // Inverse of a Hermitian half spectrum, scaled by 1/n_fft.
  void inverse(std::span<const Complex> half, std::span<double> out) {
    spectrum_.assign(half.begin(), half.end());
    fft_.inv(output_, spectrum_, static_cast<Eigen::Index>(n_fft_));
    std::copy(output_.begin(), output_.begin() + static_cast<std::ptrdiff_t>(out.size()),
              out.begin());
  }

 private:
  std::size_t n_fft_;
  Eigen::FFT<double> fft_;
  std::vector<double> input_;
  std::vector<double> output_;
  std::vector<Complex> spectrum_;
};

// Frames x with spec (windowed, trailing samples dropped) and transforms each
// frame, zero-padded to n_fft.
inline ComplexMatrix stft(std::span<const double> x, const FrameSpec& spec, std::size_t n_fft) {
  if (spec.win_length > n_fft) {
    throw Error(Errc::kInvalidArgument, "win_length exceeds n_fft");
  }
  const MatrixD frames = frame_signal(x, spec);
  RealFft fft(n_fft);
  ComplexMatrix out(frames.rows(), fft.bins());
  for (std::size_t i = 0; i < frames.rows(); ++i) fft.forward(frames.row(i), out.row(i));
  return out;
}

inline MatrixD magnitude(const ComplexMatrix& spec) {
  MatrixD out(spec.rows(), spec.cols());
  for (std::size_t i = 0; i < spec.data().size(); ++i) out.data()[i] = std::abs(spec.data()[i]);
  return out;
}

// Least-squares inverse STFT: x = sum_i w * ifft(Y_i) / sum_i w^2.
// Samples whose squared-window envelope is at most envelope_floor are
// divided by the floor instead.
inline std::vector<double> istft(const ComplexMatrix& spectra, const FrameSpec& spec,
                                 std::size_t n_fft, double envelope_floor) {
  spec.validate();
  RealFft fft(n_fft);
  if (spectra.rows() > 0 && spectra.cols() != fft.bins()) {
    throw Error(Errc::kShapeMismatch, "spectrum has " + std::to_string(spectra.cols()) +
                                          " bins, expected " + std::to_string(fft.bins()));
  }
  const std::vector<double> w = make_window(spec.window, spec.win_length);
  std::vector<double> out(spec.ola_length(spectra.rows()), 0.0);
  std::vector<double> envelope(out.size(), 0.0);
  std::vector<double> frame(spec.win_length);
  for (std::size_t i = 0; i < spectra.rows(); ++i) {
    fft.inverse(spectra.row(i), frame);
    const std::size_t offset = i * spec.hop_length;
    for (std::size_t n = 0; n < spec.win_length; ++n) {
      out[offset + n] += w[n] * frame[n];
      envelope[offset + n] += w[n] * w[n];
    }
  }
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (envelope[n] > envelope_floor) {
      out[n] /= envelope[n];
    } else {
      out[n] = envelope_floor > 0.0 ? out[n] / envelope_floor : 0.0;
    }
  }
  return out;
}

}  // namespace rhythmaug
