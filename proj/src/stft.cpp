// Copyright 2026 The mrfcnn Authors
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


#include "mrfcnn/stft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "mrfcnn/errors.hpp"

namespace mrfcnn {
namespace {

constexpr double kEdgeNormFloor = 1e-2;

}  // namespace

void StftParams::validate() const {
  if (window < 2) throw ParameterError("stft: window must be >= 2");
  if (hop < 1) throw ParameterError("stft: hop must be >= 1");
  if (fft < window)
    throw ParameterError("stft: fft size " + std::to_string(fft) + " is smaller than window " +
                         std::to_string(window));
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k)
    w[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                static_cast<double>(n));
  return w;
}

std::size_t stft_frame_count(std::size_t length, const StftParams& params) {
  if (length <= params.window) return 1;
  return 1 + (length - params.window) / params.hop;
}

template <typename T>
Spectrogram<T> stft(const Waveform& wave, const StftParams& params) {
  params.validate();
  Spectrogram<T> s;
  s.params = params;
  s.signal_length = wave.samples.size();
  s.sample_rate = wave.sample_rate;
  s.padded = wave.samples.size() < params.window;
  s.num_frames = stft_frame_count(wave.samples.size(), params);
  const std::size_t bins = params.bins();
  s.frames.resize(s.num_frames * bins);

  const auto w = hann_window(params.window);
  Eigen::FFT<T> fft;
  std::vector<T> buf(params.fft);
  std::vector<std::complex<T>> out;
  for (std::size_t f = 0; f < s.num_frames; ++f) {
    const std::size_t start = f * params.hop;
    std::fill(buf.begin(), buf.end(), T(0));
    for (std::size_t k = 0; k < params.window && start + k < wave.samples.size(); ++k)
      buf[k] = static_cast<T>(wave.samples[start + k] * w[k]);
    fft.fwd(out, buf);
    std::copy(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(bins),
              s.frames.begin() + static_cast<std::ptrdiff_t>(f * bins));
  }
  return s;
}

template <typename T>
Waveform istft(const Spectrogram<T>& spec) {
  const StftParams& p = spec.params;
  p.validate();
  const std::size_t bins = p.bins();
  if (spec.frames.size() != spec.num_frames * bins)
    throw ShapeError("istft: frame buffer holds " + std::to_string(spec.frames.size()) +
                     " values, expected " + std::to_string(spec.num_frames * bins));
  Waveform out;
  out.sample_rate = spec.sample_rate;
  if (spec.num_frames == 0) return out;
  const std::size_t length = (spec.num_frames - 1) * p.hop + p.window;
  std::vector<double> acc(length, 0.0), norm(length, 0.0);
  const auto w = hann_window(p.window);

  Eigen::FFT<T> fft;
  std::vector<std::complex<T>> full(p.fft);
  std::vector<T> time;
  for (std::size_t f = 0; f < spec.num_frames; ++f) {
    for (std::size_t k = 0; k < bins; ++k) full[k] = spec.at(f, k);
    for (std::size_t k = bins; k < p.fft; ++k) full[k] = std::conj(full[p.fft - k]);
    // Bins 0 and fft/2 of a real signal are real.
    full[0] = std::complex<T>(full[0].real(), T(0));
    if (p.fft % 2 == 0) full[p.fft / 2] = std::complex<T>(full[p.fft / 2].real(), T(0));
    fft.inv(time, full);
    const std::size_t start = f * p.hop;
    for (std::size_t k = 0; k < p.window; ++k) {
      acc[start + k] += static_cast<double>(time[k]) * w[k];
      norm[start + k] += w[k] * w[k];
    }
  }
  // Near the ends the window sum falls towards zero; dividing by it would
  // amplify any modification of the spectrogram without bound, so it is
  // floored at a small fraction of its peak there.
  const double floor = kEdgeNormFloor * *std::max_element(norm.begin(), norm.end());
  out.samples.assign(length, 0.0);
  for (std::size_t i = 0; i < length; ++i) {
    const bool edge = i < p.window || i + p.window >= length;
    if (norm[i] > 1e-10 && (norm[i] >= floor || !edge)) {
      out.samples[i] = acc[i] / norm[i];
    } else if (edge) {
      out.samples[i] = acc[i] / floor;
    } else if (i >= p.window && i + p.window < length) {
      throw ParameterError("istft: window sum vanishes at interior sample " +
                           std::to_string(i) + " (hop " + std::to_string(p.hop) +
                           ", window " + std::to_string(p.window) + ")");
    }
  }
  return out;
}

template <typename T>
Tensor<T> magnitude(const Spectrogram<T>& spec) {
  Tensor<T> m({spec.num_frames, spec.bins()});
  for (std::size_t i = 0; i < spec.frames.size(); ++i) m[i] = std::abs(spec.frames[i]);
  return m;
}

template <typename T>
Tensor<T> phase(const Spectrogram<T>& spec) {
  Tensor<T> m({spec.num_frames, spec.bins()});
  for (std::size_t i = 0; i < spec.frames.size(); ++i) m[i] = std::arg(spec.frames[i]);
  return m;
}

template <typename T>
Spectrogram<T> from_polar(const Tensor<T>& mag, const Tensor<T>& ph, const Spectrogram<T>& like) {
  const Shape expect{like.num_frames, like.bins()};
  if (mag.shape() != expect || ph.shape() != expect)
    throw ShapeError("from_polar: expected " + shape_string(expect) + ", got " +
                     shape_string(mag.shape()) + " and " + shape_string(ph.shape()));
  Spectrogram<T> s = like;
  for (std::size_t i = 0; i < s.frames.size(); ++i) s.frames[i] = std::polar(mag[i], ph[i]);
  return s;
}

#define MRFCNN_INSTANTIATE_STFT(T)                                                \
  template Spectrogram<T> stft(const Waveform&, const StftParams&);               \
  template Waveform istft(const Spectrogram<T>&);                                 \
  template Tensor<T> magnitude(const Spectrogram<T>&);                            \
  template Tensor<T> phase(const Spectrogram<T>&);                                \
  template Spectrogram<T> from_polar(const Tensor<T>&, const Tensor<T>&,          \
                                     const Spectrogram<T>&);

MRFCNN_INSTANTIATE_STFT(float)
MRFCNN_INSTANTIATE_STFT(double)

}  // namespace mrfcnn
