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


#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "mrfcnn/tensor.hpp"
#include "mrfcnn/wav.hpp"

namespace mrfcnn {

struct StftParams {
  std::size_t window = 2048;
  std::size_t hop = 512;
  std::size_t fft = 2048;

  std::size_t bins() const { return fft / 2 + 1; }
  void validate() const;
};

// Periodic Hann of length n: 0.5 - 0.5 cos(2 pi k / n).
std::vector<double> hann_window(std::size_t n);

template <typename T>
struct Spectrogram {
  StftParams params;
  std::size_t num_frames = 0;
  std::vector<std::complex<T>> frames;  // [num_frames, bins] row-major
  std::size_t signal_length = 0;
  std::uint32_t sample_rate = 44100;
  bool padded = false;  // input was shorter than one window

  std::size_t bins() const { return params.bins(); }
  std::complex<T>& at(std::size_t frame, std::size_t bin) {
    return frames[frame * bins() + bin];
  }
  const std::complex<T>& at(std::size_t frame, std::size_t bin) const {
    return frames[frame * bins() + bin];
  }
};

// 1 + floor((len - window) / hop) frames; shorter signals are zero-padded
// to one window.
std::size_t stft_frame_count(std::size_t length, const StftParams& params);

template <typename T>
Spectrogram<T> stft(const Waveform& wave, const StftParams& params = {});

// Weighted overlap-add normalized by the summed squared window. Within one
// window of either end the sum is floored at 1% of its peak, which tapers
// the first and last few samples; a vanishing sum anywhere else throws
// ParameterError. The result covers
// (num_frames - 1) * hop + window samples.
template <typename T>
Waveform istft(const Spectrogram<T>& spec);

// [num_frames, bins]
template <typename T>
Tensor<T> magnitude(const Spectrogram<T>& spec);

template <typename T>
Tensor<T> phase(const Spectrogram<T>& spec);

// Complex frames from magnitude and phase, keeping the parameters of `like`.
template <typename T>
Spectrogram<T> from_polar(const Tensor<T>& magnitude, const Tensor<T>& phase,
                          const Spectrogram<T>& like);

}  // namespace mrfcnn
