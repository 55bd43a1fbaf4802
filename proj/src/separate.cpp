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


#include "mrfcnn/separate.hpp"

#include <algorithm>
#include <string>

#include "mrfcnn/errors.hpp"
#include "mrfcnn/parallel.hpp"
#include "mrfcnn/segmentation.hpp"

namespace mrfcnn {

template <typename T>
Tensor<T> estimate_magnitude(const Model<T>& model, const Tensor<T>& mixture_magnitude,
                             const SeparateOptions& options) {
  require_rank(mixture_magnitude, 2, "separate");
  const std::size_t bins = item_bins(model.spec);
  if (mixture_magnitude.dim(1) != bins)
    throw ParameterError("separate: model expects " + std::to_string(bins) +
                         " frequency bins, STFT gives " +
                         std::to_string(mixture_magnitude.dim(1)));
  if (!(options.magnitude_scale > 0.0))
    throw ParameterError("separate: magnitude_scale must be positive");
  const std::size_t n = item_frames(model.spec);
  const std::size_t stride = n == 1 ? 1 : options.stride;
  const T scale = static_cast<T>(options.magnitude_scale);

  Tensor<T> scaled = mixture_magnitude;
  for (auto& v : scaled.storage()) v *= scale;
  SegmentBatch<T> batch = segment(scaled, n, stride);
  const std::size_t item = batch.item_size();
  parallel_for(batch.size(), options.threads, [&](std::size_t i) {
    const Tensor<T> z = forward_item(model, batch.item(i));
    std::copy(z.storage().begin(), z.storage().end(), batch.items.raw() + i * item);
  });
  Tensor<T> est = desegment(batch, mixture_magnitude.dim(0));
  for (auto& v : est.storage()) v = std::max(T(0), v / scale);

  if (options.soft_mask) {
    for (std::size_t i = 0; i < est.size(); ++i) {
      const T s = est[i], y = mixture_magnitude[i];
      const T r = std::max(T(0), y - s);
      const T den = s * s + r * r;
      est[i] = den > T(0) ? y * (s * s / den) : T(0);
    }
  }
  return est;
}

template <typename T>
Waveform separate(const Model<T>& model, const Waveform& mixture,
                  const SeparateOptions& options) {
  const Spectrogram<T> spec = stft<T>(mixture, options.stft);
  const Tensor<T> est = estimate_magnitude(model, magnitude(spec), options);
  Waveform out = istft(from_polar(est, phase(spec), spec));
  out.samples.resize(mixture.samples.size(), 0.0);
  out.sample_rate = mixture.sample_rate;
  return out;
}

template Tensor<float> estimate_magnitude(const Model<float>&, const Tensor<float>&,
                                          const SeparateOptions&);
template Tensor<double> estimate_magnitude(const Model<double>&, const Tensor<double>&,
                                           const SeparateOptions&);
template Waveform separate(const Model<float>&, const Waveform&, const SeparateOptions&);
template Waveform separate(const Model<double>&, const Waveform&, const SeparateOptions&);

}  // namespace mrfcnn
