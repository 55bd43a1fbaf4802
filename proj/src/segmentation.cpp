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


#include "mrfcnn/segmentation.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "mrfcnn/errors.hpp"

namespace mrfcnn {

std::size_t segment_count(std::size_t frames, std::size_t n, std::size_t stride) {
  if (n < 1 || stride < 1) throw ParameterError("segment: N and stride must be >= 1");
  if (frames <= n) return 1;
  return 1 + (frames - n + stride - 1) / stride;
}

template <typename T>
SegmentBatch<T> segment(const Tensor<T>& magnitude, std::size_t n, std::size_t stride) {
  require_rank(magnitude, 2, "segment");
  const std::size_t frames = magnitude.dim(0), bins = magnitude.dim(1);
  const std::size_t count = segment_count(frames, n, stride);
  SegmentBatch<T> b;
  b.items = Tensor<T>({count, 1, n, bins});
  b.total_frames = frames;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t start = i * stride;
    b.offsets.push_back(start);
    const std::size_t rows = std::min(n, frames - std::min(frames, start));
    std::copy(magnitude.raw() + start * bins, magnitude.raw() + (start + rows) * bins,
              b.items.raw() + i * n * bins);
  }
  return b;
}

template <typename T>
Tensor<T> desegment(const SegmentBatch<T>& batch, std::size_t total_frames) {
  require_rank(batch.items, 4, "desegment");
  if (batch.offsets.size() != batch.size())
    throw ShapeError("desegment: " + std::to_string(batch.offsets.size()) + " offsets for " +
                     std::to_string(batch.size()) + " items");
  const std::size_t n = batch.frames(), bins = batch.bins();
  std::vector<double> sum(total_frames * bins, 0.0);
  std::vector<std::size_t> hits(total_frames, 0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const T* item = batch.items.raw() + i * n * bins;
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t frame = batch.offsets[i] + r;
      if (frame >= total_frames) break;
      ++hits[frame];
      for (std::size_t k = 0; k < bins; ++k)
        sum[frame * bins + k] += static_cast<double>(item[r * bins + k]);
    }
  }
  Tensor<T> out({total_frames, bins});
  for (std::size_t f = 0; f < total_frames; ++f)
    if (hits[f] > 0)
      for (std::size_t k = 0; k < bins; ++k)
        out[f * bins + k] = static_cast<T>(sum[f * bins + k] / static_cast<double>(hits[f]));
  return out;
}

template SegmentBatch<float> segment(const Tensor<float>&, std::size_t, std::size_t);
template SegmentBatch<double> segment(const Tensor<double>&, std::size_t, std::size_t);
template Tensor<float> desegment(const SegmentBatch<float>&, std::size_t);
template Tensor<double> desegment(const SegmentBatch<double>&, std::size_t);

}  // namespace mrfcnn
