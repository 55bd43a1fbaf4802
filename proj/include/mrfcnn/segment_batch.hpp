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

#include <cstddef>
#include <vector>

#include "mrfcnn/tensor.hpp"

namespace mrfcnn {

// Batch of network I/O tiles: items is [batch, 1, N, F]. offsets[i] is the
// first spectrogram frame of item i, used to put predictions back in place.
template <typename T>
struct SegmentBatch {
  Tensor<T> items;
  std::vector<std::size_t> offsets;
  std::size_t total_frames = 0;

  std::size_t size() const { return items.empty() ? 0 : items.dim(0); }
  std::size_t frames() const { return items.dim(2); }
  std::size_t bins() const { return items.dim(3); }
  std::size_t item_size() const { return items.dim(2) * items.dim(3); }

  Tensor<T> item(std::size_t i) const {
    const std::size_t n = item_size();
    std::vector<T> data(items.storage().begin() + i * n,
                        items.storage().begin() + (i + 1) * n);
    return Tensor<T>({1, frames(), bins()}, std::move(data));
  }
};

// Packs [1, N, F] items into a [batch, 1, N, F] tensor.
template <typename T>
Tensor<T> stack_items(const std::vector<Tensor<T>>& items) {
  if (items.empty()) throw ShapeError("stack_items: no items");
  const Shape& s = items.front().shape();
  require_rank(items.front(), 3, "stack_items");
  std::vector<T> data;
  data.reserve(items.size() * items.front().size());
  for (const auto& it : items) {
    if (it.shape() != s)
      throw ShapeError("stack_items: item shape " + shape_string(it.shape()) +
                       " differs from " + shape_string(s));
    data.insert(data.end(), it.storage().begin(), it.storage().end());
  }
  return Tensor<T>({items.size(), s[0], s[1], s[2]}, std::move(data));
}

}  // namespace mrfcnn
