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

#include "mrfcnn/segment_batch.hpp"
#include "mrfcnn/tensor.hpp"

namespace mrfcnn {

// 1 when frames <= n, else 1 + ceil((frames - n) / stride).
std::size_t segment_count(std::size_t frames, std::size_t n, std::size_t stride);

// magnitude [frames, bins] -> items [count, 1, n, bins]; the tail past the
// last frame is zero.
template <typename T>
SegmentBatch<T> segment(const Tensor<T>& magnitude, std::size_t n, std::size_t stride);

// Inverse of segment: frames covered by several items are averaged, frames
// covered by none are 0, padding beyond total_frames is dropped.
template <typename T>
Tensor<T> desegment(const SegmentBatch<T>& batch, std::size_t total_frames);

}  // namespace mrfcnn
