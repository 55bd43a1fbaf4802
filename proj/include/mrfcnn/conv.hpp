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
#include <span>
#include <vector>

#include "mrfcnn/tensor.hpp"

namespace mrfcnn {

// Execution strategy for stride-1 "same" cross-correlation. All paths
// compute the same function; `direct` is the reference the others are
// tested against.
enum class ConvPath {
  automatic,  // cheapest of the three by a rough cost model
  direct,
  im2col,
  fft,
};

// Filter sets with at least this many filters amortize the im2col buffer.
inline constexpr std::size_t kIm2colMinFilters = 8;

ConvPath resolve_conv_path(ConvPath requested, std::size_t in_channels,
                           std::size_t out_channels, std::size_t height,
                           std::size_t width, std::size_t kernel_height,
                           std::size_t kernel_width);

// output[o,y,x] = bias[o] + sum_{c,u,v} input[c, y+u-a/2, x+v-b/2] *
// filters[o,c,u,v], reading out-of-range input as zero. Input is
// [C_in, H, W], filters [C_out, C_in, a, b], output [C_out, H, W]. The kernel
// may be larger than the input.
template <typename T>
Tensor<T> conv2d_same(const Tensor<T>& input, const Tensor<T>& filters,
                      std::span<const T> bias,
                      ConvPath path = ConvPath::automatic);

template <typename T>
struct ConvGradients {
  Tensor<T> input;
  Tensor<T> filters;
  std::vector<T> bias;
};

// Gradients of sum(conv2d_same(input, filters, bias) * grad_output).
template <typename T>
ConvGradients<T> conv2d_same_backward(const Tensor<T>& input,
                                      const Tensor<T>& filters,
                                      const Tensor<T>& grad_output,
                                      ConvPath path = ConvPath::automatic);

// Stacks [C_j, H, W] parts along channels in list order.
template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>> parts);

template <typename T>
Tensor<T> slice_channels(const Tensor<T>& t, std::size_t begin,
                         std::size_t count);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

// Passes grad where x > 0; the subgradient at exactly 0 is 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& grad_output);

}  // namespace mrfcnn
