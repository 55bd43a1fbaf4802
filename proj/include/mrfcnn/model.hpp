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
#include <cstdint>
#include <string>
#include <vector>

#include "mrfcnn/conv.hpp"
#include "mrfcnn/network_spec.hpp"
#include "mrfcnn/segment_batch.hpp"
#include "mrfcnn/tensor.hpp"

namespace mrfcnn {

// Parameters are stored as a flat list of blocks. Conv nets: for each layer,
// for each set in listed order, filters [K, C_in, a, b] then bias [K].
// MLPs: for each layer, weights [out, in] then bias [out].
template <typename T>
using ParameterList = std::vector<Tensor<T>>;

struct ParameterBlock {
  std::string name;
  Shape shape;
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  bool is_bias = false;
  std::size_t layer = 0;
};

std::vector<ParameterBlock> parameter_layout(const NetworkSpec& spec);

template <typename T>
struct Model {
  NetworkSpec spec;
  std::uint64_t seed = 0;
  ParameterList<T> params;
  // Incremented whenever params change, so stale caches can be detected.
  std::uint64_t version = 0;

  std::size_t scalar_count() const;
};

// Glorot-style uniform weights U(-sqrt(6/(fan_in+fan_out)), +...), zero
// biases, reproducible for a given seed.
template <typename T>
Model<T> init_model(const NetworkSpec& spec, std::uint64_t seed);

template <typename T>
Model<T> zero_model(const NetworkSpec& spec);

template <typename T>
ParameterList<T> zeros_like(const ParameterList<T>& params);

// Pre-activations of every layer for one item; layer inputs are recomputed
// from them during backward.
template <typename T>
struct ItemCache {
  Tensor<T> input;
  std::vector<Tensor<T>> pre_activations;
};

template <typename T>
struct ForwardCache {
  const void* model = nullptr;
  std::uint64_t version = 0;
  std::vector<ItemCache<T>> items;
};

template <typename T>
struct ForwardResult {
  SegmentBatch<T> output;
  ForwardCache<T> cache;
};

template <typename T>
struct Gradients {
  ParameterList<T> params;
  Tensor<T> input;  // [batch, 1, N, F]
};

// One [1, N, F] item through the network. cache may be null.
template <typename T>
Tensor<T> forward_item(const Model<T>& model, const Tensor<T>& item,
                       ItemCache<T>* cache = nullptr);

// Writes parameter gradients of sum(output * grad_output) into grads
// (overwritten, shaped like model.params) and the input gradient into
// grad_input when non-null.
template <typename T>
void backward_item(const Model<T>& model, const ItemCache<T>& cache,
                   const Tensor<T>& grad_output, ParameterList<T>& grads,
                   Tensor<T>* grad_input = nullptr);

template <typename T>
ForwardResult<T> forward(const Model<T>& model, const SegmentBatch<T>& batch,
                         unsigned threads = 1);

// Parameter gradients are summed over items in item order regardless of
// the thread count.
template <typename T>
Gradients<T> backward(const Model<T>& model, const ForwardCache<T>& cache,
                      const Tensor<T>& grad_output, unsigned threads = 1);

}  // namespace mrfcnn
