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
#include <filesystem>
#include <functional>
#include <vector>

#include "mrfcnn/model.hpp"
#include "mrfcnn/segment_batch.hpp"

namespace mrfcnn {

struct TrainConfig {
  std::size_t batch_size = 100;
  double lr0 = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double plateau_factor = 0.1;
  std::size_t plateau_patience = 3;
  std::size_t max_epochs = 100;
  double min_lr = 1e-8;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

// Input and target tiles with matching item order.
template <typename T>
struct SegmentPairs {
  SegmentBatch<T> inputs;
  SegmentBatch<T> targets;

  std::size_t size() const { return inputs.size(); }
};

template <typename T>
SegmentPairs<T> make_pairs(Tensor<T> inputs, Tensor<T> targets);

template <typename T>
struct CostResult {
  double cost = 0.0;
  SegmentBatch<T> grad;
};

// Mean over items of the per-segment squared error sum.
template <typename T>
CostResult<T> mse_cost(const SegmentBatch<T>& z, const SegmentBatch<T>& s);

template <typename T>
struct AdamState {
  ParameterList<T> m;
  ParameterList<T> v;
  std::uint64_t t = 0;
};

template <typename T>
AdamState<T> make_adam_state(const ParameterList<T>& params);

// Throws NumericError before touching params if any gradient is not finite.
template <typename T>
void adam_step(ParameterList<T>& params, const ParameterList<T>& grads,
               AdamState<T>& state, double lr, const TrainConfig& config);

template <typename T>
void adam_step(Model<T>& model, const ParameterList<T>& grads,
               AdamState<T>& state, double lr, const TrainConfig& config);

// Learning rate for the epoch after the last entry of `history`. The wait
// counter is replayed from the start, so calling this once per epoch with
// the rate in effect gives the scheduled sequence.
double plateau_update(const std::vector<double>& history, double lr,
                      const TrainConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_cost = 0.0;
  double val_cost = 0.0;
  double lr = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  // Set when validation was empty and train cost drove the schedule.
  bool validation_fallback = false;
  std::size_t best_epoch = 0;
  double best_cost = 0.0;
};

void write_history_csv(const std::filesystem::path& path,
                       const TrainHistory& history);

template <typename T>
struct TrainCallbacks {
  std::function<void(const EpochRecord&)> on_epoch;
  std::function<void(const Model<T>&, const EpochRecord&)> on_improvement;
};

template <typename T>
struct TrainResult {
  Model<T> model;  // best-validation parameters
  TrainHistory history;
};

// Gradient of the mean cost over data items `indices`, reduced in index
// order so the result does not depend on the thread count. Returns the cost.
template <typename T>
double batch_gradient(const Model<T>& model, const SegmentPairs<T>& data,
                      const std::vector<std::size_t>& indices,
                      ParameterList<T>& grads, unsigned threads);

template <typename T>
double evaluate_cost(const Model<T>& model, const SegmentPairs<T>& data,
                     unsigned threads);

template <typename T>
TrainResult<T> train(const Model<T>& model, const SegmentPairs<T>& train_set,
                     const SegmentPairs<T>& validation_set,
                     const TrainConfig& config,
                     const TrainCallbacks<T>& callbacks = {});

}  // namespace mrfcnn
