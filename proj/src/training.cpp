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


#include "mrfcnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "mrfcnn/errors.hpp"
#include "mrfcnn/parallel.hpp"

namespace mrfcnn {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ParameterError("train: batch_size must be >= 1");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0))
    throw ParameterError("train: plateau_factor must lie in (0, 1)");
  if (plateau_patience < 1) throw ParameterError("train: plateau_patience must be >= 1");
  if (!(lr0 > 0.0)) throw ParameterError("train: lr0 must be positive");
  if (!(min_lr >= 0.0)) throw ParameterError("train: min_lr must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ParameterError("train: Adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ParameterError("train: epsilon must be positive");
}

template <typename T>
SegmentPairs<T> make_pairs(Tensor<T> inputs, Tensor<T> targets) {
  require_rank(inputs, 4, "make_pairs");
  if (inputs.shape() != targets.shape())
    throw ShapeError("make_pairs: inputs " + shape_string(inputs.shape()) +
                     " vs targets " + shape_string(targets.shape()));
  SegmentPairs<T> p;
  const std::size_t n = inputs.dim(0), frames = inputs.dim(2);
  p.inputs.items = std::move(inputs);
  p.targets.items = std::move(targets);
  for (std::size_t i = 0; i < n; ++i) {
    p.inputs.offsets.push_back(i * frames);
    p.targets.offsets.push_back(i * frames);
  }
  p.inputs.total_frames = p.targets.total_frames = n * frames;
  return p;
}

namespace {

// Squared error of one item; writes scale * (z - s) into grad when given.
template <typename T>
double item_cost(const T* z, const T* s, std::size_t n, T scale, T* grad) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const T d = z[k] - s[k];
    acc += static_cast<double>(d) * static_cast<double>(d);
    if (grad) grad[k] = scale * d;
  }
  return acc;
}

template <typename T>
void check_finite(const ParameterList<T>& grads) {
  for (std::size_t b = 0; b < grads.size(); ++b) {
    const auto& g = grads[b].storage();
    for (std::size_t k = 0; k < g.size(); ++k)
      if (!std::isfinite(g[k]))
        throw NumericError("adam_step: non-finite gradient " + std::to_string(g[k]) +
                           " in parameter block " + std::to_string(b) + " at index " +
                           std::to_string(k));
  }
}

template <typename T>
void add_into(ParameterList<T>& dst, const ParameterList<T>& src) {
  for (std::size_t b = 0; b < dst.size(); ++b) {
    auto& d = dst[b].storage();
    const auto& s = src[b].storage();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += s[k];
  }
}

template <typename T>
void check_pairs(const Model<T>& model, const SegmentPairs<T>& data, const char* what) {
  if (data.inputs.items.shape() != data.targets.items.shape())
    throw ShapeError(std::string(what) + ": input/target shapes differ");
  if (data.size() == 0) return;
  const std::size_t frames = item_frames(model.spec), bins = item_bins(model.spec);
  if (data.inputs.frames() != frames || data.inputs.bins() != bins)
    throw ShapeError(std::string(what) + ": items are " +
                     std::to_string(data.inputs.frames()) + "x" +
                     std::to_string(data.inputs.bins()) + ", model expects " +
                     std::to_string(frames) + "x" + std::to_string(bins));
}

}  // namespace

template <typename T>
CostResult<T> mse_cost(const SegmentBatch<T>& z, const SegmentBatch<T>& s) {
  if (z.items.shape() != s.items.shape())
    throw ShapeError("mse_cost: " + shape_string(z.items.shape()) + " vs " +
                     shape_string(s.items.shape()));
  CostResult<T> r;
  r.grad = z;
  const std::size_t b = z.size();
  if (b == 0) return r;
  const std::size_t n = z.item_size();
  const T scale = T(2) / static_cast<T>(b);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i)
    total += item_cost(z.items.raw() + i * n, s.items.raw() + i * n, n, scale,
                       r.grad.items.raw() + i * n);
  r.cost = total / static_cast<double>(b);
  return r;
}

template <typename T>
AdamState<T> make_adam_state(const ParameterList<T>& params) {
  return AdamState<T>{zeros_like(params), zeros_like(params), 0};
}

template <typename T>
void adam_step(ParameterList<T>& params, const ParameterList<T>& grads,
               AdamState<T>& state, double lr, const TrainConfig& config) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size())
    throw ShapeError("adam_step: parameter, gradient and state block counts differ");
  for (std::size_t b = 0; b < params.size(); ++b)
    if (grads[b].shape() != params[b].shape() || state.m[b].shape() != params[b].shape() ||
        state.v[b].shape() != params[b].shape())
      throw ShapeError("adam_step: block " + std::to_string(b) + " shape mismatch");
  check_finite(grads);

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const T b1 = static_cast<T>(config.beta1), b2 = static_cast<T>(config.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(config.beta1, t));
  const T c2 = static_cast<T>(1.0 - std::pow(config.beta2, t));
  const T step = static_cast<T>(lr), eps = static_cast<T>(config.epsilon);
  for (std::size_t b = 0; b < params.size(); ++b) {
    T* p = params[b].raw();
    T* m = state.m[b].raw();
    T* v = state.v[b].raw();
    const T* g = grads[b].raw();
    for (std::size_t k = 0, n = params[b].size(); k < n; ++k) {
      m[k] = b1 * m[k] + (T(1) - b1) * g[k];
      v[k] = b2 * v[k] + (T(1) - b2) * g[k] * g[k];
      p[k] -= step * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
    }
  }
}

template <typename T>
void adam_step(Model<T>& model, const ParameterList<T>& grads, AdamState<T>& state,
               double lr, const TrainConfig& config) {
  adam_step(model.params, grads, state, lr, config);
  ++model.version;
}

double plateau_update(const std::vector<double>& history, double lr,
                      const TrainConfig& config) {
  if (history.empty()) throw ParameterError("plateau_update: empty history");
  double best = history.front();
  std::size_t wait = 0;
  bool reduce = false;
  for (std::size_t i = 1; i < history.size(); ++i) {
    reduce = false;
    if (history[i] < best) {
      best = history[i];
      wait = 0;
    } else if (++wait >= config.plateau_patience) {
      reduce = true;
      wait = 0;
    }
  }
  return reduce ? std::max(lr * config.plateau_factor, config.min_lr) : lr;
}

void write_history_csv(const std::filesystem::path& path, const TrainHistory& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write history " + path.string());
  out << "epoch,train_cost,val_cost,lr\n";
  char line[128];
  for (const auto& e : history.epochs) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", e.epoch, e.train_cost,
                  e.val_cost, e.lr);
    out << line;
  }
  if (!out) throw IoError("failed writing history " + path.string());
}

template <typename T>
double batch_gradient(const Model<T>& model, const SegmentPairs<T>& data,
                      const std::vector<std::size_t>& indices, ParameterList<T>& grads,
                      unsigned threads) {
  grads = zeros_like(model.params);
  const std::size_t b = indices.size();
  if (b == 0) return 0.0;
  const std::size_t n = data.inputs.item_size();
  const T scale = T(2) / static_cast<T>(b);
  const unsigned workers = resolve_thread_count(threads, b);

  std::vector<ParameterList<T>> slot_grads(workers);
  std::vector<double> slot_cost(workers);
  double total = 0.0;
  for (std::size_t start = 0; start < b; start += workers) {
    const std::size_t count = std::min<std::size_t>(workers, b - start);
    parallel_for(count, workers, [&](std::size_t j) {
      const std::size_t i = indices[start + j];
      ItemCache<T> cache;
      const Tensor<T> z = forward_item(model, data.inputs.item(i), &cache);
      Tensor<T> g(z.shape());
      slot_cost[j] = item_cost(z.raw(), data.targets.items.raw() + i * n, n, scale, g.raw());
      backward_item(model, cache, g, slot_grads[j]);
    });
    for (std::size_t j = 0; j < count; ++j) {
      total += slot_cost[j];
      add_into(grads, slot_grads[j]);
    }
  }
  return total / static_cast<double>(b);
}

template <typename T>
double evaluate_cost(const Model<T>& model, const SegmentPairs<T>& data, unsigned threads) {
  const std::size_t count = data.size();
  if (count == 0) return 0.0;
  const std::size_t n = data.inputs.item_size();
  std::vector<double> costs(count);
  parallel_for(count, threads, [&](std::size_t i) {
    const Tensor<T> z = forward_item(model, data.inputs.item(i));
    costs[i] = item_cost<T>(z.raw(), data.targets.items.raw() + i * n, n, T(0), nullptr);
  });
  return std::accumulate(costs.begin(), costs.end(), 0.0) / static_cast<double>(count);
}

template <typename T>
TrainResult<T> train(const Model<T>& model, const SegmentPairs<T>& train_set,
                     const SegmentPairs<T>& validation_set, const TrainConfig& config,
                     const TrainCallbacks<T>& callbacks) {
  config.validate();
  TrainResult<T> result{model, {}};
  if (config.max_epochs == 0) return result;
  if (train_set.size() == 0) throw ParameterError("train: empty training set");
  check_pairs(model, train_set, "train");
  check_pairs(model, validation_set, "train");
  result.history.validation_fallback = validation_set.size() == 0;

  Model<T> current = model;
  AdamState<T> adam = make_adam_state(current.params);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> schedule_costs;
  double lr = config.lr0;
  double best = std::numeric_limits<double>::infinity();
  ParameterList<T> grads;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double cost_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(stop));
      cost_sum += batch_gradient(current, train_set, batch, grads, config.threads) *
                  static_cast<double>(batch.size());
      adam_step(current, grads, adam, lr, config);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_cost = cost_sum / static_cast<double>(order.size());
    rec.val_cost = result.history.validation_fallback
                       ? rec.train_cost
                       : evaluate_cost(current, validation_set, config.threads);
    rec.lr = lr;
    result.history.epochs.push_back(rec);
    if (!std::isfinite(rec.val_cost))
      throw NumericError("train: non-finite cost at epoch " + std::to_string(epoch));

    if (rec.val_cost < best) {
      best = rec.val_cost;
      result.model = current;
      result.history.best_epoch = epoch;
      result.history.best_cost = best;
      if (callbacks.on_improvement) callbacks.on_improvement(result.model, rec);
    }
    if (callbacks.on_epoch) callbacks.on_epoch(rec);
    schedule_costs.push_back(rec.val_cost);
    lr = plateau_update(schedule_costs, lr, config);
  }
  return result;
}

#define MRFCNN_INSTANTIATE_TRAINING(T)                                                   \
  template SegmentPairs<T> make_pairs(Tensor<T>, Tensor<T>);                             \
  template CostResult<T> mse_cost(const SegmentBatch<T>&, const SegmentBatch<T>&);       \
  template AdamState<T> make_adam_state(const ParameterList<T>&);                        \
  template void adam_step(ParameterList<T>&, const ParameterList<T>&, AdamState<T>&,     \
                          double, const TrainConfig&);                                   \
  template void adam_step(Model<T>&, const ParameterList<T>&, AdamState<T>&, double,     \
                          const TrainConfig&);                                           \
  template double batch_gradient(const Model<T>&, const SegmentPairs<T>&,                \
                                 const std::vector<std::size_t>&, ParameterList<T>&,     \
                                 unsigned);                                              \
  template double evaluate_cost(const Model<T>&, const SegmentPairs<T>&, unsigned);      \
  template TrainResult<T> train(const Model<T>&, const SegmentPairs<T>&,                 \
                                const SegmentPairs<T>&, const TrainConfig&,              \
                                const TrainCallbacks<T>&);

MRFCNN_INSTANTIATE_TRAINING(float)
MRFCNN_INSTANTIATE_TRAINING(double)

}  // namespace mrfcnn
