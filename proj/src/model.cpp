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

#include "mrfcnn/model.hpp"

#include <cmath>
#include <random>
#include <variant>

#include <Eigen/Core>

#include "mrfcnn/errors.hpp"
#include "mrfcnn/parallel.hpp"

namespace mrfcnn {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
Tensor<T> activate(const Tensor<T>& pre, Activation a) {
  return a == Activation::relu ? relu(pre) : pre;
}

template <typename T>
void check_item(const Model<T>& model, const Tensor<T>& item) {
  const Shape expected{1, item_frames(model.spec), item_bins(model.spec)};
  if (item.shape() != expected)
    throw ShapeError("network input item " + shape_string(item.shape()) +
                     " does not match model input " + shape_string(expected));
}

// ---- conv -----------------------------------------------------------------

template <typename T>
Tensor<T> conv_layer_forward(const LayerSpec& layer, const ParameterList<T>& params, std::size_t first_block,
                             const Tensor<T>& input) {
  if (layer.sets.size() == 1) {
    const auto& bias = params[first_block + 1];
    return conv2d_same<T>(input, params[first_block], bias.data());
  }
  std::vector<Tensor<T>> parts;
  parts.reserve(layer.sets.size());
  for (std::size_t j = 0; j < layer.sets.size(); ++j) {
    const auto& bias = params[first_block + 2 * j + 1];
    parts.push_back(conv2d_same<T>(input, params[first_block + 2 * j], bias.data()));
  }
  return concat_channels<T>(parts);
}

template <typename T>
Tensor<T> conv_forward(const Model<T>& model, const ConvNetworkSpec& spec,
                       const Tensor<T>& item, ItemCache<T>* cache) {
  Tensor<T> x = item;
  std::size_t block = 0;
  if (cache) {
    cache->input = item;
    cache->pre_activations.clear();
  }
  for (const auto& layer : spec.layers) {
    Tensor<T> pre = conv_layer_forward<T>(layer, model.params, block, x);
    block += 2 * layer.sets.size();
    x = activate(pre, layer.activation);
    if (cache) cache->pre_activations.push_back(std::move(pre));
  }
  return x;
}

template <typename T>
void conv_backward(const Model<T>& model, const ConvNetworkSpec& spec,
                   const ItemCache<T>& cache, const Tensor<T>& grad_output,
                   ParameterList<T>& grads, Tensor<T>* grad_input) {
  std::vector<std::size_t> first_block(spec.layers.size());
  std::size_t block = 0;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    first_block[l] = block;
    block += 2 * spec.layers[l].sets.size();
  }
  Tensor<T> grad = grad_output;
  for (std::size_t l = spec.layers.size(); l-- > 0;) {
    const auto& layer = spec.layers[l];
    const Tensor<T>& pre = cache.pre_activations[l];
    const Tensor<T> grad_pre =
        layer.activation == Activation::relu ? relu_backward(pre, grad) : grad;
    const Tensor<T> input =
        l == 0 ? cache.input
               : activate(cache.pre_activations[l - 1], spec.layers[l - 1].activation);
    const bool need_input_grad = l > 0 || grad_input != nullptr;
    Tensor<T> grad_in;
    std::size_t channel = 0;
    for (std::size_t j = 0; j < layer.sets.size(); ++j) {
      const std::size_t k = layer.sets[j].count;
      const Tensor<T> g = layer.sets.size() == 1 ? grad_pre : slice_channels(grad_pre, channel, k);
      channel += k;
      auto cg = conv2d_same_backward<T>(input, model.params[first_block[l] + 2 * j], g);
      grads[first_block[l] + 2 * j] = std::move(cg.filters);
      const std::size_t nbias = cg.bias.size();
      grads[first_block[l] + 2 * j + 1] = Tensor<T>({nbias}, std::move(cg.bias));
      if (!need_input_grad) continue;
      if (j == 0) {
        grad_in = std::move(cg.input);
      } else {
        for (std::size_t i = 0; i < grad_in.size(); ++i) grad_in[i] += cg.input[i];
      }
    }
    if (l == 0) {
      if (grad_input) *grad_input = std::move(grad_in);
    } else {
      grad = std::move(grad_in);
    }
  }
}

// ---- mlp ------------------------------------------------------------------

template <typename T>
Tensor<T> mlp_forward(const Model<T>& model, const MlpSpec& spec,
                      const Tensor<T>& item, ItemCache<T>* cache) {
  if (cache) {
    cache->input = item;
    cache->pre_activations.clear();
  }
  Vector<T> x = Eigen::Map<const Vector<T>>(item.raw(), static_cast<Eigen::Index>(item.size()));
  const std::size_t layers = spec.layer_widths.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& W = model.params[2 * l];
    const auto& b = model.params[2 * l + 1];
    Eigen::Map<const RowMatrix<T>> Wm(W.raw(), static_cast<Eigen::Index>(W.dim(0)),
                                      static_cast<Eigen::Index>(W.dim(1)));
    Vector<T> pre = Wm * x;
    pre += Eigen::Map<const Vector<T>>(b.raw(), static_cast<Eigen::Index>(b.size()));
    const Activation act = l + 1 == layers ? spec.output_activation : spec.hidden_activation;
    x = act == Activation::relu ? Vector<T>(pre.cwiseMax(T(0))) : pre;
    if (cache)
      cache->pre_activations.emplace_back(
          Shape{1, 1, W.dim(0)}, std::vector<T>(pre.data(), pre.data() + pre.size()));
  }
  return Tensor<T>({1, 1, static_cast<std::size_t>(x.size())},
                   std::vector<T>(x.data(), x.data() + x.size()));
}

template <typename T>
void mlp_backward(const Model<T>& model, const MlpSpec& spec,
                  const ItemCache<T>& cache, const Tensor<T>& grad_output,
                  ParameterList<T>& grads, Tensor<T>* grad_input) {
  const std::size_t layers = spec.layer_widths.size() - 1;
  Vector<T> grad = Eigen::Map<const Vector<T>>(grad_output.raw(),
                                               static_cast<Eigen::Index>(grad_output.size()));
  for (std::size_t l = layers; l-- > 0;) {
    const Activation act = l + 1 == layers ? spec.output_activation : spec.hidden_activation;
    const Tensor<T>& pre = cache.pre_activations[l];
    if (act == Activation::relu)
      for (Eigen::Index i = 0; i < grad.size(); ++i)
        if (!(pre[static_cast<std::size_t>(i)] > T(0))) grad[i] = T(0);
    Vector<T> input;
    if (l == 0) {
      input = Eigen::Map<const Vector<T>>(cache.input.raw(),
                                          static_cast<Eigen::Index>(cache.input.size()));
    } else {
      const Tensor<T>& prev = cache.pre_activations[l - 1];
      input = Eigen::Map<const Vector<T>>(prev.raw(), static_cast<Eigen::Index>(prev.size()));
      if (spec.hidden_activation == Activation::relu) input = input.cwiseMax(T(0));
    }
    const auto& W = model.params[2 * l];
    Eigen::Map<const RowMatrix<T>> Wm(W.raw(), static_cast<Eigen::Index>(W.dim(0)),
                                      static_cast<Eigen::Index>(W.dim(1)));
    Tensor<T> gW(W.shape());
    Eigen::Map<RowMatrix<T>>(gW.raw(), Wm.rows(), Wm.cols()).noalias() =
        grad * input.transpose();
    grads[2 * l] = std::move(gW);
    grads[2 * l + 1] = Tensor<T>({static_cast<std::size_t>(grad.size())},
                                 std::vector<T>(grad.data(), grad.data() + grad.size()));
    if (l > 0 || grad_input) {
      Vector<T> next = Wm.transpose() * grad;
      if (l == 0) {
        *grad_input = Tensor<T>({1, 1, static_cast<std::size_t>(next.size())},
                                std::vector<T>(next.data(), next.data() + next.size()));
      } else {
        grad = std::move(next);
      }
    }
  }
}

}  // namespace

std::vector<ParameterBlock> parameter_layout(const NetworkSpec& spec) {
  validate(spec);
  std::vector<ParameterBlock> blocks;
  if (const auto* conv = std::get_if<ConvNetworkSpec>(&spec)) {
    std::size_t in_channels = 1;
    for (std::size_t l = 0; l < conv->layers.size(); ++l) {
      const auto& layer = conv->layers[l];
      for (std::size_t j = 0; j < layer.sets.size(); ++j) {
        const auto& s = layer.sets[j];
        const std::string base =
            "layer" + std::to_string(l + 1) + ".set" + std::to_string(j + 1);
        const std::size_t taps = s.height * s.width;
        blocks.push_back({base + ".filters", {s.count, in_channels, s.height, s.width},
                          taps * in_channels, taps * s.count, false, l});
        blocks.push_back({base + ".bias", {s.count}, 0, 0, true, l});
      }
      in_channels = layer.out_channels();
    }
    return blocks;
  }
  const auto& w = std::get<MlpSpec>(spec).layer_widths;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    const std::string base = "layer" + std::to_string(l + 1);
    blocks.push_back({base + ".weights", {w[l + 1], w[l]}, w[l], w[l + 1], false, l});
    blocks.push_back({base + ".bias", {w[l + 1]}, 0, 0, true, l});
  }
  return blocks;
}

template <typename T>
std::size_t Model<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.size();
  return n;
}

template <typename T>
Model<T> init_model(const NetworkSpec& spec, std::uint64_t seed) {
  Model<T> model{spec, seed, {}, 0};
  std::mt19937_64 rng(seed);
  for (const auto& block : parameter_layout(spec)) {
    Tensor<T> t(block.shape);
    if (!block.is_bias) {
      const double limit =
          std::sqrt(6.0 / static_cast<double>(block.fan_in + block.fan_out));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (auto& v : t.storage()) v = static_cast<T>(dist(rng));
    }
    model.params.push_back(std::move(t));
  }
  return model;
}

template <typename T>
Model<T> zero_model(const NetworkSpec& spec) {
  Model<T> model{spec, 0, {}, 0};
  for (const auto& block : parameter_layout(spec)) model.params.emplace_back(block.shape);
  return model;
}

template <typename T>
ParameterList<T> zeros_like(const ParameterList<T>& params) {
  ParameterList<T> out;
  out.reserve(params.size());
  for (const auto& p : params) out.emplace_back(p.shape());
  return out;
}

template <typename T>
Tensor<T> forward_item(const Model<T>& model, const Tensor<T>& item, ItemCache<T>* cache) {
  check_item(model, item);
  if (const auto* conv = std::get_if<ConvNetworkSpec>(&model.spec))
    return conv_forward(model, *conv, item, cache);
  return mlp_forward(model, std::get<MlpSpec>(model.spec), item, cache);
}

template <typename T>
void backward_item(const Model<T>& model, const ItemCache<T>& cache,
                   const Tensor<T>& grad_output, ParameterList<T>& grads,
                   Tensor<T>* grad_input) {
  check_item(model, cache.input);
  const std::size_t layers = std::visit(
      [](const auto& s) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, ConvNetworkSpec>)
          return s.layers.size();
        else
          return s.layer_widths.size() - 1;
      },
      model.spec);
  if (cache.pre_activations.size() != layers)
    throw ShapeError("backward: cache has " + std::to_string(cache.pre_activations.size()) +
                     " layers, model has " + std::to_string(layers));
  const Shape out_shape{1, item_frames(model.spec), item_bins(model.spec)};
  if (grad_output.shape() != out_shape)
    throw ShapeError("backward: grad_output " + shape_string(grad_output.shape()) +
                     " does not match output " + shape_string(out_shape));
  grads.resize(model.params.size());
  if (const auto* conv = std::get_if<ConvNetworkSpec>(&model.spec))
    conv_backward(model, *conv, cache, grad_output, grads, grad_input);
  else
    mlp_backward(model, std::get<MlpSpec>(model.spec), cache, grad_output, grads, grad_input);
}

template <typename T>
ForwardResult<T> forward(const Model<T>& model, const SegmentBatch<T>& batch,
                         unsigned threads) {
  require_rank(batch.items, 4, "forward");
  const std::size_t n = batch.size();
  ForwardResult<T> result;
  result.cache.model = &model;
  result.cache.version = model.version;
  result.cache.items.resize(n);
  std::vector<Tensor<T>> outputs(n);
  parallel_for(n, threads, [&](std::size_t i) {
    outputs[i] = forward_item(model, batch.item(i), &result.cache.items[i]);
  });
  result.output.items = stack_items(outputs);
  result.output.offsets = batch.offsets;
  result.output.total_frames = batch.total_frames;
  return result;
}

template <typename T>
Gradients<T> backward(const Model<T>& model, const ForwardCache<T>& cache,
                      const Tensor<T>& grad_output, unsigned threads) {
  if (cache.model != &model || cache.version != model.version)
    throw ShapeError("backward: cache was produced by a different or since-updated model");
  require_rank(grad_output, 4, "backward");
  const std::size_t n = cache.items.size();
  if (grad_output.dim(0) != n)
    throw ShapeError("backward: grad_output has " + std::to_string(grad_output.dim(0)) +
                     " items, cache has " + std::to_string(n));
  const std::size_t item_size = grad_output.size() / n;
  const auto item_grad = [&](std::size_t i) {
    return Tensor<T>({1, grad_output.dim(2), grad_output.dim(3)},
                     std::vector<T>(grad_output.storage().begin() + i * item_size,
                                    grad_output.storage().begin() + (i + 1) * item_size));
  };
  std::vector<ParameterList<T>> per_item(n);
  std::vector<Tensor<T>> input_grads(n);
  parallel_for(n, threads, [&](std::size_t i) {
    backward_item(model, cache.items[i], item_grad(i), per_item[i], &input_grads[i]);
  });
  Gradients<T> out{zeros_like(model.params), stack_items(input_grads)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t b = 0; b < out.params.size(); ++b) {
      auto& dst = out.params[b].storage();
      const auto& src = per_item[i][b].storage();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  return out;
}

#define MRFCNN_INSTANTIATE_MODEL(T)                                                   \
  template struct Model<T>;                                                           \
  template Model<T> init_model(const NetworkSpec&, std::uint64_t);                    \
  template Model<T> zero_model(const NetworkSpec&);                                   \
  template ParameterList<T> zeros_like(const ParameterList<T>&);                      \
  template Tensor<T> forward_item(const Model<T>&, const Tensor<T>&, ItemCache<T>*);  \
  template void backward_item(const Model<T>&, const ItemCache<T>&, const Tensor<T>&, \
                              ParameterList<T>&, Tensor<T>*);                         \
  template ForwardResult<T> forward(const Model<T>&, const SegmentBatch<T>&, unsigned); \
  template Gradients<T> backward(const Model<T>&, const ForwardCache<T>&,             \
                                 const Tensor<T>&, unsigned);

MRFCNN_INSTANTIATE_MODEL(float)
MRFCNN_INSTANTIATE_MODEL(double)

}  // namespace mrfcnn
