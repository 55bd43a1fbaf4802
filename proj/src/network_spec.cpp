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

#include "mrfcnn/network_spec.hpp"

#include <algorithm>

#include "mrfcnn/errors.hpp"

namespace mrfcnn {
namespace {

using nlohmann::json;

LayerSpec layer(std::initializer_list<FilterSetSpec> sets) {
  return LayerSpec{sets, Activation::relu};
}

// Mirror-symmetric encoder/decoder around layer 4, plus the single-filter
// N x F output layer.
ConvNetworkSpec mr_fcnn() {
  const auto big = [](std::size_t k) { return FilterSetSpec{k, 13, 21}; };
  const auto mid = [](std::size_t k) { return FilterSetSpec{k, 7, 9}; };
  const auto small = [](std::size_t k) { return FilterSetSpec{k, 3, 3}; };
  ConvNetworkSpec s{15, 1025, {}};
  s.layers = {
      layer({big(12), mid(3), small(3)}), layer({big(3), mid(16), small(3)}),
      layer({big(3), mid(12), small(7)}), layer({big(3), mid(3), small(32)}),
      layer({big(3), mid(12), small(7)}), layer({big(3), mid(16), small(3)}),
      layer({big(12), mid(3), small(3)}), layer({FilterSetSpec{1, 15, 1025}}),
  };
  return s;
}

ConvNetworkSpec fcnn() {
  ConvNetworkSpec s{15, 1025, {}};
  s.layers = {
      layer({{13, 13, 21}}), layer({{18, 9, 13}}), layer({{24, 7, 9}}),
      layer({{42, 3, 3}}),   layer({{24, 7, 9}}),  layer({{18, 9, 13}}),
      layer({{13, 13, 21}}), layer({{1, 15, 1025}}),
  };
  return s;
}

MlpSpec dnn() { return MlpSpec{{1025, 1025, 1025, 1025, 1025}}; }

ConvNetworkSpec toy() {
  ConvNetworkSpec s{4, 6, {}};
  s.layers = {
      layer({{2, 3, 3}, {1, 1, 5}}),
      layer({{2, 3, 3}, {2, 2, 1}}),
      layer({{1, 4, 6}}),
  };
  return s;
}

ConvNetworkSpec mr_fcnn_desk() {
  const auto big = [](std::size_t k) { return FilterSetSpec{k, 7, 9}; };
  const auto mid = [](std::size_t k) { return FilterSetSpec{k, 5, 5}; };
  const auto small = [](std::size_t k) { return FilterSetSpec{k, 3, 3}; };
  ConvNetworkSpec s{15, 129, {}};
  s.layers = {
      layer({big(6), mid(2), small(2)}), layer({big(2), mid(8), small(2)}),
      layer({big(2), mid(6), small(4)}), layer({big(2), mid(2), small(16)}),
      layer({big(2), mid(6), small(4)}), layer({big(2), mid(8), small(2)}),
      layer({big(6), mid(2), small(2)}), layer({FilterSetSpec{1, 15, 129}}),
  };
  return s;
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "none") return Activation::none;
  throw ParameterError("unknown activation '" + s + "' (expected relu|none)");
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> keys,
                    const std::string& where) {
  if (!j.is_object()) throw ParameterError(where + ": expected a JSON object");
  for (const auto& [k, _] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw ParameterError(where + ": unknown key '" + k + "'");
}

std::size_t positive(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParameterError(where + ": missing '" + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw ParameterError(where + ": '" + key + "' must be a positive integer");
  return v.get<std::size_t>();
}

}  // namespace

std::size_t LayerSpec::out_channels() const {
  std::size_t n = 0;
  for (const auto& s : sets) n += s.count;
  return n;
}

std::string_view to_string(Activation a) {
  return a == Activation::relu ? "relu" : "none";
}

void validate(const NetworkSpec& spec) {
  if (const auto* conv = std::get_if<ConvNetworkSpec>(&spec)) {
    if (conv->input_frames < 1 || conv->input_bins < 1)
      throw ParameterError("conv spec: input_frames and input_bins must be >= 1");
    if (conv->layers.empty()) throw ParameterError("conv spec: no layers");
    for (std::size_t i = 0; i < conv->layers.size(); ++i) {
      const auto& l = conv->layers[i];
      if (l.sets.empty())
        throw ParameterError("conv spec: layer " + std::to_string(i + 1) + " has no filter sets");
      for (const auto& s : l.sets)
        if (s.count < 1 || s.height < 1 || s.width < 1)
          throw ParameterError("conv spec: layer " + std::to_string(i + 1) +
                               " has a filter set with a zero dimension");
    }
    if (conv->layers.back().out_channels() != 1)
      throw ParameterError("conv spec: final layer must have exactly 1 filter, has " +
                           std::to_string(conv->layers.back().out_channels()));
    return;
  }
  const auto& mlp = std::get<MlpSpec>(spec);
  if (mlp.layer_widths.size() < 2)
    throw ParameterError("mlp spec: need at least input and output widths");
  for (auto w : mlp.layer_widths)
    if (w < 1) throw ParameterError("mlp spec: widths must be positive");
  if (mlp.layer_widths.front() != mlp.layer_widths.back())
    throw ParameterError("mlp spec: output width must equal input width");
}

std::uint64_t count_parameters(const NetworkSpec& spec) {
  std::uint64_t total = 0;
  if (const auto* conv = std::get_if<ConvNetworkSpec>(&spec)) {
    std::uint64_t in_channels = 1;
    for (const auto& l : conv->layers) {
      for (const auto& s : l.sets)
        total += s.count * (s.height * s.width * in_channels + 1);
      in_channels = l.out_channels();
    }
    return total;
  }
  const auto& w = std::get<MlpSpec>(spec).layer_widths;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) total += w[i] * w[i + 1] + w[i + 1];
  return total;
}

std::size_t item_frames(const NetworkSpec& spec) {
  if (const auto* conv = std::get_if<ConvNetworkSpec>(&spec)) return conv->input_frames;
  return 1;
}

std::size_t item_bins(const NetworkSpec& spec) {
  if (const auto* conv = std::get_if<ConvNetworkSpec>(&spec)) return conv->input_bins;
  return std::get<MlpSpec>(spec).layer_widths.front();
}

std::map<std::string, NetworkSpec> builtin_specs() {
  return {{"mr-fcnn", mr_fcnn()}, {"fcnn", fcnn()}, {"dnn", dnn()}};
}

std::vector<std::string> named_spec_names() {
  return {"mr-fcnn", "fcnn", "dnn", "toy", "mr-fcnn-desk"};
}

NetworkSpec named_spec(std::string_view name) {
  if (name == "toy") return toy();
  if (name == "mr-fcnn-desk") return mr_fcnn_desk();
  auto specs = builtin_specs();
  const auto it = specs.find(std::string(name));
  if (it == specs.end()) {
    std::string known;
    for (const auto& n : named_spec_names()) known += (known.empty() ? "" : ", ") + n;
    throw ParameterError("unknown model '" + std::string(name) + "' (known: " + known + ")");
  }
  return it->second;
}

NetworkSpec shrink_for_gradcheck(const NetworkSpec& spec, std::size_t frames,
                                 std::size_t bins) {
  if (const auto* conv = std::get_if<ConvNetworkSpec>(&spec)) {
    ConvNetworkSpec s = *conv;
    s.input_frames = std::min(s.input_frames, frames);
    s.input_bins = std::min(s.input_bins, bins);
    for (auto& l : s.layers)
      for (auto& set : l.sets) {
        set.height = std::min(set.height, s.input_frames);
        set.width = std::min(set.width, s.input_bins);
      }
    return s;
  }
  MlpSpec s = std::get<MlpSpec>(spec);
  for (auto& w : s.layer_widths) w = std::min(w, bins);
  return s;
}

json to_json(const NetworkSpec& spec) {
  if (const auto* conv = std::get_if<ConvNetworkSpec>(&spec)) {
    json layers = json::array();
    for (const auto& l : conv->layers) {
      json sets = json::array();
      for (const auto& s : l.sets)
        sets.push_back({{"count", s.count}, {"height", s.height}, {"width", s.width}});
      layers.push_back({{"activation", to_string(l.activation)}, {"sets", sets}});
    }
    return {{"type", "conv"},
            {"input_frames", conv->input_frames},
            {"input_bins", conv->input_bins},
            {"layers", layers}};
  }
  const auto& mlp = std::get<MlpSpec>(spec);
  return {{"type", "mlp"},
          {"layer_widths", mlp.layer_widths},
          {"hidden_activation", to_string(mlp.hidden_activation)},
          {"output_activation", to_string(mlp.output_activation)}};
}

NetworkSpec network_spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw ParameterError("model spec: expected an object with a string 'type'");
  const auto type = j.at("type").get<std::string>();
  NetworkSpec result;
  if (type == "conv") {
    reject_unknown(j, {"type", "input_frames", "input_bins", "layers"}, "model spec");
    ConvNetworkSpec s;
    s.input_frames = positive(j, "input_frames", "model spec");
    s.input_bins = positive(j, "input_bins", "model spec");
    if (!j.contains("layers") || !j.at("layers").is_array())
      throw ParameterError("model spec: 'layers' must be an array");
    for (const auto& lj : j.at("layers")) {
      const std::string where = "model spec layer " + std::to_string(s.layers.size() + 1);
      reject_unknown(lj, {"activation", "sets"}, where);
      LayerSpec l;
      if (lj.contains("activation"))
        l.activation = activation_from_string(lj.at("activation").get<std::string>());
      if (!lj.contains("sets") || !lj.at("sets").is_array())
        throw ParameterError(where + ": 'sets' must be an array");
      for (const auto& sj : lj.at("sets")) {
        reject_unknown(sj, {"count", "height", "width"}, where + " set");
        l.sets.push_back({positive(sj, "count", where), positive(sj, "height", where),
                          positive(sj, "width", where)});
      }
      s.layers.push_back(std::move(l));
    }
    result = std::move(s);
  } else if (type == "mlp") {
    reject_unknown(j, {"type", "layer_widths", "hidden_activation", "output_activation"},
                   "model spec");
    MlpSpec s;
    if (!j.contains("layer_widths") || !j.at("layer_widths").is_array())
      throw ParameterError("model spec: 'layer_widths' must be an array");
    for (const auto& w : j.at("layer_widths")) {
      if (!w.is_number_integer() || w.get<long long>() < 1)
        throw ParameterError("model spec: widths must be positive integers");
      s.layer_widths.push_back(w.get<std::size_t>());
    }
    if (j.contains("hidden_activation"))
      s.hidden_activation = activation_from_string(j.at("hidden_activation").get<std::string>());
    if (j.contains("output_activation"))
      s.output_activation = activation_from_string(j.at("output_activation").get<std::string>());
    result = std::move(s);
  } else {
    throw ParameterError("model spec: unknown type '" + type + "' (expected conv|mlp)");
  }
  validate(result);
  return result;
}

}  // namespace mrfcnn
