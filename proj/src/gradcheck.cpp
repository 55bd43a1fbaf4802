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


#include "mrfcnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>

namespace mrfcnn {
namespace {

double sum_squares(const Tensor<double>& z, const Tensor<double>& s) {
  double c = 0;
  for (std::size_t i = 0; i < z.size(); ++i) c += (z[i] - s[i]) * (z[i] - s[i]);
  return c;
}

Tensor<double> uniform(const Shape& shape, std::mt19937_64& rng, double lo,
                       double hi) {
  Tensor<double> t(shape);
  std::uniform_real_distribution<double> d(lo, hi);
  for (auto& v : t.storage()) v = d(rng);
  return t;
}

}  // namespace

NetworkSpec gradcheck_spec(const NetworkSpec& spec) {
  if (std::holds_alternative<MlpSpec>(spec)) return shrink_for_gradcheck(spec, 1, 6);
  return shrink_for_gradcheck(spec, 4, 6);
}

GradcheckReport gradcheck(const NetworkSpec& spec, const GradcheckOptions& opts) {
  auto model = init_model<double>(spec, opts.seed);
  std::mt19937_64 rng(opts.seed ^ 0x5DEECE66DULL);
  const auto layout = parameter_layout(spec);
  for (std::size_t b = 0; b < layout.size(); ++b)
    if (layout[b].is_bias)
      model.params[b] = uniform(model.params[b].shape(), rng, -0.1, 0.1);
  // Keeps the output ReLU mostly active so the check sees live units.
  model.params.back()[0] = 0.8;

  const std::size_t n = item_frames(spec), f = item_bins(spec);
  auto x = uniform({1, n, f}, rng, 0, 1);
  const auto s = uniform({1, n, f}, rng, 0, 1);

  ItemCache<double> cache;
  const auto z = forward_item(model, x, &cache);
  Tensor<double> g(z.shape());
  for (std::size_t i = 0; i < z.size(); ++i) g[i] = 2 * (z[i] - s[i]);
  ParameterList<double> grads;
  Tensor<double> gin;
  backward_item(model, cache, g, grads, &gin);
  if (opts.corrupt) opts.corrupt(grads);

  const auto numeric = [&](std::vector<double>& v, std::size_t i) {
    const double saved = v[i];
    v[i] = saved + opts.step;
    const double plus = sum_squares(forward_item(model, x), s);
    v[i] = saved - opts.step;
    const double minus = sum_squares(forward_item(model, x), s);
    v[i] = saved;
    return (plus - minus) / (2 * opts.step);
  };
  const auto rel = [&](double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), opts.floor});
  };

  GradcheckReport report;
  std::map<std::size_t, GradcheckLayer> per_layer;
  const std::size_t cap = std::max<std::size_t>(1, opts.max_entries_per_block);
  for (std::size_t b = 0; b < model.params.size(); ++b) {
    auto& entry = per_layer[layout[b].layer];
    entry.layer = layout[b].layer;
    auto& v = model.params[b].storage();
    for (std::size_t i = 0; i < v.size(); i += 1 + v.size() / cap) {
      entry.worst = std::max(entry.worst, rel(grads[b][i], numeric(v, i)));
      entry.checked++;
    }
  }
  auto& xv = x.storage();
  for (std::size_t i = 0; i < xv.size(); i += 1 + xv.size() / cap) {
    report.input_worst = std::max(report.input_worst, rel(gin[i], numeric(xv, i)));
    report.checked++;
  }
  report.worst = report.input_worst;
  for (auto& [_, l] : per_layer) {
    report.worst = std::max(report.worst, l.worst);
    report.checked += l.checked;
    report.layers.push_back(l);
  }
  report.passed = std::isfinite(report.worst) && report.worst <= opts.tolerance;
  return report;
}

std::string format_report(const GradcheckReport& report) {
  std::string out;
  char line[128];
  for (const auto& l : report.layers) {
    std::snprintf(line, sizeof line, "layer %zu: worst relative error %.3e over %zu entries\n",
                  l.layer + 1, l.worst, l.checked);
    out += line;
  }
  std::snprintf(line, sizeof line, "input: worst relative error %.3e\n", report.input_worst);
  out += line;
  std::snprintf(line, sizeof line, "%s (worst %.3e, %zu entries)\n",
                report.passed ? "PASS" : "FAIL", report.worst, report.checked);
  out += line;
  return out;
}

}  // namespace mrfcnn
