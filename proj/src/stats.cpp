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


#include "mrfcnn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mrfcnn/errors.hpp"

namespace mrfcnn {

namespace {

// Mid-ranks of |d|, returned doubled so tied ranks stay integral.
std::vector<std::size_t> doubled_ranks(const std::vector<double>& d, double& tie_term) {
  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return std::abs(d[l]) < std::abs(d[r]);
  });
  std::vector<std::size_t> ranks(n);
  tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const std::size_t twice_mid = i + j + 2;  // 2 * ((i+1 + j+1) / 2)
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = twice_mid;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw ShapeError("wilcoxon: sample sizes " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()) + " differ");
  if (a.empty()) throw ShapeError("wilcoxon: empty samples");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  WilcoxonResult r;
  r.n = d.size();
  if (d.empty()) return r;

  double tie_term = 0.0;
  const auto ranks = doubled_ranks(d, tie_term);
  std::size_t total2 = 0, plus2 = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    total2 += ranks[i];
    if (d[i] > 0) plus2 += ranks[i];
  }
  const std::size_t obs2 = std::min(plus2, total2 - plus2);
  r.w = static_cast<double>(obs2) / 2.0;

  if (r.n <= kWilcoxonExactLimit) {
    // counts[s]: sign patterns whose doubled positive rank sum is s.
    std::vector<double> counts(total2 + 1, 0.0);
    counts[0] = 1.0;
    std::size_t reach = 0;
    for (std::size_t rk : ranks) {
      for (std::size_t s = reach + 1; s-- > 0;)
        if (counts[s] != 0.0) counts[s + rk] += counts[s];
      reach += rk;
    }
    double hits = 0.0;
    for (std::size_t s = 0; s <= total2; ++s)
      if (std::min(s, total2 - s) <= obs2) hits += counts[s];
    r.p = std::min(1.0, hits / std::ldexp(1.0, static_cast<int>(r.n)));
    return r;
  }

  r.exact = false;
  const double n = static_cast<double>(r.n);
  const double mean = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  if (!(var > 0.0)) {
    r.p = 1.0;
    return r;
  }
  const double z = (std::abs(r.w - mean) - 0.5) / std::sqrt(var);
  r.p = z <= 0.0 ? 1.0 : std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

std::vector<double> bonferroni(const std::vector<double>& p_values, std::size_t m) {
  if (m < 1) throw ParameterError("bonferroni: m must be >= 1");
  std::vector<double> out(p_values.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::min(1.0, static_cast<double>(m) * p_values[i]);
  return out;
}

BoxSummary box_summary(std::vector<double> v) {
  BoxSummary s;
  s.count = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  s.min = v.front();
  s.max = v.back();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr, hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = s.q1;
  s.whisker_high = s.q3;
  for (double x : v) {
    if (x < lo_fence || x > hi_fence) {
      s.outliers.push_back(x);
      continue;
    }
    s.whisker_low = std::min(s.whisker_low, x);
    s.whisker_high = std::max(s.whisker_high, x);
  }
  return s;
}

}  // namespace mrfcnn
