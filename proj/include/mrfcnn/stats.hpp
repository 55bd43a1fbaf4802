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

namespace mrfcnn {

// Exact for at most this many nonzero differences, normal approximation
// (tie and continuity corrected) above.
inline constexpr std::size_t kWilcoxonExactLimit = 20;

struct WilcoxonResult {
  double p = 1.0;      // two-sided
  double w = 0.0;      // min(W+, W-)
  std::size_t n = 0;   // nonzero differences
  bool exact = true;
};

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a,
                                    const std::vector<double>& b);

std::vector<double> bonferroni(const std::vector<double>& p_values, std::size_t m);

struct BoxSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  // Most extreme values within 1.5 IQR of the quartiles.
  double whisker_low = 0.0, whisker_high = 0.0;
  std::vector<double> outliers;
};

// Quartiles by linear interpolation between order statistics.
BoxSummary box_summary(std::vector<double> values);

}  // namespace mrfcnn
