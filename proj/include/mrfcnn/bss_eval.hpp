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

struct BssConfig {
  std::size_t filter_len = 512;
  double cap_db = 300.0;

  void validate() const;
};

struct EvalResult {
  double sdr = 0.0;
  double sir = 0.0;
  double sar = 0.0;
  bool regularized = false;   // Gram matrix was rank deficient
  bool zero_estimate = false;
};

// SDR/SIR/SAR of `estimate` for references[target]. The estimate is split
// into the part explained by filtered copies (filter_len taps) of the
// target, of all references, and the remainder. Ratios whose error energy
// is below 1e-12 of the estimate energy report +cap; all values are
// clamped to [-cap, cap].
EvalResult bss_eval(const std::vector<double>& estimate,
                    const std::vector<std::vector<double>>& references,
                    std::size_t target, const BssConfig& config = {});

}  // namespace mrfcnn
