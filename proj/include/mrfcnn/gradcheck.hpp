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
#include <functional>
#include <string>
#include <vector>

#include "mrfcnn/model.hpp"
#include "mrfcnn/network_spec.hpp"

namespace mrfcnn {

struct GradcheckOptions {
  std::uint64_t seed = 0;
  double step = 1e-6;
  double tolerance = 1e-4;
  // Relative errors are measured against max(|analytic|, |numeric|, floor).
  double floor = 1e-3;
  std::size_t max_entries_per_block = 200;
  // Test hook: called on the analytic gradients before comparison.
  std::function<void(ParameterList<double>&)> corrupt;
};

struct GradcheckLayer {
  std::size_t layer = 0;
  double worst = 0;
  std::size_t checked = 0;
};

struct GradcheckReport {
  std::vector<GradcheckLayer> layers;
  double input_worst = 0;
  double worst = 0;
  std::size_t checked = 0;
  bool passed = false;
};

// Central-difference check of the sum-of-squares cost gradient for one
// random item, in double precision. Large specs should be shrunk first.
GradcheckReport gradcheck(const NetworkSpec& spec,
                          const GradcheckOptions& opts = {});

// The network gradcheck is run on: named specs are shrunk to a few frames
// and bins so a full sweep takes well under a second.
NetworkSpec gradcheck_spec(const NetworkSpec& spec);

std::string format_report(const GradcheckReport& report);

}  // namespace mrfcnn
