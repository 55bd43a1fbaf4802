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

#include "mrfcnn/model.hpp"
#include "mrfcnn/stft.hpp"
#include "mrfcnn/wav.hpp"

namespace mrfcnn {

struct SeparateOptions {
  StftParams stft;
  std::size_t stride = 15;
  // Apply m = S^2 / (S^2 + max(Y - S, 0)^2) to the mixture magnitude Y
  // instead of using the network estimate S directly.
  bool soft_mask = false;
  // Network inputs are magnitudes times this; outputs are divided by it.
  double magnitude_scale = 1.0;
  unsigned threads = 0;
};

// Estimated source magnitude [frames, bins] for a mixture magnitude.
template <typename T>
Tensor<T> estimate_magnitude(const Model<T>& model, const Tensor<T>& mixture_magnitude,
                             const SeparateOptions& options);

// Output has the mixture's length and sample rate; mixture phase is reused.
template <typename T>
Waveform separate(const Model<T>& model, const Waveform& mixture,
                  const SeparateOptions& options = {});

}  // namespace mrfcnn
