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

#include <stdexcept>
#include <string>

namespace mrfcnn {

// Tensor or batch dimensions do not agree with what an operation expects.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A network, STFT, or evaluation parameter is outside its valid range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or unsupported file content (WAV chunks, checkpoint headers).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read, or written, or ended early.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN or Inf encountered where finite values are required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Run configuration rejected by schema validation.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mrfcnn
