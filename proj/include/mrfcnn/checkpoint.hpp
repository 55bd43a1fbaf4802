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

#include <filesystem>
#include <string>

#include "json.hpp"
#include "mrfcnn/model.hpp"

namespace mrfcnn {

// File layout: one line of JSON (spec, seed, precision, training metadata,
// block table with byte offsets relative to the end of that line) followed
// by little-endian float32 parameter blocks in parameter_layout order.
inline constexpr const char* kCheckpointFormat = "mrfcnn-checkpoint";
inline constexpr int kCheckpointVersion = 1;

template <typename T>
constexpr const char* precision_name() {
  return sizeof(T) == sizeof(float) ? "f32" : "f64";
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Model<T>& model,
                     const nlohmann::json& training = nlohmann::json::object());

template <typename T>
struct LoadedCheckpoint {
  Model<T> model;
  nlohmann::json header;
};

// Validates the block table and the total scalar count against
// count_parameters(spec). Throws FormatError or IoError.
template <typename T>
LoadedCheckpoint<T> load_checkpoint(const std::filesystem::path& path);

nlohmann::json read_checkpoint_header(const std::filesystem::path& path);

}  // namespace mrfcnn
