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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrfcnn/bss_eval.hpp"
#include "mrfcnn/corpus_eval.hpp"
#include "mrfcnn/dataset.hpp"
#include "mrfcnn/network_spec.hpp"
#include "mrfcnn/separate.hpp"
#include "mrfcnn/stft.hpp"
#include "mrfcnn/training.hpp"

namespace mrfcnn {

enum class Precision { f32, f64 };

struct RunConfig {
  StftParams stft;
  std::size_t segment_frames = 15;
  std::size_t stride_train = 15;
  std::size_t stride_infer = 15;

  std::string model_name = "mr-fcnn";
  std::optional<NetworkSpec> inline_model;

  TrainConfig train;  // seed and threads come from the top level
  BssConfig eval;
  bool eval_include_mixture = false;

  std::string target = "vocals";
  std::vector<std::string> sources{"vocals", "bass", "drums", "other"};
  double split_ratio = 0.9;
  std::optional<std::size_t> split_boundary;
  double magnitude_scale = 1.0;

  SynthConfig synth;
  bool soft_mask = false;

  std::filesystem::path corpus = "corpus";
  std::filesystem::path checkpoints = "checkpoints";
  std::filesystem::path reports = "reports";

  std::uint64_t seed = 0;
  Precision precision = Precision::f32;
  unsigned threads = 0;

  NetworkSpec model_spec() const;
  SegmentConfig segments(bool training) const;
  SeparateOptions separate_options() const;
  CorpusEvalConfig corpus_eval() const;
};

// Missing keys take defaults; unknown keys and mistyped values throw
// ConfigError naming the offending path.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

// Throws ConfigError when the model's N x F differs from the segment and
// STFT settings.
void check_model_geometry(const RunConfig& config, const NetworkSpec& spec);

Precision parse_precision(const std::string& s);
const char* precision_label(Precision p);

}  // namespace mrfcnn
