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
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrfcnn/config.hpp"
#include "mrfcnn/corpus_eval.hpp"
#include "mrfcnn/gradcheck.hpp"
#include "mrfcnn/training.hpp"

namespace mrfcnn {

// Entry point of the mrfcnn executable; args excludes the program name.
// Exit codes: 0 success, 1 failed check, 2 usage or config error, 3 any
// other error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::size_t cmd_param_count(const NetworkSpec& spec);

GradcheckReport cmd_gradcheck(const NetworkSpec& spec, std::uint64_t seed,
                              std::function<void(ParameterList<double>&)> corrupt = {});

struct TrainOutputs {
  std::filesystem::path checkpoint;  // best.ckpt
  std::filesystem::path history;     // history.csv
  std::filesystem::path log;         // train.log
  std::filesystem::path config;      // effective_config.json
  TrainHistory result;
};

// Trains one network for config.target on the corpus at config.corpus and
// writes the outputs into config.checkpoints. log receives the same lines
// as train.log.
TrainOutputs cmd_train(const RunConfig& config, std::ostream& log);

// The run configuration stored in a checkpoint header. Paths are not part
// of it, so a checkpoint does not depend on where it was written.
RunConfig checkpoint_config(const std::filesystem::path& checkpoint);

// Separates input into output with the checkpoint's network and writes
// <output>.config.json beside it.
void cmd_separate(const RunConfig& config, const std::filesystem::path& checkpoint,
                  const std::filesystem::path& input, const std::filesystem::path& output);

// Writes metrics.csv, significance.csv, summary.csv, skipped.txt and
// effective_config.json into config.reports.
CorpusReport cmd_evaluate(const RunConfig& config, const std::filesystem::path& estimates,
                          const std::filesystem::path& references);

// Writes the synthetic corpus and an effective_config.json into
// config.corpus.
std::vector<std::filesystem::path> cmd_synth(const RunConfig& config);

// to_json(config) without the paths section.
nlohmann::json portable_json(const RunConfig& config);

void write_effective_config(const std::filesystem::path& path, const RunConfig& config);

}  // namespace mrfcnn
