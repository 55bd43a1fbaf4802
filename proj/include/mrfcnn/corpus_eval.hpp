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
#include <filesystem>
#include <string>
#include <vector>

#include "mrfcnn/bss_eval.hpp"
#include "mrfcnn/stats.hpp"

namespace mrfcnn {

struct CorpusEvalConfig {
  BssConfig bss;
  std::string target;                // source name being estimated
  std::vector<std::string> sources;  // empty: every <name>.wav except mixture.wav
  bool include_mixture = false;      // score references/<track>/mixture.wav as model "mixture"
  unsigned threads = 0;
};

struct TrackMetrics {
  std::string track;
  std::string model;
  EvalResult metrics;
};

struct PairwiseTest {
  std::string model_a, model_b;
  std::string metric;  // sdr, sir or sar
  std::size_t n = 0;   // tracks both models have
  double p_raw = 1.0;
  double p_adjusted = 1.0;
};

struct MetricSummary {
  std::string model;
  std::string metric;
  BoxSummary box;
};

struct CorpusReport {
  std::vector<TrackMetrics> rows;  // model-major, tracks in lexicographic order
  std::vector<std::string> skipped;
  std::vector<PairwiseTest> tests;
  std::size_t comparisons = 0;  // Bonferroni m: number of model pairs
  std::vector<MetricSummary> summaries;
};

// Estimates are read from <estimates>/<model>/<track>.wav and references
// from <references>/<track>/<source>.wav.
CorpusReport evaluate_corpus(const std::filesystem::path& estimates,
                             const std::filesystem::path& references,
                             const CorpusEvalConfig& config);

void write_metrics_csv(const std::filesystem::path& path, const CorpusReport& report);
void write_significance_csv(const std::filesystem::path& path, const CorpusReport& report);
void write_summary_csv(const std::filesystem::path& path, const CorpusReport& report);

}  // namespace mrfcnn
