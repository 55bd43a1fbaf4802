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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mrfcnn/stft.hpp"
#include "mrfcnn/training.hpp"

namespace mrfcnn {

struct TrackPair {
  std::string track_id;
  std::filesystem::path mixture_path;
  std::map<std::string, std::filesystem::path> target_paths;
  std::uint32_t sample_rate = 0;
  std::size_t frames = 0;  // shortest file; longer ones are trimmed on load
};

struct CorpusScan {
  std::vector<TrackPair> pairs;     // lexicographic by track id
  std::vector<std::string> skipped; // "<track>: reason"
  std::vector<std::string> warnings;
};

// Layout <root>/<track>/{mixture.wav, <source>.wav}. Throws IoError when no
// track survives.
CorpusScan scan_corpus(const std::filesystem::path& root,
                       const std::vector<std::string>& sources);

struct SplitSpec {
  double ratio = 0.9;
  std::optional<std::size_t> boundary;  // first `boundary` tracks train, no shuffle
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<TrackPair> train;
  std::vector<TrackPair> validation;
  std::string warning;  // non-empty when validation is empty
};

// Ratio split: seeded shuffle, then round(ratio * n) tracks (at least one)
// go to training.
Split split(const std::vector<TrackPair>& pairs, const SplitSpec& spec);

struct SynthConfig {
  std::size_t num_tracks = 8;
  double duration = 3.0;  // seconds
  std::uint32_t sample_rate = 8000;
  std::uint64_t seed = 0;
};

inline constexpr const char* kSynthTonal = "tonal";
inline constexpr const char* kSynthNoise = "noise";

// Writes <root>/track_NNN/{mixture,tonal,noise}.wav as float32. The tonal
// source sums 3-5 harmonic tones under attack/decay envelopes; the noise
// source holds band-pass filtered noise bursts; mixture = tonal + noise
// exactly in float32. Returns the track directories.
std::vector<std::filesystem::path> make_synthetic(const std::filesystem::path& root,
                                                  const SynthConfig& config);

struct SegmentConfig {
  StftParams stft;
  std::size_t frames = 15;  // N
  std::size_t stride = 15;
  double magnitude_scale = 1.0;
};

template <typename T>
struct TrackSegments {
  std::size_t track = 0;  // index into the pair list
  SegmentPairs<T> pairs;
  std::vector<std::string> warnings;
};

// Loads one track at a time, so spectrograms of different tracks are never
// held together.
template <typename T>
void for_each_segment_pairs(const std::vector<TrackPair>& pairs, const std::string& target,
                            const SegmentConfig& config,
                            const std::function<void(TrackSegments<T>&&)>& sink);

template <typename T>
struct SegmentSet {
  SegmentPairs<T> pairs;
  std::vector<std::size_t> track_of;  // per item
  std::vector<std::string> warnings;
};

template <typename T>
SegmentSet<T> build_segment_pairs(const std::vector<TrackPair>& pairs, const std::string& target,
                                  const SegmentConfig& config);

}  // namespace mrfcnn
