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
#include <vector>

namespace mrfcnn {

struct Waveform {
  std::vector<double> samples;
  std::uint32_t sample_rate = 44100;
};

enum class WavEncoding { pcm16, float32 };

struct WavInfo {
  std::uint32_t sample_rate = 0;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::size_t frames = 0;
};

// Reads only the chunk headers.
WavInfo read_wav_info(const std::filesystem::path& path);

// Mono result: multichannel files are averaged per sample, PCM16 is scaled
// by 1/32768.
Waveform load_wav(const std::filesystem::path& path);

void write_wav(const std::filesystem::path& path, const Waveform& wave,
               WavEncoding encoding = WavEncoding::float32);

// Interleaved multichannel writer, mainly for building test fixtures.
void write_wav(const std::filesystem::path& path,
               const std::vector<std::vector<double>>& channels,
               std::uint32_t sample_rate, WavEncoding encoding);

}  // namespace mrfcnn
