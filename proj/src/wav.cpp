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


#include "mrfcnn/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "mrfcnn/errors.hpp"

namespace mrfcnn {

namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV reader assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string chunk_id(const unsigned char* p) {
  std::string id(reinterpret_cast<const char*>(p), 4);
  for (auto& c : id)
    if (c < 32 || c > 126) c = '?';
  return id;
}

void put16(std::string& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xFF));
  b.push_back(static_cast<char>(v >> 8));
}
void put32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

Waveform load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (bytes.size() < 12) throw IoError(where + "truncated RIFF header");
  if (chunk_id(bytes.data()) != "RIFF")
    throw FormatError(where + "not a RIFF file (chunk '" + chunk_id(bytes.data()) + "')");
  if (chunk_id(bytes.data() + 8) != "WAVE")
    throw FormatError(where + "RIFF form '" + chunk_id(bytes.data() + 8) + "' is not WAVE");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::string fmt_id = "fmt ";
  std::size_t pos = 12;
  for (;;) {
    if (pos + 8 > bytes.size())
      throw IoError(where + (have_fmt ? "no data chunk before end of file"
                                      : "no fmt chunk before end of file"));
    const std::string id = chunk_id(bytes.data() + pos);
    const std::uint32_t size = u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > bytes.size()) throw IoError(where + "truncated fmt chunk");
      format = u16(bytes.data() + body);
      channels = u16(bytes.data() + body + 2);
      rate = u32(bytes.data() + body + 4);
      bits = u16(bytes.data() + body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw FormatError(where + "short WAVE_FORMAT_EXTENSIBLE in chunk 'fmt '");
        format = u16(bytes.data() + body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError(where + "chunk 'data' precedes chunk 'fmt '");
      const bool pcm16 = format == kFormatPcm && bits == 16;
      const bool f32 = format == kFormatFloat && bits == 32;
      if (!pcm16 && !f32)
        throw FormatError(where + "unsupported encoding in chunk '" + fmt_id + "': format " +
                          std::to_string(format) + ", " + std::to_string(bits) + " bits");
      if (channels < 1 || channels > 2)
        throw FormatError(where + "chunk '" + fmt_id + "' declares " +
                          std::to_string(channels) + " channels; 1 or 2 supported");
      if (rate == 0) throw FormatError(where + "chunk 'fmt ' declares sample rate 0");
      const std::size_t width = bits / 8;
      const std::size_t frame = width * channels;
      if (size % frame != 0 || body + size > bytes.size())
        throw IoError(where + "truncated data chunk (" + std::to_string(bytes.size() - body) +
                      " of " + std::to_string(size) + " bytes)");
      const std::size_t n = size / frame;
      Waveform w;
      w.sample_rate = rate;
      w.samples.resize(n);
      const unsigned char* p = bytes.data() + body;
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c, p += width) {
          if (pcm16) {
            acc += static_cast<double>(static_cast<std::int16_t>(u16(p))) / 32768.0;
          } else {
            float f;
            std::memcpy(&f, p, 4);
            acc += static_cast<double>(f);
          }
        }
        w.samples[i] = acc / static_cast<double>(channels);
      }
      return w;
    }
    pos = body + size + (size & 1u);
  }
}

WavInfo read_wav_info(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string where = path.string() + ": ";
  unsigned char head[12];
  if (!in.read(reinterpret_cast<char*>(head), 12)) throw IoError(where + "truncated RIFF header");
  if (chunk_id(head) != "RIFF" || chunk_id(head + 8) != "WAVE")
    throw FormatError(where + "not a RIFF/WAVE file (chunk '" + chunk_id(head) + "')");
  WavInfo info;
  bool have_fmt = false;
  for (;;) {
    unsigned char ch[8];
    if (!in.read(reinterpret_cast<char*>(ch), 8))
      throw IoError(where + "no data chunk before end of file");
    const std::uint32_t size = u32(ch + 4);
    const std::string id = chunk_id(ch);
    if (id == "fmt ") {
      unsigned char f[16];
      if (size < 16 || !in.read(reinterpret_cast<char*>(f), 16))
        throw IoError(where + "truncated fmt chunk");
      info.channels = u16(f + 2);
      info.sample_rate = u32(f + 4);
      info.bits = u16(f + 14);
      have_fmt = true;
      in.seekg(static_cast<std::streamoff>(size - 16 + (size & 1u)), std::ios::cur);
    } else if (id == "data") {
      if (!have_fmt || info.channels == 0 || info.bits < 8)
        throw FormatError(where + "chunk 'data' without a usable chunk 'fmt '");
      info.frames = size / (static_cast<std::size_t>(info.channels) * (info.bits / 8u));
      return info;
    } else {
      in.seekg(static_cast<std::streamoff>(size + (size & 1u)), std::ios::cur);
    }
  }
}

void write_wav(const std::filesystem::path& path,
               const std::vector<std::vector<double>>& channels, std::uint32_t sample_rate,
               WavEncoding encoding) {
  if (channels.empty()) throw ParameterError("write_wav: no channels");
  if (sample_rate == 0) throw ParameterError("write_wav: sample rate 0");
  const std::size_t n = channels.front().size();
  for (const auto& ch : channels)
    if (ch.size() != n) throw ParameterError("write_wav: channel lengths differ");
  const bool pcm = encoding == WavEncoding::pcm16;
  const std::uint16_t nch = static_cast<std::uint16_t>(channels.size());
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint32_t block = nch * (bits / 8u);
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(n * block);

  std::string b;
  b.reserve(44 + data_bytes);
  b += "RIFF";
  put32(b, 36 + data_bytes);
  b += "WAVEfmt ";
  put32(b, 16);
  put16(b, pcm ? kFormatPcm : kFormatFloat);
  put16(b, nch);
  put32(b, sample_rate);
  put32(b, sample_rate * block);
  put16(b, static_cast<std::uint16_t>(block));
  put16(b, bits);
  b += "data";
  put32(b, data_bytes);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& ch : channels) {
      if (pcm) {
        const double q = std::round(std::clamp(ch[i], -1.0, 1.0) * 32768.0);
        put16(b, static_cast<std::uint16_t>(
                     static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0))));
      } else {
        const float f = static_cast<float>(ch[i]);
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        put32(b, u);
      }
    }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void write_wav(const std::filesystem::path& path, const Waveform& wave,
               WavEncoding encoding) {
  write_wav(path, std::vector<std::vector<double>>{wave.samples}, wave.sample_rate, encoding);
}

}  // namespace mrfcnn
