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

#include "mrfcnn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>

#include "mrfcnn/errors.hpp"

namespace mrfcnn {
namespace {

using nlohmann::json;

void put_f32(std::string& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
}

float get_f32(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

json parse_header(const std::string& bytes, const std::filesystem::path& path,
                  std::size_t& data_start) {
  const auto newline = bytes.find('\n');
  if (newline == std::string::npos)
    throw FormatError(path.string() + ": missing checkpoint header line");
  json header;
  try {
    header = json::parse(bytes.substr(0, newline));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": malformed checkpoint header: " + e.what());
  }
  if (!header.is_object() || header.value("format", "") != kCheckpointFormat)
    throw FormatError(path.string() + ": not an mrfcnn checkpoint");
  if (header.value("version", 0) != kCheckpointVersion)
    throw FormatError(path.string() + ": unsupported checkpoint version");
  data_start = newline + 1;
  return header;
}

}  // namespace

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Model<T>& model,
                     const json& training) {
  const auto layout = parameter_layout(model.spec);
  if (layout.size() != model.params.size())
    throw ShapeError("save_checkpoint: model has " + std::to_string(model.params.size()) +
                     " blocks, spec implies " + std::to_string(layout.size()));
  json blocks = json::array();
  std::size_t offset = 0, total = 0;
  for (std::size_t b = 0; b < layout.size(); ++b) {
    if (model.params[b].shape() != layout[b].shape)
      throw ShapeError("save_checkpoint: block " + layout[b].name + " has shape " +
                       shape_string(model.params[b].shape()));
    const std::size_t count = model.params[b].size();
    blocks.push_back({{"name", layout[b].name},
                      {"shape", layout[b].shape},
                      {"offset", offset},
                      {"count", count}});
    offset += 4 * count;
    total += count;
  }
  json header = {{"format", kCheckpointFormat},
                 {"version", kCheckpointVersion},
                 {"spec", to_json(model.spec)},
                 {"seed", model.seed},
                 {"precision", precision_name<T>()},
                 {"training", training},
                 {"total_scalars", total},
                 {"data_bytes", offset},
                 {"blocks", blocks}};
  std::string out = header.dump();
  out.push_back('\n');
  out.reserve(out.size() + offset);
  for (const auto& p : model.params)
    for (T v : p.storage()) put_f32(out, static_cast<float>(v));

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write checkpoint " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("short write to checkpoint " + path.string());
}

json read_checkpoint_header(const std::filesystem::path& path) {
  std::size_t start = 0;
  return parse_header(read_all(path), path, start);
}

template <typename T>
LoadedCheckpoint<T> load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  std::size_t start = 0;
  json header = parse_header(bytes, path, start);
  NetworkSpec spec;
  try {
    spec = network_spec_from_json(header.at("spec"));
  } catch (const std::exception& e) {
    throw FormatError(path.string() + ": invalid spec in checkpoint: " + e.what());
  }
  const auto layout = parameter_layout(spec);
  const std::uint64_t expected = count_parameters(spec);
  const auto total = header.value("total_scalars", std::uint64_t{0});
  if (total != expected)
    throw FormatError(path.string() + ": checkpoint stores " + std::to_string(total) +
                      " scalars, spec requires " + std::to_string(expected));
  if (bytes.size() - start != 4 * expected)
    throw IoError(path.string() + ": expected " + std::to_string(4 * expected) +
                  " parameter bytes, found " + std::to_string(bytes.size() - start));
  const auto& blocks = header.at("blocks");
  if (!blocks.is_array() || blocks.size() != layout.size())
    throw FormatError(path.string() + ": block table does not match spec");

  LoadedCheckpoint<T> result;
  result.model.spec = spec;
  result.model.seed = header.value("seed", std::uint64_t{0});
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data() + start);
  for (std::size_t b = 0; b < layout.size(); ++b) {
    const auto& entry = blocks[b];
    if (entry.value("name", "") != layout[b].name ||
        entry.at("shape").get<Shape>() != layout[b].shape)
      throw FormatError(path.string() + ": block " + std::to_string(b) +
                        " does not match expected " + layout[b].name);
    const auto offset = entry.at("offset").get<std::size_t>();
    Tensor<T> t(layout[b].shape);
    if (offset + 4 * t.size() > bytes.size() - start)
      throw FormatError(path.string() + ": block " + layout[b].name + " out of range");
    for (std::size_t i = 0; i < t.size(); ++i)
      t[i] = static_cast<T>(get_f32(data + offset + 4 * i));
    result.model.params.push_back(std::move(t));
  }
  result.header = std::move(header);
  return result;
}

template void save_checkpoint(const std::filesystem::path&, const Model<float>&, const json&);
template void save_checkpoint(const std::filesystem::path&, const Model<double>&, const json&);
template LoadedCheckpoint<float> load_checkpoint(const std::filesystem::path&);
template LoadedCheckpoint<double> load_checkpoint(const std::filesystem::path&);

}  // namespace mrfcnn
