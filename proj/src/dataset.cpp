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


#include "mrfcnn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "mrfcnn/errors.hpp"
#include "mrfcnn/segmentation.hpp"
#include "mrfcnn/wav.hpp"

namespace mrfcnn {

namespace fs = std::filesystem;

CorpusScan scan_corpus(const fs::path& root, const std::vector<std::string>& sources) {
  if (sources.empty()) throw ConfigError("scan_corpus: no source names given");
  if (!fs::is_directory(root)) throw IoError("corpus root " + root.string() + " is not a directory");
  std::vector<std::string> tracks;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) tracks.push_back(e.path().filename().string());
  std::sort(tracks.begin(), tracks.end());

  CorpusScan scan;
  for (const auto& track : tracks) {
    const fs::path dir = root / track;
    TrackPair pair;
    pair.track_id = track;
    pair.mixture_path = dir / "mixture.wav";
    std::vector<std::string> missing;
    if (!fs::exists(pair.mixture_path)) missing.push_back("mixture.wav");
    for (const auto& s : sources) {
      pair.target_paths[s] = dir / (s + ".wav");
      if (!fs::exists(pair.target_paths[s])) missing.push_back(s + ".wav");
    }
    if (!missing.empty()) {
      std::string msg = track + ": missing";
      for (const auto& m : missing) msg += " " + m;
      scan.skipped.push_back(msg);
      continue;
    }
    try {
      const WavInfo mix = read_wav_info(pair.mixture_path);
      pair.sample_rate = mix.sample_rate;
      pair.frames = mix.frames;
      bool rate_ok = true, trimmed = false;
      for (const auto& [name, path] : pair.target_paths) {
        const WavInfo info = read_wav_info(path);
        rate_ok = rate_ok && info.sample_rate == mix.sample_rate;
        trimmed = trimmed || info.frames != pair.frames;
        pair.frames = std::min(pair.frames, info.frames);
      }
      if (!rate_ok) {
        scan.skipped.push_back(track + ": sample rates differ between files");
        continue;
      }
      if (trimmed)
        scan.warnings.push_back(track + ": file lengths differ, trimming to " +
                                std::to_string(pair.frames) + " samples");
    } catch (const std::exception& e) {
      scan.skipped.push_back(track + ": " + e.what());
      continue;
    }
    scan.pairs.push_back(std::move(pair));
  }
  if (scan.pairs.empty()) throw IoError("corpus " + root.string() + " has no usable tracks");
  return scan;
}

Split split(const std::vector<TrackPair>& pairs, const SplitSpec& spec) {
  if (pairs.empty()) throw ParameterError("split: no tracks");
  Split out;
  std::size_t n_train = 0;
  std::vector<TrackPair> order = pairs;
  if (spec.boundary) {
    if (*spec.boundary < 1 || *spec.boundary > pairs.size())
      throw ParameterError("split: boundary " + std::to_string(*spec.boundary) +
                           " outside [1, " + std::to_string(pairs.size()) + "]");
    n_train = *spec.boundary;
  } else {
    if (!(spec.ratio > 0.0 && spec.ratio <= 1.0))
      throw ParameterError("split: ratio must lie in (0, 1]");
    std::mt19937_64 rng(spec.seed);
    std::shuffle(order.begin(), order.end(), rng);
    n_train = static_cast<std::size_t>(std::llround(spec.ratio * static_cast<double>(pairs.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, pairs.size());
  }
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  if (out.validation.empty())
    out.warning = "validation set is empty; training cost will drive the schedule";
  return out;
}

namespace {

void scale_to_rms(std::vector<double>& x, double rms) {
  double e = 0.0;
  for (double v : x) e += v * v;
  if (e == 0.0) return;
  const double k = rms / std::sqrt(e / static_cast<double>(x.size()));
  for (double& v : x) v *= k;
}

std::vector<double> tonal_source(std::size_t n, double sr, std::mt19937_64& rng) {
  using U = std::uniform_real_distribution<double>;
  std::vector<double> x(n, 0.0);
  const double dur = static_cast<double>(n) / sr;
  const int tones = std::uniform_int_distribution<int>(3, 5)(rng);
  for (int k = 0; k < tones; ++k) {
    const double f0 = U(80.0, sr / 16.0)(rng);
    const int harmonics = std::uniform_int_distribution<int>(3, 6)(rng);
    const double onset = U(0.0, 0.6 * dur)(rng);
    const double length = U(0.4, 1.0)(rng) * (dur - onset);
    const double decay = U(0.3, 1.2)(rng);
    std::vector<double> phase(static_cast<std::size_t>(harmonics));
    for (auto& p : phase) p = U(0.0, 2.0 * std::numbers::pi)(rng);
    const auto first = static_cast<std::size_t>(onset * sr);
    const auto last = std::min(n, static_cast<std::size_t>((onset + length) * sr));
    for (std::size_t i = first; i < last; ++i) {
      const double t = static_cast<double>(i - first) / sr;
      const double left = static_cast<double>(last - i) / sr;
      const double env = std::min({1.0, t / 0.03, left / 0.02}) * std::exp(-t / decay);
      double v = 0.0;
      for (int h = 1; h <= harmonics; ++h) {
        const double f = f0 * h;
        if (f >= 0.45 * sr) break;
        v += std::sin(2.0 * std::numbers::pi * f * t + phase[static_cast<std::size_t>(h - 1)]) /
             std::pow(static_cast<double>(h), 1.2);
      }
      x[i] += env * v;
    }
  }
  return x;
}

std::vector<double> noise_source(std::size_t n, double sr, std::mt19937_64& rng) {
  using U = std::uniform_real_distribution<double>;
  std::normal_distribution<double> white(0.0, 1.0);
  std::vector<double> x(n, 0.0);
  const double dur = static_cast<double>(n) / sr;
  const int bursts = std::uniform_int_distribution<int>(4, 8)(rng);
  for (int k = 0; k < bursts; ++k) {
    const double start = U(0.0, std::max(0.0, dur - 0.1))(rng);
    const double length = U(0.1, 0.5)(rng);
    const double fc = U(150.0, 0.4 * sr)(rng);
    const double q = U(0.7, 4.0)(rng);
    // Band-pass biquad with 0 dB peak gain.
    const double w0 = 2.0 * std::numbers::pi * fc / sr;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    const double b0 = alpha / a0, b2 = -alpha / a0;
    const double a1 = -2.0 * std::cos(w0) / a0, a2 = (1.0 - alpha) / a0;
    const auto first = static_cast<std::size_t>(start * sr);
    const auto last = std::min(n, first + static_cast<std::size_t>(length * sr));
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (std::size_t i = first; i < last; ++i) {
      const double in = white(rng);
      const double y = b0 * in + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = in;
      y2 = y1;
      y1 = y;
      const double u = static_cast<double>(i - first) / static_cast<double>(last - first);
      x[i] += y * std::sin(std::numbers::pi * u) * std::sin(std::numbers::pi * u);
    }
  }
  return x;
}

}  // namespace

std::vector<fs::path> make_synthetic(const fs::path& root, const SynthConfig& config) {
  if (!(config.duration >= 1.0)) throw ParameterError("make_synthetic: duration must be >= 1 s");
  if (config.sample_rate < 1000) throw ParameterError("make_synthetic: sample rate below 1 kHz");
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());
  const double sr = static_cast<double>(config.sample_rate);
  const auto n = static_cast<std::size_t>(std::llround(config.duration * sr));
  std::vector<fs::path> dirs;
  for (std::size_t t = 0; t < config.num_tracks; ++t) {
    std::mt19937_64 rng(config.seed * 0x9E3779B97F4A7C15ULL + t + 1);
    auto a = tonal_source(n, sr, rng);
    auto b = noise_source(n, sr, rng);
    scale_to_rms(a, 0.1);
    scale_to_rms(b, 0.1);
    std::vector<double> mix(n);
    for (std::size_t i = 0; i < n; ++i) {
      const float fa = static_cast<float>(a[i]), fb = static_cast<float>(b[i]);
      a[i] = fa;
      b[i] = fb;
      mix[i] = static_cast<double>(fa + fb);
    }
    char name[32];
    std::snprintf(name, sizeof name, "track_%03zu", t);
    const fs::path dir = root / name;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    write_wav(dir / "mixture.wav", Waveform{mix, config.sample_rate});
    write_wav(dir / (std::string(kSynthTonal) + ".wav"), Waveform{a, config.sample_rate});
    write_wav(dir / (std::string(kSynthNoise) + ".wav"), Waveform{b, config.sample_rate});
    dirs.push_back(dir);
  }
  return dirs;
}

template <typename T>
void for_each_segment_pairs(const std::vector<TrackPair>& pairs, const std::string& target,
                            const SegmentConfig& config,
                            const std::function<void(TrackSegments<T>&&)>& sink) {
  if (!(config.magnitude_scale > 0.0))
    throw ParameterError("segments: magnitude_scale must be positive");
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    const TrackPair& p = pairs[t];
    const auto it = p.target_paths.find(target);
    if (it == p.target_paths.end())
      throw ConfigError("track " + p.track_id + " has no source '" + target + "'");
    TrackSegments<T> out;
    out.track = t;
    Waveform mix = load_wav(p.mixture_path);
    Waveform tgt = load_wav(it->second);
    if (mix.samples.size() != tgt.samples.size()) {
      out.warnings.push_back(p.track_id + ": mixture and " + target +
                             " lengths differ, trimming to the shorter");
      const std::size_t n = std::min(mix.samples.size(), tgt.samples.size());
      mix.samples.resize(n);
      tgt.samples.resize(n);
    }
    Tensor<T> ym = magnitude(stft<T>(mix, config.stft));
    Tensor<T> sm = magnitude(stft<T>(tgt, config.stft));
    const T k = static_cast<T>(config.magnitude_scale);
    for (auto& v : ym.storage()) v *= k;
    for (auto& v : sm.storage()) v *= k;
    out.pairs.inputs = segment(ym, config.frames, config.stride);
    out.pairs.targets = segment(sm, config.frames, config.stride);
    sink(std::move(out));
  }
}

template <typename T>
SegmentSet<T> build_segment_pairs(const std::vector<TrackPair>& pairs, const std::string& target,
                                  const SegmentConfig& config) {
  SegmentSet<T> set;
  std::vector<T> in, out;
  std::vector<std::size_t> offsets;
  std::size_t count = 0;
  for_each_segment_pairs<T>(pairs, target, config, [&](TrackSegments<T>&& ts) {
    const auto& a = ts.pairs.inputs.items.storage();
    const auto& b = ts.pairs.targets.items.storage();
    in.insert(in.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    offsets.insert(offsets.end(), ts.pairs.inputs.offsets.begin(), ts.pairs.inputs.offsets.end());
    set.track_of.insert(set.track_of.end(), ts.pairs.size(), ts.track);
    set.warnings.insert(set.warnings.end(), ts.warnings.begin(), ts.warnings.end());
    count += ts.pairs.size();
  });
  if (count == 0) return set;
  const std::size_t bins = config.stft.bins();
  const Shape shape{count, 1, config.frames, bins};
  set.pairs.inputs.items = Tensor<T>(shape, std::move(in));
  set.pairs.targets.items = Tensor<T>(shape, std::move(out));
  set.pairs.inputs.offsets = offsets;
  set.pairs.targets.offsets = std::move(offsets);
  return set;
}

#define MRFCNN_INSTANTIATE_DATASET(T)                                                    \
  template void for_each_segment_pairs(const std::vector<TrackPair>&, const std::string&, \
                                       const SegmentConfig&,                              \
                                       const std::function<void(TrackSegments<T>&&)>&);   \
  template SegmentSet<T> build_segment_pairs(const std::vector<TrackPair>&,               \
                                             const std::string&, const SegmentConfig&);

MRFCNN_INSTANTIATE_DATASET(float)
MRFCNN_INSTANTIATE_DATASET(double)

}  // namespace mrfcnn
