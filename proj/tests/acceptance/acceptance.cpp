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


// Prints one PASS/FAIL line per acceptance criterion and exits nonzero if
// any fails. An optional argument names a scratch directory.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mrfcnn/bss_eval.hpp"
#include "mrfcnn/cli.hpp"
#include "mrfcnn/conv.hpp"
#include "mrfcnn/gradcheck.hpp"
#include "mrfcnn/network_spec.hpp"
#include "mrfcnn/stats.hpp"
#include "mrfcnn/stft.hpp"
#include "mrfcnn/training.hpp"
#include "mrfcnn/wav.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace mrfcnn;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  std::string out(static_cast<std::size_t>(std::snprintf(nullptr, 0, f, args...)), '\0');
  std::snprintf(out.data(), out.size() + 1, f, args...);
  return out;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<double> noise(std::size_t n, std::uint64_t seed, double amp = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-amp, amp);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

Outcome parameter_counts() {
  const auto t0 = Clock::now();
  const std::size_t fcnn = count_parameters(named_spec("fcnn"));
  const std::size_t mr = count_parameters(named_spec("mr-fcnn"));
  const std::size_t dnn = count_parameters(named_spec("dnn"));
  const double ms = seconds_since(t0) * 1e3;
  return {fcnn == 445173 && mr == 558181 && dnn == 4206600 && ms < 1.0,
          fmt("fcnn %zu, mr-fcnn %zu, dnn %zu in %.3f ms", fcnn, mr, dnn, ms)};
}

Outcome convolution_oracle() {
  std::mt19937_64 rng(2024);
  const auto dim = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  double worst = 0;
  std::size_t instances = 0, oversized = 0;
  for (int i = 0; i < 600; ++i) {
    const std::size_t cin = dim(1, 4), cout = dim(1, 10), h = dim(1, 8), w = dim(1, 8);
    const std::size_t a = dim(1, 5), b = dim(1, 5);
    if (a > h || b > w) ++oversized;
    const auto x = testing::random_tensor<double>({cin, h, w}, rng);
    const auto f = testing::random_tensor<double>({cout, cin, a, b}, rng);
    std::vector<double> bias(cout);
    for (auto& v : bias) v = std::uniform_real_distribution<double>(-1, 1)(rng);
    const auto ref = testing::brute_force_correlation(x.storage(), cin, h, w, f.storage(), cout,
                                                      a, b, bias);
    for (ConvPath p : {ConvPath::automatic, ConvPath::direct, ConvPath::im2col, ConvPath::fft}) {
      const auto y = conv2d_same(x, f, std::span<const double>(bias), p);
      for (std::size_t k = 0; k < ref.size(); ++k) worst = std::max(worst, std::abs(y[k] - ref[k]));
    }
    ++instances;
  }
  return {worst <= 1e-12 && instances >= 500 && oversized > 0,
          fmt("%zu instances (%zu with kernel larger than input), all paths, max abs error %.2e",
              instances, oversized, worst)};
}

Outcome gradient_check() {
  const auto t0 = Clock::now();
  GradcheckOptions opts;
  opts.seed = 1;
  opts.step = 1e-6;
  const auto spec = named_spec("toy");
  const auto& conv = std::get<ConvNetworkSpec>(spec);
  const auto report = gradcheck(spec, opts);
  const double s = seconds_since(t0);
  return {report.passed && report.worst < 1e-4 && conv.layers.size() == 3 && s < 60,
          fmt("toy N=%zu F=%zu, %zu layers, %zu entries, max relative error %.2e in %.2f s",
              conv.input_frames, conv.input_bins, report.layers.size(), report.checked,
              report.worst, s)};
}

double interior_snr_db(const std::vector<double>& ref, const std::vector<double>& est,
                       std::size_t skip) {
  double sig = 0, err = 0;
  for (std::size_t i = skip; i + skip < ref.size(); ++i) {
    sig += ref[i] * ref[i];
    err += (ref[i] - est[i]) * (ref[i] - est[i]);
  }
  return 10.0 * std::log10(sig / err);
}

Outcome stft_round_trip() {
  std::mt19937_64 rng(77);
  double worst64 = 1e9, worst32 = 1e9;
  const StftParams p{2048, 512, 2048};
  for (int trial = 0; trial < 6; ++trial) {
    const double secs = std::uniform_real_distribution<double>(1.0, 5.0)(rng);
    const auto x = noise(static_cast<std::size_t>(secs * 44100), rng());
    const Waveform w{x, 44100};
    worst64 = std::min(worst64, interior_snr_db(x, istft(stft<double>(w, p)).samples, p.window));
    worst32 = std::min(worst32, interior_snr_db(x, istft(stft<float>(w, p)).samples, p.window));
  }
  return {worst64 >= 120 && worst32 >= 60,
          fmt("worst interior SNR %.1f dB (f64), %.1f dB (f32)", worst64, worst32)};
}

// Desk-scale configuration shared by the learning and determinism checks.
// 3 s at 8 kHz with hop 128 gives 186 frames per track; overlapping
// training segments (stride 5) give each epoch enough minibatches.
constexpr int kDeskHop = 128;
constexpr int kDeskStride = 5;
constexpr int kDeskBatch = 16;
constexpr double kDeskLr = 1e-3;

std::string desk_config(const fs::path& root, std::size_t epochs, const char* precision) {
  return fmt(R"({
    "stft": {"window": 256, "hop": %d, "fft": 256},
    "segments": {"N": 15, "stride_train": %d, "stride_infer": 15},
    "model": "mr-fcnn-desk",
    "train": {"batch_size": %d, "lr0": %g, "max_epochs": %zu},
    "dataset": {"target": "tonal", "sources": ["tonal", "noise"], "split_boundary": 6},
    "synth": {"num_tracks": 8, "duration": 3, "sample_rate": 8000},
    "paths": {"corpus": "%s/corpus", "checkpoints": "%s/ck", "reports": "%s/rep"},
    "seed": 1, "precision": "%s", "threads": 1})",
             kDeskHop, kDeskStride, kDeskBatch, kDeskLr, epochs, root.c_str(), root.c_str(),
             root.c_str(), precision);
}

RunConfig write_config(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return load_run_config(path);
}

// Synthesizes the 8-track corpus and moves the last track out of it so it is
// never seen during training or validation.
fs::path prepare_desk_corpus(const fs::path& root) {
  const RunConfig cfg = write_config(root / "synth.json", desk_config(root, 1, "f32"));
  cmd_synth(cfg);
  const fs::path held = root / "heldout";
  fs::remove_all(held);
  fs::create_directories(held);
  fs::rename(cfg.corpus / "track_007", held / "track_007");
  return held / "track_007";
}

Outcome desk_learning(const fs::path& root, const fs::path& held) {
  const auto t0 = Clock::now();
  RunConfig cfg = write_config(root / "desk.json", desk_config(root, 50, "f32"));
  cfg.checkpoints = root / "desk";
  std::ostringstream log;
  const TrainOutputs outs = cmd_train(cfg, log);
  const auto& epochs = outs.result.epochs;
  const double first = epochs.front().train_cost, last = epochs.back().train_cost;

  const fs::path est = root / "desk_estimate.wav";
  cmd_separate(checkpoint_config(outs.checkpoint), outs.checkpoint, held / "mixture.wav", est);
  const auto mix = load_wav(held / "mixture.wav").samples;
  const std::vector<std::vector<double>> refs{load_wav(held / "tonal.wav").samples,
                                              load_wav(held / "noise.wav").samples};
  const double sdr_mix = bss_eval(mix, refs, 0).sdr;
  const double sdr_est = bss_eval(load_wav(est).samples, refs, 0).sdr;
  const double s = seconds_since(t0);
  const bool pass = epochs.size() == 50 && last < 0.1 * first && sdr_est >= sdr_mix + 5.0;
  return {pass, fmt("%zu epochs, train cost %.4g -> %.4g (%.1f%%), held-out SDR %.2f dB vs "
                    "mixture %.2f dB (+%.2f dB), %.0f s",
                    epochs.size(), first, last, 100 * last / first, sdr_est, sdr_mix,
                    sdr_est - sdr_mix, s)};
}

Outcome bss_checks() {
  auto s1 = noise(6000, 5), s2 = noise(6000, 6);
  const auto capped = bss_eval(s1, {s1, s2}, 0);
  bool pass = capped.sdr == 300 && capped.sir == 300 && capped.sar == 300;

  auto est = s1;
  const auto art = noise(6000, 9, 0.2);
  for (std::size_t i = 0; i < est.size(); ++i) est[i] += 0.3 * s2[i] + art[i];
  BssConfig small;
  small.filter_len = 64;
  const auto base = bss_eval(est, {s1, s2}, 0, small);
  double drift = 0;
  for (double g : {0.01, 3.7, 250.0}) {
    std::vector<double> scaled(est);
    for (auto& v : scaled) v *= g;
    const auto r = bss_eval(scaled, {s1, s2}, 0, small);
    drift = std::max({drift, std::abs(r.sdr - base.sdr), std::abs(r.sir - base.sir),
                      std::abs(r.sar - base.sar)});
  }
  pass = pass && drift <= 1e-9;

  // Disjoint supports more than one filter length apart.
  const std::size_t n = 6000, gap = 600;
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= n / 2 - gap) s1[i] = 0.0;
    if (i < n / 2) s2[i] = 0.0;
  }
  double e1 = 0, e2 = 0;
  for (std::size_t i = 0; i < n; ++i) e1 += s1[i] * s1[i], e2 += s2[i] * s2[i];
  std::vector<double> mix(n);
  for (std::size_t i = 0; i < n; ++i) mix[i] = s1[i] / std::sqrt(e1) + 0.1 * s2[i] / std::sqrt(e2);
  for (auto& v : s1) v /= std::sqrt(e1);
  for (auto& v : s2) v /= std::sqrt(e2);
  const auto orth = bss_eval(mix, {s1, s2}, 0);
  pass = pass && std::abs(orth.sir - 20) <= 0.1 && std::abs(orth.sdr - 20) <= 0.1;
  return {pass, fmt("identity %.0f/%.0f/%.0f dB (capped), gain drift %.1e dB, orthogonal case "
                    "SIR %.4f SDR %.4f dB",
                    capped.sdr, capped.sir, capped.sar, drift, orth.sir, orth.sdr)};
}

Outcome wilcoxon_checks() {
  std::mt19937_64 rng(9);
  double worst = 0;
  std::size_t cases = 0;
  for (std::size_t n = 1; n <= 12; ++n)
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> a(n), b(n), diffs;
      // Integer values make ties and zero differences common.
      std::uniform_int_distribution<int> d(-4, 4);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = rep % 2 ? d(rng) : std::uniform_real_distribution<double>(-1, 1)(rng);
        b[i] = rep % 2 ? d(rng) : std::uniform_real_distribution<double>(-1, 1)(rng);
        if (a[i] != b[i]) diffs.push_back(a[i] - b[i]);
      }
      worst = std::max(worst, std::abs(wilcoxon_signed_rank(a, b).p -
                                       testing::enumerate_wilcoxon(diffs)));
      ++cases;
    }
  const std::vector<double> same(9, 2.5);
  const double p_same = wilcoxon_signed_rank(same, same).p;
  const auto adj = bonferroni({0.2, 0.6, 0.01}, 3);
  const bool pass = worst <= 1e-12 && p_same == 1.0 && adj[1] == 1.0 &&
                    std::abs(adj[0] - 0.6) < 1e-15 && std::abs(adj[2] - 0.03) < 1e-15;
  return {pass, fmt("%zu cases n<=12, max |p - enumeration| %.1e, all-equal p %.1f, "
                    "Bonferroni(0.6, m=3) %.1f",
                    cases, worst, p_same, adj[1])};
}

Outcome determinism(const fs::path& root) {
  std::string detail;
  bool pass = true;
  for (const char* precision : {"f32", "f64"}) {
    RunConfig cfg = write_config(root / (std::string("det_") + precision + ".json"),
                                 desk_config(root, 3, precision));
    std::ostringstream log;
    cfg.checkpoints = root / (std::string("det_a_") + precision);
    const auto a = cmd_train(cfg, log);
    cfg.checkpoints = root / (std::string("det_b_") + precision);
    const auto b = cmd_train(cfg, log);
    const bool same = slurp(a.history) == slurp(b.history) &&
                      slurp(a.checkpoint) == slurp(b.checkpoint) && !slurp(a.checkpoint).empty();
    pass = pass && same;
    detail += fmt("%s%s %s", detail.empty() ? "" : ", ", precision,
                  same ? "history and checkpoint byte-identical" : "outputs differ");
  }
  return {pass, detail};
}

Outcome plateau_schedule() {
  const auto t0 = Clock::now();
  TrainConfig cfg;
  const std::vector<double> costs{5.0, 4.0, 4.1, 4.2, 4.3};
  double lr = cfg.lr0;
  std::size_t reductions = 0;
  std::vector<double> seen;
  for (double c : costs) {
    seen.push_back(c);
    const double next = plateau_update(seen, lr, cfg);
    if (next < lr) ++reductions;
    lr = next;
  }
  const double ms = seconds_since(t0) * 1e3;
  return {reductions == 1 && std::abs(lr - cfg.lr0 / 10) < 1e-20 && ms < 1.0,
          fmt("%zu reduction, lr %.0e -> %.0e in %.3f ms", reductions, cfg.lr0, lr, ms)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1])
                                 : fs::temp_directory_path() /
                                       ("mrfcnn_acceptance_" + std::to_string(getpid()));
  fs::remove_all(root);
  fs::create_directories(root);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> checks{
      {"parameter counts", parameter_counts},
      {"convolution oracle", convolution_oracle},
      {"gradient check", gradient_check},
      {"STFT round trip", stft_round_trip},
      {"desk-scale learning",
       [&] {
         const fs::path held = prepare_desk_corpus(root);
         return desk_learning(root, held);
       }},
      {"BSS-eval", bss_checks},
      {"Wilcoxon exactness", wilcoxon_checks},
      {"determinism", [&] { return determinism(root); }},
      {"plateau schedule", plateau_schedule},
  };
  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    Outcome o;
    try {
      o = checks[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << checks[i].first
              << "): " << o.detail << std::endl;
  }
  if (argc <= 1) fs::remove_all(root);
  return failures == 0 ? 0 : 1;
}
