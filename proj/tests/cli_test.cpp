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


#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mrfcnn/cli.hpp"
#include "mrfcnn/wav.hpp"

namespace mrfcnn {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Cli {
  int code = 0;
  std::string out, err;
};

Cli run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Cli r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("mrfcnn_cli_" + std::to_string(getpid()) + "_" +
           ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  }

  // Four one-second synthetic tracks and a toy network sized for them.
  fs::path toy_config(const std::string& precision = "f32") {
    const std::string root = dir.string();
    return write("toy_" + precision + ".json", R"({
      "stft": {"window": 10, "hop": 5, "fft": 10},
      "segments": {"N": 4, "stride_train": 4, "stride_infer": 4},
      "model": "toy",
      "train": {"batch_size": 16, "lr0": 0.001, "max_epochs": 3},
      "dataset": {"target": "tonal", "sources": ["tonal", "noise"], "split_ratio": 0.75},
      "synth": {"num_tracks": 4, "duration": 1, "sample_rate": 8000},
      "paths": {"corpus": ")" + root + R"(/corpus", "checkpoints": ")" + root +
                                     R"(/ck", "reports": ")" + root + R"(/rep"},
      "seed": 5, "precision": ")" + precision + R"("})");
  }

  fs::path dir;
};

TEST_F(CliTest, ParamCountPrintsBuiltinTotals) {
  EXPECT_EQ(run({"param-count", "--model", "mr-fcnn"}).out, "558181\n");
  EXPECT_EQ(run({"param-count", "--model", "fcnn"}).out, "445173\n");
  EXPECT_EQ(run({"param-count", "--model", "dnn"}).out, "4206600\n");
  EXPECT_EQ(run({"param-count", "--model", "dnn"}).code, 0);
}

TEST_F(CliTest, BadSpecIsRejectedWithDiagnostic) {
  const auto bad = write("bad.json", R"({"model": {"kind": "mlp", "layer_widths": "wide"}})");
  const auto r = run({"param-count", "--config", bad.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("config.model"), std::string::npos) << r.err;
  const auto unknown = write("unknown.json", R"({"trian": {}})");
  const auto u = run({"param-count", "--config", unknown.string()});
  EXPECT_EQ(u.code, 2);
  EXPECT_NE(u.err.find("trian"), std::string::npos) << u.err;
  EXPECT_EQ(run({"param-count", "--model", "resnet"}).code, 2);
  EXPECT_EQ(run({"param-count", "--precision", "f16"}).code, 2);
}

TEST_F(CliTest, GradcheckPassesOnToyAndReportsEveryLayer) {
  const auto report = cmd_gradcheck(named_spec("toy"), 1);
  EXPECT_TRUE(report.passed);
  EXPECT_LT(report.worst, 1e-5);
  EXPECT_EQ(report.layers.size(), 3u);
  const auto r = run({"gradcheck", "--model", "toy", "--seed", "2"});
  EXPECT_EQ(r.code, 0);
  for (const char* line : {"layer 1:", "layer 2:", "layer 3:", "input:", "PASS"})
    EXPECT_NE(r.out.find(line), std::string::npos) << line;
}

TEST_F(CliTest, GradcheckFailsOnCorruptedGradient) {
  const auto report = cmd_gradcheck(named_spec("toy"), 1, [](ParameterList<double>& g) {
    for (auto& v : g[4].storage()) v *= 1.01;  // layer2.set1.filters
  });
  EXPECT_FALSE(report.passed);
  EXPECT_GT(report.layers[1].worst, 1e-4);
  EXPECT_LT(report.layers[0].worst, 1e-4);
  EXPECT_NE(format_report(report).find("FAIL"), std::string::npos);
}

TEST_F(CliTest, TrainSeparateEvaluateRoundTrip) {
  const auto cfg = toy_config();
  ASSERT_EQ(run({"synth", "--config", cfg.string()}).code, 0);
  const auto t = run({"train", "--config", cfg.string()});
  ASSERT_EQ(t.code, 0) << t.err;
  for (const char* f : {"best.ckpt", "history.csv", "train.log", "effective_config.json"})
    EXPECT_TRUE(fs::exists(dir / "ck" / f)) << f;
  EXPECT_NE(slurp(dir / "ck" / "train.log").find("epoch 3"), std::string::npos);

  const auto mix = dir / "corpus" / "track_001" / "mixture.wav";
  const auto est = dir / "est" / "toy" / "track_001.wav";
  const auto s = run({"separate", "--checkpoint", (dir / "ck" / "best.ckpt").string(),
                      mix.string(), est.string()});
  ASSERT_EQ(s.code, 0) << s.err;
  const auto info_in = read_wav_info(mix), info_out = read_wav_info(est);
  EXPECT_EQ(info_out.frames, info_in.frames);
  EXPECT_EQ(info_out.sample_rate, info_in.sample_rate);
  EXPECT_TRUE(fs::exists(est.string() + ".config.json"));

  fs::create_directories(dir / "est" / "oracle");
  fs::copy_file(dir / "corpus" / "track_001" / "tonal.wav", dir / "est" / "oracle" / "track_001.wav");
  const auto e = run({"evaluate", "--config", cfg.string(), "--estimates", (dir / "est").string(),
                      "--references", (dir / "corpus").string()});
  ASSERT_EQ(e.code, 0) << e.err;
  const auto metrics = slurp(dir / "rep" / "metrics.csv");
  EXPECT_NE(metrics.find("track_001,oracle,300,300,300"), std::string::npos) << metrics;
  for (const char* f : {"significance.csv", "summary.csv", "skipped.txt", "effective_config.json"})
    EXPECT_TRUE(fs::exists(dir / "rep" / f)) << f;
}

TEST_F(CliTest, TrainingIsDeterministicAndSnapshotReproducesIt) {
  for (const std::string precision : {"f32", "f64"}) {
    const auto cfg = toy_config(precision);
    ASSERT_EQ(run({"synth", "--config", cfg.string()}).code, 0);
    const auto a = dir / ("a_" + precision), b = dir / ("b_" + precision),
               c = dir / ("c_" + precision);
    ASSERT_EQ(run({"train", "--config", cfg.string(), "--output", a.string()}).code, 0);
    ASSERT_EQ(run({"train", "--config", cfg.string(), "--output", b.string()}).code, 0);
    ASSERT_EQ(run({"train", "--config", (a / "effective_config.json").string(), "--output",
                   c.string()}).code, 0);
    for (const auto& other : {b, c}) {
      EXPECT_EQ(slurp(a / "history.csv"), slurp(other / "history.csv")) << precision;
      EXPECT_EQ(slurp(a / "best.ckpt"), slurp(other / "best.ckpt")) << precision;
    }
    const auto seeded = dir / ("s_" + precision);
    ASSERT_EQ(run({"train", "--config", cfg.string(), "--seed", "6", "--output",
                   seeded.string()}).code, 0);
    EXPECT_NE(slurp(a / "best.ckpt"), slurp(seeded / "best.ckpt"));
  }
}

TEST_F(CliTest, SeparateSnapshotReproducesOutput) {
  const auto cfg = toy_config();
  ASSERT_EQ(run({"synth", "--config", cfg.string()}).code, 0);
  ASSERT_EQ(run({"train", "--config", cfg.string()}).code, 0);
  const auto ckpt = (dir / "ck" / "best.ckpt").string();
  const auto mix = (dir / "corpus" / "track_002" / "mixture.wav").string();
  const auto first = dir / "one.wav", second = dir / "two.wav";
  ASSERT_EQ(run({"separate", "--checkpoint", ckpt, mix, first.string()}).code, 0);
  ASSERT_EQ(run({"separate", "--checkpoint", ckpt, "--config", first.string() + ".config.json",
                 mix, second.string()}).code, 0);
  EXPECT_EQ(slurp(first), slurp(second));
}

TEST_F(CliTest, ErrorsGiveNonzeroExitAndMessage) {
  const auto cfg = toy_config();
  const auto r = run({"train", "--config", cfg.string()});  // corpus not written yet
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"separate", "--checkpoint", cfg.string()}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

}  // namespace
}  // namespace mrfcnn
