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


#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "mrfcnn/bss_eval.hpp"
#include "mrfcnn/corpus_eval.hpp"
#include "mrfcnn/errors.hpp"
#include "mrfcnn/stats.hpp"
#include "mrfcnn/wav.hpp"
#include "oracles.hpp"

namespace mrfcnn {
namespace {

namespace fs = std::filesystem;

std::vector<double> noise(std::size_t n, std::uint64_t seed, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, amp);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

std::vector<double> scaled_sum(const std::vector<double>& a, double ka,
                               const std::vector<double>& b, double kb) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = ka * a[i] + kb * b[i];
  return out;
}

void normalize(std::vector<double>& x) {
  double e = 0;
  for (double v : x) e += v * v;
  for (double& v : x) v /= std::sqrt(e);
}

std::vector<double> nonzero_diffs(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  return d;
}

TEST(BssEval, EstimateEqualToTargetIsCapped) {
  const auto s1 = noise(4000, 1), s2 = noise(4000, 2);
  const auto r = bss_eval(s1, {s1, s2}, 0);
  EXPECT_EQ(r.sdr, 300.0);
  EXPECT_EQ(r.sir, 300.0);
  EXPECT_EQ(r.sar, 300.0);
}

TEST(BssEval, ScalarGainIsAbsorbed) {
  const auto s1 = noise(4000, 3), s2 = noise(4000, 4);
  const auto r = bss_eval(scaled_sum(s1, 0.5, s2, 0.0), {s1, s2}, 0);
  EXPECT_EQ(r.sdr, 300.0);
}

TEST(BssEval, OrthogonalSourcesGiveTwentyDecibels) {
  // Disjoint supports more than filter_len apart keep every pair of lagged
  // copies orthogonal.
  const std::size_t n = 6000, gap = 600;
  auto s1 = noise(n, 5), s2 = noise(n, 6);
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= n / 2 - gap) s1[i] = 0.0;
    if (i < n / 2) s2[i] = 0.0;
  }
  normalize(s1);
  normalize(s2);
  const auto r = bss_eval(scaled_sum(s1, 1.0, s2, 0.1), {s1, s2}, 0);
  EXPECT_NEAR(r.sir, 20.0, 1e-6);
  EXPECT_NEAR(r.sdr, 20.0, 1e-6);
  EXPECT_EQ(r.sar, 300.0);
  EXPECT_FALSE(r.regularized);
}

TEST(BssEval, InvariantToPositiveGain) {
  const auto s1 = noise(3000, 7), s2 = noise(3000, 8), e = noise(3000, 9, 0.2);
  auto est = scaled_sum(s1, 1.0, s2, 0.3);
  for (std::size_t i = 0; i < est.size(); ++i) est[i] += e[i];
  BssConfig cfg;
  cfg.filter_len = 64;
  const auto a = bss_eval(est, {s1, s2}, 0, cfg);
  for (double g : {0.01, 3.7, 250.0}) {
    const auto b = bss_eval(scaled_sum(est, g, est, 0.0), {s1, s2}, 0, cfg);
    EXPECT_NEAR(a.sdr, b.sdr, 1e-9);
    EXPECT_NEAR(a.sir, b.sir, 1e-9);
    EXPECT_NEAR(a.sar, b.sar, 1e-9);
  }
}

TEST(BssEval, SdrNeverExceedsSir) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s1 = noise(2000, 100 + seed), s2 = noise(2000, 200 + seed);
    const auto e = noise(2000, 300 + seed, 0.5);
    auto est = scaled_sum(s1, 1.0, s2, 0.05 * static_cast<double>(seed));
    for (std::size_t i = 0; i < est.size(); ++i) est[i] += e[i] * 0.1 * static_cast<double>(seed);
    BssConfig cfg;
    cfg.filter_len = 32;
    const auto r = bss_eval(est, {s1, s2}, 0, cfg);
    EXPECT_LE(r.sdr, r.sir + 1e-9) << seed;
  }
}

TEST(BssEval, ProjectionOfTargetIsIdempotent) {
  auto s1 = noise(2500, 10);
  const auto s2 = noise(2500, 11);
  BssConfig cfg;
  cfg.filter_len = 16;
  // A short FIR-filtered target lies inside the allowed distortion class
  // as long as the filter tail does not run past the end.
  for (std::size_t i = s1.size() - 16; i < s1.size(); ++i) s1[i] = 0.0;
  std::vector<double> filtered(s1.size(), 0.0);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    filtered[i] = 0.7 * s1[i];
    if (i >= 3) filtered[i] += 0.2 * s1[i - 3];
  }
  const auto r = bss_eval(filtered, {s1, s2}, 0, cfg);
  EXPECT_EQ(r.sdr, 300.0);
  EXPECT_EQ(r.sir, 300.0);
  EXPECT_EQ(r.sar, 300.0);
}

TEST(BssEval, ZeroEstimateAndDegenerateReferences) {
  const auto s1 = noise(1000, 12), s2 = noise(1000, 13);
  const auto z = bss_eval(std::vector<double>(1000, 0.0), {s1, s2}, 0);
  EXPECT_TRUE(z.zero_estimate);
  EXPECT_EQ(z.sdr, -300.0);
  BssConfig cfg;
  cfg.filter_len = 8;
  const auto r = bss_eval(scaled_sum(s1, 1.0, s2, 0.5), {s1, s1}, 0, cfg);
  EXPECT_TRUE(r.regularized);
  EXPECT_TRUE(std::isfinite(r.sdr) && std::isfinite(r.sir) && std::isfinite(r.sar));
  EXPECT_THROW(bss_eval(s1, {std::vector<double>(999, 0.0)}, 0), ShapeError);
  EXPECT_THROW(bss_eval(s1, {s1}, 1), ShapeError);
}

TEST(Wilcoxon, IdenticalSamplesGiveOne) {
  const std::vector<double> a{1, 2, 3, 4};
  const auto r = wilcoxon_signed_rank(a, a);
  EXPECT_EQ(r.p, 1.0);
  EXPECT_EQ(r.n, 0u);
}

TEST(Wilcoxon, FiveDistinctPositiveDifferences) {
  EXPECT_DOUBLE_EQ(wilcoxon_signed_rank({1.1, 2.2, 3.3, 4.4, 5.5}, {0, 0, 0, 0, 0}).p, 2.0 / 32.0);
}

TEST(Wilcoxon, ExactPathMatchesEnumerationWithTies) {
  std::mt19937_64 rng(14);
  std::uniform_int_distribution<int> d(-4, 4);
  for (std::size_t n = 1; n <= 12; ++n)
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> a(n), b(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = d(rng);
        b[i] = d(rng) * 0.5;
      }
      const double p = wilcoxon_signed_rank(a, b).p;
      EXPECT_NEAR(p, testing::enumerate_wilcoxon(nonzero_diffs(a, b)), 1e-12) << n;
      EXPECT_EQ(p, wilcoxon_signed_rank(b, a).p);
    }
}

TEST(Wilcoxon, RandomTenMatchesEnumeration) {
  const auto a = noise(10, 15), b = noise(10, 16);
  EXPECT_NEAR(wilcoxon_signed_rank(a, b).p, testing::enumerate_wilcoxon(nonzero_diffs(a, b)),
              1e-12);
}

TEST(Wilcoxon, NormalApproximationMatchesReferenceValue) {
  const std::vector<double> a{-0.8, -1.3, -0.2, 0.4,  1.1,  0.1,  -0.6, -0.8, 0.7, 1.6,
                              0.3,  -1.2, -1.0, 1.6,  0.2,  -1.7, -0.1, -1.2, -0.6, -0.5,
                              -0.7, 0.6,  -0.1, -0.6, 0.4,  0.8,  -1.6, -0.3, -1.0, -0.2};
  const std::vector<double> b{-0.9, 0.4,  0.4, 0.1,  -0.6, 0.0,  -0.7, -1.0, 0.6, -0.7,
                              1.6,  1.1,  -1.6, 0.7, -0.7, 0.4,  0.4,  -1.6, 0.2, 0.1,
                              1.4,  -0.8, 1.1, -0.7, 0.1,  -0.4, 1.8,  1.0,  2.8, 1.0};
  const auto r = wilcoxon_signed_rank(a, b);
  EXPECT_FALSE(r.exact);
  EXPECT_EQ(r.w, 180.0);
  EXPECT_NEAR(r.p, 0.2846164209745947, 1e-12);
}

TEST(Bonferroni, ScalesAndClamps) {
  EXPECT_EQ(bonferroni({0.01, 0.5}, 3), (std::vector<double>{0.03, 1.0}));
  EXPECT_EQ(bonferroni({0.2, 0.7}, 1), (std::vector<double>{0.2, 0.7}));
  EXPECT_THROW(bonferroni({0.1}, 0), ParameterError);
}

TEST(BoxSummary, QuartilesWhiskersAndOutliers) {
  const auto s = box_summary({1, 2, 3, 4, 5, 6, 7, 8, 9, 100});
  EXPECT_EQ(s.count, 10u);
  EXPECT_DOUBLE_EQ(s.median, 5.5);
  EXPECT_DOUBLE_EQ(s.q1, 3.25);
  EXPECT_DOUBLE_EQ(s.q3, 7.75);
  EXPECT_EQ(s.whisker_low, 1.0);
  EXPECT_EQ(s.whisker_high, 9.0);
  EXPECT_EQ(s.outliers, (std::vector<double>{100.0}));
}

class CorpusDir : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("mrfcnn_eval_" + std::to_string(::getpid()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(root_ / "refs");
    fs::create_directories(root_ / "est");
  }
  void TearDown() override { fs::remove_all(root_); }

  void add_track(const std::string& name, std::uint64_t seed) {
    const auto dir = root_ / "refs" / name;
    fs::create_directories(dir);
    write_wav(dir / "tonal.wav", Waveform{noise(3000, seed, 0.2), 8000});
    write_wav(dir / "noise.wav", Waveform{noise(3000, seed + 1, 0.2), 8000});
  }
  void add_estimate(const std::string& model, const std::string& track, double leak) {
    const auto a = load_wav(root_ / "refs" / track / "tonal.wav").samples;
    const auto b = load_wav(root_ / "refs" / track / "noise.wav").samples;
    fs::create_directories(root_ / "est" / model);
    write_wav(root_ / "est" / model / (track + ".wav"), Waveform{scaled_sum(a, 1.0, b, leak), 8000});
  }

  CorpusEvalConfig config() const {
    CorpusEvalConfig c;
    c.target = "tonal";
    c.bss.filter_len = 32;
    return c;
  }

  fs::path root_;
};

TEST_F(CorpusDir, ExactEstimateGivesCappedRow) {
  add_track("a", 1);
  add_estimate("m", "a", 0.0);
  const auto r = evaluate_corpus(root_ / "est", root_ / "refs", config());
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].metrics.sdr, 300.0);
  EXPECT_TRUE(r.skipped.empty());
  write_metrics_csv(root_ / "m.csv", r);
  EXPECT_TRUE(fs::file_size(root_ / "m.csv") > 0);
}

TEST_F(CorpusDir, IdenticalModelsAreNotSignificant) {
  for (int t = 0; t < 4; ++t) {
    add_track("t" + std::to_string(t), 10 + 2 * t);
    add_estimate("x", "t" + std::to_string(t), 0.1 * t + 0.05);
    add_estimate("y", "t" + std::to_string(t), 0.1 * t + 0.05);
  }
  const auto r = evaluate_corpus(root_ / "est", root_ / "refs", config());
  EXPECT_EQ(r.comparisons, 1u);
  ASSERT_EQ(r.tests.size(), 3u);
  for (const auto& t : r.tests) {
    EXPECT_EQ(t.p_raw, 1.0);
    EXPECT_EQ(t.n, 4u);
  }
}

TEST_F(CorpusDir, ThreeModelsUseThreeComparisonsAndReportMissingTracks) {
  for (int t = 0; t < 3; ++t) add_track("t" + std::to_string(t), 30 + 2 * t);
  for (int t = 0; t < 3; ++t) {
    add_estimate("dnn", "t" + std::to_string(t), 0.5);
    add_estimate("fcnn", "t" + std::to_string(t), 0.3);
    if (t != 1) add_estimate("mrfcnn", "t" + std::to_string(t), 0.1);
  }
  fs::remove(root_ / "refs" / "t2" / "noise.wav");
  auto cfg = config();
  cfg.sources = {"tonal", "noise"};
  const auto r = evaluate_corpus(root_ / "est", root_ / "refs", cfg);
  EXPECT_EQ(r.comparisons, 3u);
  EXPECT_EQ(r.tests.size(), 9u);
  for (const auto& t : r.tests) EXPECT_DOUBLE_EQ(t.p_adjusted, std::min(1.0, 3.0 * t.p_raw));
  EXPECT_EQ(r.rows.size(), 5u);
  EXPECT_EQ(r.skipped.size(), 4u);
  bool named = false;
  for (const auto& s : r.skipped) named = named || s.rfind("mrfcnn/t1", 0) == 0;
  EXPECT_TRUE(named);
  EXPECT_EQ(r.summaries.size(), 9u);
}

}  // namespace
}  // namespace mrfcnn
