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


#include "mrfcnn/corpus_eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>

#include "mrfcnn/errors.hpp"
#include "mrfcnn/parallel.hpp"
#include "mrfcnn/wav.hpp"

namespace mrfcnn {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (directories ? e.is_directory() : (e.is_regular_file() && e.path().extension() == ".wav"))
      names.push_back(directories ? e.path().filename().string() : e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

double metric_of(const EvalResult& r, const std::string& m) {
  return m == "sdr" ? r.sdr : m == "sir" ? r.sir : r.sar;
}

const char* const kMetrics[] = {"sdr", "sir", "sar"};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

CorpusReport evaluate_corpus(const fs::path& estimates, const fs::path& references,
                             const CorpusEvalConfig& config) {
  config.bss.validate();
  if (!fs::is_directory(references)) throw IoError("no reference directory " + references.string());
  if (!fs::is_directory(estimates)) throw IoError("no estimate directory " + estimates.string());
  CorpusReport report;
  const auto tracks = sorted_entries(references, true);
  auto models = sorted_entries(estimates, true);
  if (config.include_mixture) models.push_back("mixture");

  struct Job {
    std::string track, model;
    fs::path estimate;
    std::vector<fs::path> refs;
    std::size_t target = 0;
    std::optional<EvalResult> result;
    std::string problem;
  };
  std::vector<Job> jobs;
  for (const auto& model : models)
    for (const auto& track : tracks) {
      Job j{track, model, {}, {}, 0, std::nullopt, {}};
      const fs::path tdir = references / track;
      std::vector<std::string> sources = config.sources;
      if (sources.empty())
        for (const auto& s : sorted_entries(tdir, false))
          if (s != "mixture") sources.push_back(s);
      const auto it = std::find(sources.begin(), sources.end(), config.target);
      if (it == sources.end()) {
        j.problem = "no reference for target '" + config.target + "'";
      } else {
        j.target = static_cast<std::size_t>(it - sources.begin());
        for (const auto& s : sources) {
          j.refs.push_back(tdir / (s + ".wav"));
          if (!fs::exists(j.refs.back())) j.problem = "missing reference " + s + ".wav";
        }
      }
      j.estimate = model == "mixture" && config.include_mixture
                       ? tdir / "mixture.wav"
                       : estimates / model / (track + ".wav");
      if (j.problem.empty() && !fs::exists(j.estimate))
        j.problem = "missing estimate " + j.estimate.string();
      jobs.push_back(std::move(j));
    }

  parallel_for(jobs.size(), config.threads, [&](std::size_t i) {
    Job& j = jobs[i];
    if (!j.problem.empty()) return;
    try {
      std::vector<double> est = load_wav(j.estimate).samples;
      std::vector<std::vector<double>> refs;
      std::size_t len = est.size();
      for (const auto& p : j.refs) {
        refs.push_back(load_wav(p).samples);
        len = std::min(len, refs.back().size());
      }
      est.resize(len);
      for (auto& r : refs) r.resize(len);
      j.result = bss_eval(est, refs, j.target, config.bss);
    } catch (const std::exception& e) {
      j.problem = e.what();
    }
  });

  for (const auto& j : jobs) {
    if (j.result)
      report.rows.push_back({j.track, j.model, *j.result});
    else
      report.skipped.push_back(j.model + "/" + j.track + ": " + j.problem);
  }

  std::map<std::string, std::map<std::string, EvalResult>> by_model;
  for (const auto& r : report.rows) by_model[r.model][r.track] = r.metrics;
  report.comparisons = models.size() * (models.size() - (models.empty() ? 0 : 1)) / 2;
  for (std::size_t a = 0; a < models.size(); ++a)
    for (std::size_t b = a + 1; b < models.size(); ++b)
      for (const char* metric : kMetrics) {
        PairwiseTest t{models[a], models[b], metric, 0, 1.0, 1.0};
        std::vector<double> xa, xb;
        for (const auto& [track, ra] : by_model[models[a]]) {
          const auto it = by_model[models[b]].find(track);
          if (it == by_model[models[b]].end()) continue;
          xa.push_back(metric_of(ra, metric));
          xb.push_back(metric_of(it->second, metric));
        }
        t.n = xa.size();
        if (!xa.empty()) t.p_raw = wilcoxon_signed_rank(xa, xb).p;
        t.p_adjusted = bonferroni({t.p_raw}, report.comparisons).front();
        report.tests.push_back(t);
      }
  for (const auto& model : models)
    for (const char* metric : kMetrics) {
      std::vector<double> v;
      for (const auto& [track, r] : by_model[model]) v.push_back(metric_of(r, metric));
      report.summaries.push_back({model, metric, box_summary(std::move(v))});
    }
  return report;
}

void write_metrics_csv(const fs::path& path, const CorpusReport& report) {
  auto out = open_out(path);
  out << "track,model,sdr_db,sir_db,sar_db\n";
  for (const auto& r : report.rows)
    out << r.track << ',' << r.model << ',' << fmt(r.metrics.sdr) << ',' << fmt(r.metrics.sir)
        << ',' << fmt(r.metrics.sar) << '\n';
}

void write_significance_csv(const fs::path& path, const CorpusReport& report) {
  auto out = open_out(path);
  out << "model_a,model_b,metric,n,p_raw,p_adjusted,comparisons\n";
  for (const auto& t : report.tests)
    out << t.model_a << ',' << t.model_b << ',' << t.metric << ',' << t.n << ',' << fmt(t.p_raw)
        << ',' << fmt(t.p_adjusted) << ',' << report.comparisons << '\n';
}

void write_summary_csv(const fs::path& path, const CorpusReport& report) {
  auto out = open_out(path);
  out << "model,metric,count,mean,min,whisker_low,q1,median,q3,whisker_high,max,outliers\n";
  for (const auto& s : report.summaries) {
    const BoxSummary& b = s.box;
    out << s.model << ',' << s.metric << ',' << b.count << ',' << fmt(b.mean) << ','
        << fmt(b.min) << ',' << fmt(b.whisker_low) << ',' << fmt(b.q1) << ',' << fmt(b.median)
        << ',' << fmt(b.q3) << ',' << fmt(b.whisker_high) << ',' << fmt(b.max) << ',';
    for (std::size_t i = 0; i < b.outliers.size(); ++i) out << (i ? ";" : "") << fmt(b.outliers[i]);
    out << '\n';
  }
}

}  // namespace mrfcnn
