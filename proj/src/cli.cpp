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


#include "mrfcnn/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "mrfcnn/checkpoint.hpp"
#include "mrfcnn/dataset.hpp"
#include "mrfcnn/errors.hpp"
#include "mrfcnn/separate.hpp"
#include "mrfcnn/wav.hpp"

namespace mrfcnn {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string epoch_line(const EpochRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "epoch %zu train_cost %.6g val_cost %.6g lr %.3g", r.epoch,
                r.train_cost, r.val_cost, r.lr);
  return buf;
}

template <typename T>
TrainOutputs train_impl(const RunConfig& config, std::ostream& log) {
  const NetworkSpec spec = config.model_spec();
  check_model_geometry(config, spec);
  fs::create_directories(config.checkpoints);
  TrainOutputs outs;
  outs.checkpoint = config.checkpoints / "best.ckpt";
  outs.history = config.checkpoints / "history.csv";
  outs.log = config.checkpoints / "train.log";
  outs.config = config.checkpoints / "effective_config.json";
  write_effective_config(outs.config, config);

  std::ostringstream text;
  const auto emit = [&](const std::string& line) {
    text << line << '\n';
    log << line << '\n';
  };

  std::vector<std::string> sources = config.sources;
  const CorpusScan scan = scan_corpus(config.corpus, sources);
  for (const auto& w : scan.warnings) emit("warning: " + w);
  for (const auto& s : scan.skipped) emit("skipped: " + s);
  SplitSpec ss;
  ss.ratio = config.split_ratio;
  ss.boundary = config.split_boundary;
  ss.seed = config.seed;
  const Split parts = split(scan.pairs, ss);
  if (!parts.warning.empty()) emit("warning: " + parts.warning);
  emit("tracks: " + std::to_string(parts.train.size()) + " train, " +
       std::to_string(parts.validation.size()) + " validation");

  auto train_set = build_segment_pairs<T>(parts.train, config.target, config.segments(true));
  auto val_set = build_segment_pairs<T>(parts.validation, config.target, config.segments(false));
  for (const auto& w : train_set.warnings) emit("warning: " + w);
  for (const auto& w : val_set.warnings) emit("warning: " + w);
  if (train_set.pairs.size() == 0)
    throw ParameterError("training corpus yields no segments for target '" + config.target + "'");
  emit("segments: " + std::to_string(train_set.pairs.size()) + " train, " +
       std::to_string(val_set.pairs.size()) + " validation");

  TrainConfig tc = config.train;
  tc.seed = config.seed;
  tc.threads = config.threads;
  const json base = portable_json(config);

  TrainCallbacks<T> cb;
  cb.on_epoch = [&](const EpochRecord& r) { emit(epoch_line(r)); };
  cb.on_improvement = [&](const Model<T>& m, const EpochRecord& r) {
    save_checkpoint(outs.checkpoint, m,
                    {{"config", base}, {"epoch", r.epoch}, {"val_cost", r.val_cost}});
  };
  const Model<T> model = init_model<T>(spec, config.seed);
  TrainResult<T> result = train(model, train_set.pairs, val_set.pairs, tc, cb);
  if (result.history.validation_fallback)
    emit("warning: no validation segments, the schedule followed the training cost");
  if (!fs::exists(outs.checkpoint))
    save_checkpoint(outs.checkpoint, result.model,
                    {{"config", base}, {"epoch", result.history.best_epoch},
                     {"val_cost", result.history.best_cost}});
  char buf[96];
  std::snprintf(buf, sizeof buf, "best epoch %zu cost %.6g", result.history.best_epoch,
                result.history.best_cost);
  emit(buf);
  write_history_csv(outs.history, result.history);
  write_text(outs.log, text.str());
  outs.result = std::move(result.history);
  return outs;
}

template <typename T>
void separate_impl(const RunConfig& config, const fs::path& checkpoint, const fs::path& input,
                   const fs::path& output) {
  const auto loaded = load_checkpoint<T>(checkpoint);
  check_model_geometry(config, loaded.model.spec);
  const Waveform mix = load_wav(input);
  const Waveform est = separate(loaded.model, mix, config.separate_options());
  if (output.has_parent_path()) fs::create_directories(output.parent_path());
  write_wav(output, est, WavEncoding::float32);
  RunConfig effective = config;
  effective.inline_model = loaded.model.spec;
  fs::path snapshot = output;
  snapshot += ".config.json";
  write_effective_config(snapshot, effective);
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

}  // namespace

json portable_json(const RunConfig& config) {
  json j = to_json(config);
  j.erase("paths");
  return j;
}

void write_effective_config(const fs::path& path, const RunConfig& config) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text(path, to_json(config).dump(2) + "\n");
}

std::size_t cmd_param_count(const NetworkSpec& spec) { return count_parameters(spec); }

GradcheckReport cmd_gradcheck(const NetworkSpec& spec, std::uint64_t seed,
                              std::function<void(ParameterList<double>&)> corrupt) {
  GradcheckOptions opts;
  opts.seed = seed;
  opts.corrupt = std::move(corrupt);
  return gradcheck(gradcheck_spec(spec), opts);
}

TrainOutputs cmd_train(const RunConfig& config, std::ostream& log) {
  return config.precision == Precision::f64 ? train_impl<double>(config, log)
                                            : train_impl<float>(config, log);
}

RunConfig checkpoint_config(const fs::path& checkpoint) {
  const json header = read_checkpoint_header(checkpoint);
  if (!header.contains("training") || !header["training"].contains("config"))
    throw FormatError(checkpoint.string() + ": header has no run configuration");
  return run_config_from_json(header["training"]["config"]);
}

void cmd_separate(const RunConfig& config, const fs::path& checkpoint, const fs::path& input,
                  const fs::path& output) {
  if (config.precision == Precision::f64)
    separate_impl<double>(config, checkpoint, input, output);
  else
    separate_impl<float>(config, checkpoint, input, output);
}

CorpusReport cmd_evaluate(const RunConfig& config, const fs::path& estimates,
                          const fs::path& references) {
  const CorpusReport report = evaluate_corpus(estimates, references, config.corpus_eval());
  fs::create_directories(config.reports);
  write_metrics_csv(config.reports / "metrics.csv", report);
  write_significance_csv(config.reports / "significance.csv", report);
  write_summary_csv(config.reports / "summary.csv", report);
  std::string skipped;
  for (const auto& s : report.skipped) skipped += s + '\n';
  write_text(config.reports / "skipped.txt", skipped);
  write_effective_config(config.reports / "effective_config.json", config);
  return report;
}

std::vector<fs::path> cmd_synth(const RunConfig& config) {
  SynthConfig sc = config.synth;
  sc.seed = config.seed;
  auto dirs = make_synthetic(config.corpus, sc);
  write_effective_config(config.corpus / "effective_config.json", config);
  return dirs;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectrogram source separation with multi-resolution convolutional networks",
               "mrfcnn"};
  app.require_subcommand(1);

  std::string config_path, model, precision;
  std::optional<std::uint64_t> seed;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--model", model, "builtin network: " + join(named_spec_names()));
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--precision", precision, "f32 or f64")
        ->check(CLI::IsMember({"f32", "f64"}));
  };

  auto* param_count = app.add_subcommand("param-count", "print the number of trainable parameters");
  common(param_count);
  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of the network gradient");
  common(grad);
  auto* train_cmd = app.add_subcommand("train", "train one network on a corpus");
  common(train_cmd);
  std::string train_corpus, train_out;
  train_cmd->add_option("--corpus", train_corpus, "corpus root (overrides paths.corpus)");
  train_cmd->add_option("--output", train_out, "checkpoint directory (overrides paths.checkpoints)");

  auto* sep = app.add_subcommand("separate", "estimate the target source of a mixture");
  common(sep);
  std::string ckpt, input, output;
  sep->add_option("--checkpoint", ckpt, "trained checkpoint")->required()->check(CLI::ExistingFile);
  sep->add_option("input", input, "mixture WAV")->required()->check(CLI::ExistingFile);
  sep->add_option("output", output, "estimate WAV")->required();

  auto* eval = app.add_subcommand("evaluate", "BSS-eval metrics and significance tests");
  common(eval);
  std::string estimates, references, reports;
  eval->add_option("--estimates", estimates, "<model>/<track>.wav tree")->required()
      ->check(CLI::ExistingDirectory);
  eval->add_option("--references", references, "<track>/<source>.wav tree")->required()
      ->check(CLI::ExistingDirectory);
  eval->add_option("--output", reports, "report directory (overrides paths.reports)");

  auto* synth = app.add_subcommand("synth", "write a seeded synthetic corpus");
  common(synth);
  std::string synth_out;
  synth->add_option("--output", synth_out, "corpus root (overrides paths.corpus)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    RunConfig config;
    if (sep->parsed() && config_path.empty()) config = checkpoint_config(ckpt);
    if (!config_path.empty()) config = load_run_config(config_path);
    if (!model.empty()) {
      config.model_name = model;
      config.inline_model.reset();
      (void)named_spec(model);
    }
    if (seed) config.seed = *seed;
    if (!precision.empty()) config.precision = parse_precision(precision);

    if (param_count->parsed()) {
      out << cmd_param_count(config.model_spec()) << '\n';
      return 0;
    }
    if (grad->parsed()) {
      const auto report = cmd_gradcheck(config.model_spec(), config.seed);
      out << format_report(report);
      return report.passed ? 0 : 1;
    }
    if (train_cmd->parsed()) {
      if (!train_corpus.empty()) config.corpus = train_corpus;
      if (!train_out.empty()) config.checkpoints = train_out;
      const auto outs = cmd_train(config, out);
      out << "wrote " << outs.checkpoint.string() << '\n';
      return 0;
    }
    if (sep->parsed()) {
      cmd_separate(config, ckpt, input, output);
      out << "wrote " << output << '\n';
      return 0;
    }
    if (eval->parsed()) {
      if (!reports.empty()) config.reports = reports;
      const auto report = cmd_evaluate(config, estimates, references);
      out << report.rows.size() << " rows, " << report.skipped.size() << " skipped, wrote "
          << config.reports.string() << '\n';
      return 0;
    }
    if (synth->parsed()) {
      if (!synth_out.empty()) config.corpus = synth_out;
      const auto dirs = cmd_synth(config);
      out << "wrote " << dirs.size() << " tracks to " << config.corpus.string() << '\n';
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

}  // namespace mrfcnn
