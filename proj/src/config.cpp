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


#include "mrfcnn/config.hpp"

#include <fstream>
#include <set>

#include "mrfcnn/errors.hpp"

namespace mrfcnn {

using nlohmann::json;

namespace {

// Walks one JSON object, handing out typed values and rejecting leftovers.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [key, value] : j_.items())
      if (!used_.count(key)) throw ConfigError(path_ + "." + key + ": unknown key");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json* take(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    const json* v = take(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_unsigned_v<T>) {
        if (!v->is_number_unsigned()) throw ConfigError("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw ConfigError("");
      }
      out = v->get<T>();
    } catch (const std::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type (" + v->dump() + ")");
    }
  }

  std::string child(const std::string& key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <typename T>
void positive(const std::string& what, T v) {
  if (!(v > T(0))) throw ConfigError(what + ": must be positive");
}

}  // namespace

Precision parse_precision(const std::string& s) {
  if (s == "f32") return Precision::f32;
  if (s == "f64") return Precision::f64;
  throw ConfigError("precision: expected f32 or f64, got '" + s + "'");
}

const char* precision_label(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  Section top(j, "config");
  if (const json* s = top.take("stft")) {
    Section sec(*s, "config.stft");
    sec.get("window", c.stft.window);
    sec.get("hop", c.stft.hop);
    sec.get("fft", c.stft.fft);
    std::size_t bins = c.stft.bins();
    sec.get("bins", bins);
    if (bins != c.stft.bins())
      throw ConfigError("config.stft.bins: " + std::to_string(bins) + " does not equal fft/2+1 = " +
                        std::to_string(c.stft.bins()));
  }
  if (const json* s = top.take("segments")) {
    Section sec(*s, "config.segments");
    sec.get("N", c.segment_frames);
    sec.get("stride_train", c.stride_train);
    sec.get("stride_infer", c.stride_infer);
  }
  if (const json* m = top.take("model")) {
    if (m->is_string()) {
      c.model_name = m->get<std::string>();
    } else if (m->is_object()) {
      try {
        c.inline_model = network_spec_from_json(*m);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("config.model: ") + e.what());
      }
      c.model_name = "inline";
    } else {
      throw ConfigError("config.model: expected a builtin name or an inline spec object");
    }
  }
  if (const json* s = top.take("train")) {
    Section sec(*s, "config.train");
    sec.get("batch_size", c.train.batch_size);
    sec.get("lr0", c.train.lr0);
    sec.get("beta1", c.train.beta1);
    sec.get("beta2", c.train.beta2);
    sec.get("epsilon", c.train.epsilon);
    sec.get("plateau_factor", c.train.plateau_factor);
    sec.get("plateau_patience", c.train.plateau_patience);
    sec.get("max_epochs", c.train.max_epochs);
    sec.get("min_lr", c.train.min_lr);
  }
  if (const json* s = top.take("eval")) {
    Section sec(*s, "config.eval");
    sec.get("filter_len", c.eval.filter_len);
    sec.get("cap_db", c.eval.cap_db);
    sec.get("include_mixture", c.eval_include_mixture);
  }
  if (const json* s = top.take("dataset")) {
    Section sec(*s, "config.dataset");
    sec.get("target", c.target);
    sec.get("sources", c.sources);
    sec.get("split_ratio", c.split_ratio);
    if (const json* b = sec.take("split_boundary"); b && !b->is_null()) {
      if (!b->is_number_unsigned()) throw ConfigError("config.dataset.split_boundary: wrong type");
      c.split_boundary = b->get<std::size_t>();
    }
    sec.get("magnitude_scale", c.magnitude_scale);
  }
  if (const json* s = top.take("synth")) {
    Section sec(*s, "config.synth");
    sec.get("num_tracks", c.synth.num_tracks);
    sec.get("duration", c.synth.duration);
    sec.get("sample_rate", c.synth.sample_rate);
  }
  if (const json* s = top.take("separate")) {
    Section sec(*s, "config.separate");
    sec.get("soft_mask", c.soft_mask);
  }
  if (const json* s = top.take("paths")) {
    Section sec(*s, "config.paths");
    std::string p;
    if (sec.has("corpus")) { sec.get("corpus", p); c.corpus = p; }
    if (sec.has("checkpoints")) { sec.get("checkpoints", p); c.checkpoints = p; }
    if (sec.has("reports")) { sec.get("reports", p); c.reports = p; }
  }
  top.get("seed", c.seed);
  if (const json* p = top.take("precision")) {
    if (!p->is_string()) throw ConfigError("config.precision: expected a string");
    c.precision = parse_precision(p->get<std::string>());
  }
  top.get("threads", c.threads);

  try {
    c.stft.validate();
    c.train.validate();
    c.eval.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  positive("config.segments.N", c.segment_frames);
  positive("config.segments.stride_train", c.stride_train);
  positive("config.segments.stride_infer", c.stride_infer);
  positive("config.dataset.magnitude_scale", c.magnitude_scale);
  if (!(c.split_ratio > 0.0 && c.split_ratio <= 1.0))
    throw ConfigError("config.dataset.split_ratio: must lie in (0, 1]");
  if (c.sources.empty()) throw ConfigError("config.dataset.sources: empty");
  if (std::find(c.sources.begin(), c.sources.end(), c.target) == c.sources.end())
    throw ConfigError("config.dataset.target: '" + c.target + "' is not among the sources");
  if (!c.inline_model) {
    const auto names = named_spec_names();
    if (std::find(names.begin(), names.end(), c.model_name) == names.end())
      throw ConfigError("config.model: unknown model '" + c.model_name + "'");
  }
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["stft"] = {{"window", c.stft.window}, {"hop", c.stft.hop}, {"fft", c.stft.fft},
               {"bins", c.stft.bins()}};
  j["segments"] = {{"N", c.segment_frames},
                   {"stride_train", c.stride_train},
                   {"stride_infer", c.stride_infer}};
  j["model"] = c.inline_model ? to_json(*c.inline_model) : json(c.model_name);
  j["train"] = {{"batch_size", c.train.batch_size},
                {"lr0", c.train.lr0},
                {"beta1", c.train.beta1},
                {"beta2", c.train.beta2},
                {"epsilon", c.train.epsilon},
                {"plateau_factor", c.train.plateau_factor},
                {"plateau_patience", c.train.plateau_patience},
                {"max_epochs", c.train.max_epochs},
                {"min_lr", c.train.min_lr}};
  j["eval"] = {{"filter_len", c.eval.filter_len},
               {"cap_db", c.eval.cap_db},
               {"include_mixture", c.eval_include_mixture}};
  j["dataset"] = {{"target", c.target},
                  {"sources", c.sources},
                  {"split_ratio", c.split_ratio},
                  {"split_boundary", c.split_boundary ? json(*c.split_boundary) : json(nullptr)},
                  {"magnitude_scale", c.magnitude_scale}};
  j["synth"] = {{"num_tracks", c.synth.num_tracks},
                {"duration", c.synth.duration},
                {"sample_rate", c.synth.sample_rate}};
  j["separate"] = {{"soft_mask", c.soft_mask}};
  j["paths"] = {{"corpus", c.corpus.string()},
                {"checkpoints", c.checkpoints.string()},
                {"reports", c.reports.string()}};
  j["seed"] = c.seed;
  j["precision"] = precision_label(c.precision);
  j["threads"] = c.threads;
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

NetworkSpec RunConfig::model_spec() const {
  return inline_model ? *inline_model : named_spec(model_name);
}

void check_model_geometry(const RunConfig& c, const NetworkSpec& spec) {
  const std::size_t frames = item_frames(spec), bins = item_bins(spec);
  if (bins != c.stft.bins())
    throw ConfigError("model expects " + std::to_string(bins) + " frequency bins but the STFT gives " +
                      std::to_string(c.stft.bins()));
  if (std::holds_alternative<ConvNetworkSpec>(spec) && frames != c.segment_frames)
    throw ConfigError("model expects segments of " + std::to_string(frames) +
                      " frames but config.segments.N is " + std::to_string(c.segment_frames));
}

SegmentConfig RunConfig::segments(bool training) const {
  SegmentConfig s;
  s.stft = stft;
  const bool mlp = std::holds_alternative<MlpSpec>(model_spec());
  s.frames = mlp ? 1 : segment_frames;
  s.stride = mlp ? 1 : (training ? stride_train : stride_infer);
  s.magnitude_scale = magnitude_scale;
  return s;
}

SeparateOptions RunConfig::separate_options() const {
  SeparateOptions o;
  o.stft = stft;
  o.stride = stride_infer;
  o.soft_mask = soft_mask;
  o.magnitude_scale = magnitude_scale;
  o.threads = threads;
  return o;
}

CorpusEvalConfig RunConfig::corpus_eval() const {
  CorpusEvalConfig e;
  e.bss = eval;
  e.target = target;
  e.sources = sources;
  e.include_mixture = eval_include_mixture;
  e.threads = threads;
  return e;
}

}  // namespace mrfcnn
