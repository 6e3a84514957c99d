// Copyright 2026 The tokensel Authors.
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

// Pipeline configuration: one JSON document with a section per stage.
//
//   {
//     "seed": 0, "jobs": 1, "input": "auto",
//     "frontend":  { "num_mel_bins": 80, "frame_length_s": 0.025, ... },
//     "segment":   { "enabled": true, "max_segment_s": 32, "vad_threshold_db": -50 },
//     "quantizer": { "vocab_size": 1024, "max_iters": 50, ... },
//     "lm":        { "order": 5 },
//     "selection": { "budget_fraction": 0.06, "closest": false, "histogram_bins": 50 },
//     "paths":     { "target_manifest": ..., "general_manifest": ..., "pool_manifest": ..., "work_dir": ... }
//   }
//
// Unknown keys are rejected. Relative paths resolve against the config file.

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "tokensel/corpus_io.hpp"
#include "tokensel/error.hpp"
#include "tokensel/frontend.hpp"
#include "tokensel/quantizer.hpp"
#include "tokensel/selector.hpp"

namespace tokensel {

inline constexpr const char* kConfigEnvVar = "TOKENSEL_CONFIG";

struct PathsConfig {
  std::string target_manifest;
  std::string general_manifest;
  std::string pool_manifest;
  std::string work_dir = "work";
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  // "audio" runs the full chain from WAV, "tokens" starts at LM training from
  // token manifests, "auto" picks audio when every utterance has audio.
  std::string input = "auto";
  FrontendConfig frontend;
  bool segment_enabled = true;
  SegmentOptions segment;
  QuantizerConfig quantizer;
  int lm_order = 5;
  Budget budget = Budget::fraction(0.06);
  std::size_t histogram_bins = 50;
  PathsConfig paths;

  // Structural checks; with check_paths, the three manifests must exist.
  void validate(bool check_paths) const {
    frontend.validate();
    auto q = quantizer;
    q.dim = static_cast<std::uint32_t>(frontend.num_mel_bins);
    q.validate();
    if (!(segment.max_segment_s > 0)) throw ConfigError("segment: max_segment_s must be positive");
    if (lm_order < 1 || lm_order > 16) throw ConfigError("lm: order must be in [1, 16]");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    if (input != "auto" && input != "audio" && input != "tokens")
      throw ConfigError("input must be one of auto, audio, tokens");
    if (histogram_bins < 1) throw ConfigError("selection: histogram_bins must be >= 1");
    try {
      budget.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("selection: ") + e.what());
    }
    if (check_paths) {
      for (const auto* p : {&paths.target_manifest, &paths.general_manifest, &paths.pool_manifest}) {
        if (p->empty()) throw ConfigError("paths: target_manifest, general_manifest and pool_manifest are required");
        if (!std::filesystem::is_regular_file(*p)) throw ConfigError("paths: '" + *p + "' does not exist");
      }
      if (paths.work_dir.empty()) throw ConfigError("paths: work_dir must not be empty");
    }
  }
};

namespace detail {

class Section {
 public:
  Section(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError(where(key) + " must be a boolean");
      } else if constexpr (std::is_arithmetic_v<T>) {
        if (!it->is_number()) throw ConfigError(where(key) + " must be a number");
        if constexpr (std::is_unsigned_v<T>)
          if (it->template get<double>() < 0) throw ConfigError(where(key) + " must be >= 0");
        if constexpr (std::is_integral_v<T>) {
          const double v = it->template get<double>();
          if (v != std::floor(v)) throw ConfigError(where(key) + " must be an integer");
        }
      } else {
        if (!it->is_string()) throw ConfigError(where(key) + " must be a string");
      }
      out = it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  void mark(const char* key) { seen_.insert(key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(where(it.key().c_str()) + ": unknown key");
  }

 private:
  std::string where(const char* key) const { return name_.empty() ? key : name_ + "." + key; }
  const nlohmann::json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline PipelineConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".") {
  PipelineConfig c;
  detail::Section top(j, "");
  top.get("seed", c.seed);
  top.get("jobs", c.jobs);
  top.get("input", c.input);
  bool quantizer_seed_given = false;

  auto section = [&](const char* name, auto&& fill) {
    top.mark(name);
    if (!j.contains(name)) return;
    detail::Section s(j.at(name), name);
    fill(s);
    s.finish();
  };
  section("frontend", [&](detail::Section& s) {
    auto& f = c.frontend;
    s.get("sample_rate", f.sample_rate);
    s.get("num_mel_bins", f.num_mel_bins);
    s.get("frame_length_s", f.frame_length_s);
    s.get("frame_shift_s", f.frame_shift_s);
    s.get("fft_size", f.fft_size);
    s.get("low_freq", f.low_freq);
    s.get("high_freq", f.high_freq);
    s.get("preemphasis", f.preemphasis);
    s.get("energy_floor", f.energy_floor);
    s.get("normalize", f.normalize);
  });
  section("segment", [&](detail::Section& s) {
    s.get("enabled", c.segment_enabled);
    s.get("max_segment_s", c.segment.max_segment_s);
    if (s.has("vad_threshold_db")) {
      double v = 0;
      s.get("vad_threshold_db", v);
      c.segment.vad_threshold_db = v;
    } else {
      s.mark("vad_threshold_db");
    }
  });
  section("quantizer", [&](detail::Section& s) {
    auto& q = c.quantizer;
    s.get("vocab_size", q.vocab_size);
    s.get("max_iters", q.max_iters);
    s.get("tolerance", q.tolerance);
    quantizer_seed_given = s.has("seed");
    s.get("seed", q.seed);
    s.get("collapse_repeats", q.collapse_repeats);
    s.get("sample_cap", q.sample_cap);
  });
  section("lm", [&](detail::Section& s) { s.get("order", c.lm_order); });
  section("selection", [&](detail::Section& s) {
    int kinds = 0;
    double v = 0;
    if (s.has("budget_fraction")) s.get("budget_fraction", v), c.budget = Budget::fraction(v), ++kinds;
    else s.mark("budget_fraction");
    if (s.has("budget_hours")) s.get("budget_hours", v), c.budget = Budget::hours(v), ++kinds;
    else s.mark("budget_hours");
    if (s.has("top_k")) {
      std::uint64_t k = 0;
      s.get("top_k", k);
      c.budget = Budget::top_k(k);
      ++kinds;
    } else {
      s.mark("top_k");
    }
    if (s.has("threshold")) s.get("threshold", v), c.budget = Budget::threshold(v), ++kinds;
    else s.mark("threshold");
    if (kinds > 1) throw ConfigError("selection: give only one of budget_fraction, budget_hours, top_k, threshold");
    bool closest = false;
    s.get("closest", closest);
    c.budget.closest = closest;
    s.get("histogram_bins", c.histogram_bins);
  });
  section("paths", [&](detail::Section& s) {
    auto& p = c.paths;
    s.get("target_manifest", p.target_manifest);
    s.get("general_manifest", p.general_manifest);
    s.get("pool_manifest", p.pool_manifest);
    s.get("work_dir", p.work_dir);
    for (auto* path : {&p.target_manifest, &p.general_manifest, &p.pool_manifest, &p.work_dir})
      if (!path->empty() && std::filesystem::path(*path).is_relative())
        *path = (base_dir / *path).lexically_normal().string();
  });
  top.finish();
  if (!quantizer_seed_given) c.quantizer.seed = c.seed;
  c.quantizer.dim = static_cast<std::uint32_t>(c.frontend.num_mel_bins);
  c.quantizer.jobs = c.jobs;
  return c;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j, manifest_dir(path));
}

inline nlohmann::ordered_json to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["input"] = c.input;
  const auto& f = c.frontend;
  j["frontend"] = {{"sample_rate", f.sample_rate},       {"num_mel_bins", f.num_mel_bins},
                   {"frame_length_s", f.frame_length_s}, {"frame_shift_s", f.frame_shift_s},
                   {"fft_size", f.fft_size},             {"low_freq", f.low_freq},
                   {"high_freq", f.high_freq},           {"preemphasis", f.preemphasis},
                   {"energy_floor", f.energy_floor},     {"normalize", f.normalize}};
  j["segment"] = {{"enabled", c.segment_enabled}, {"max_segment_s", c.segment.max_segment_s}};
  if (c.segment.vad_threshold_db) j["segment"]["vad_threshold_db"] = *c.segment.vad_threshold_db;
  const auto& q = c.quantizer;
  j["quantizer"] = {{"vocab_size", q.vocab_size}, {"max_iters", q.max_iters},
                    {"tolerance", q.tolerance},   {"seed", q.seed},
                    {"collapse_repeats", q.collapse_repeats}, {"sample_cap", q.sample_cap}};
  j["lm"] = {{"order", c.lm_order}};
  nlohmann::ordered_json sel;
  switch (c.budget.kind) {
    case Budget::Kind::kFraction: sel["budget_fraction"] = c.budget.value; break;
    case Budget::Kind::kHours: sel["budget_hours"] = c.budget.value; break;
    case Budget::Kind::kTopK: sel["top_k"] = static_cast<std::uint64_t>(c.budget.value); break;
    case Budget::Kind::kThreshold: sel["threshold"] = c.budget.value; break;
  }
  sel["closest"] = c.budget.closest;
  sel["histogram_bins"] = c.histogram_bins;
  j["selection"] = sel;
  j["paths"] = {{"target_manifest", c.paths.target_manifest},
                {"general_manifest", c.paths.general_manifest},
                {"pool_manifest", c.paths.pool_manifest},
                {"work_dir", c.paths.work_dir}};
  return j;
}

}  // namespace tokensel
