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

// tokensel command-line tool. Each subcommand runs one pipeline stage and
// writes a provenance record beside its outputs; `pipeline` chains them and
// skips stages whose record is still current.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tokensel/tokensel.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace tokensel;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class UsageError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "usage"; }
};

// ---------------------------------------------------------------------------
// Digests and provenance.

std::string hex(const unsigned char* p, unsigned n) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < n; ++i) {
    s += digits[p[i] >> 4];
    s += digits[p[i] & 15];
  }
  return s;
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_, data, n) != 1) throw Error("SHA-256 update failed");
  }
  std::string hex_digest() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned n = 0;
    if (EVP_DigestFinal_ex(ctx_, md, &n) != 1) throw Error("SHA-256 final failed");
    return hex(md, n);
  }

 private:
  EVP_MD_CTX* ctx_;
};

std::string sha256_string(const std::string& s) {
  Sha256 h;
  h.update(s.data(), s.size());
  return h.hex_digest();
}

std::string sha256_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read '" + p.string() + "' for hashing");
  Sha256 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex_digest();
}

// `p` relative to `base` when possible, in generic form.
std::string rel(const fs::path& p, const fs::path& base) {
  const auto a = fs::absolute(p).lexically_normal();
  const auto r = a.lexically_relative(fs::absolute(base).lexically_normal());
  return (r.empty() ? a : r).generic_string();
}

struct Record {
  std::string stage;
  json params = json::object();  // everything that determines the outputs
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  fs::path file;
  Warnings warnings;
  json report;  // informational, not part of the identity
};

json digests(const std::vector<fs::path>& files, const fs::path& base) {
  json out = json::array();
  for (const auto& f : files) out.push_back({{"path", rel(f, base)}, {"sha256", sha256_file(f)}});
  return out;
}

json record_json(const Record& r) {
  const auto base = r.file.parent_path();
  json j;
  j["tool"] = "tokensel";
  j["version"] = kVersion;
  j["stage"] = r.stage;
  j["config_sha256"] = sha256_string(r.params.dump());
  j["seed"] = r.params.contains("seed") ? r.params["seed"] : json(nullptr);
  j["params"] = r.params;
  j["inputs"] = digests(r.inputs, base);
  j["outputs"] = digests(r.outputs, base);
  json w = json::array();
  for (const auto& x : r.warnings) w.push_back({{"code", x.code}, {"message", x.message}});
  j["warnings"] = w;
  if (!r.report.is_null()) j["report"] = r.report;
  return j;
}

void emit_warnings(const Warnings& w) {
  for (const auto& x : w) std::cerr << json{{"warning", x.code}, {"message", x.message}}.dump() << '\n';
}

void write_record(const Record& r) {
  emit_warnings(r.warnings);
  std::ofstream out(r.file, std::ios::trunc);
  if (!out) throw IoError("cannot write provenance '" + r.file.string() + "'");
  out << record_json(r).dump(2) << '\n';
  if (!out.flush()) throw IoError("write failed on '" + r.file.string() + "'");
}

// True when r.file describes the same stage, parameters and input bytes and
// every recorded output still has its recorded digest.
bool up_to_date(const Record& r) {
  if (!fs::is_regular_file(r.file)) return false;
  json old;
  try {
    std::ifstream in(r.file);
    old = json::parse(in);
  } catch (const std::exception&) {
    return false;
  }
  const auto base = r.file.parent_path();
  if (old.value("stage", "") != r.stage || old.value("version", "") != std::string(kVersion)) return false;
  if (old.value("config_sha256", "") != sha256_string(r.params.dump())) return false;
  for (const auto& f : r.outputs)
    if (!fs::is_regular_file(f)) return false;
  return old["inputs"] == digests(r.inputs, base) && old["outputs"] == digests(r.outputs, base);
}

fs::path beside(const fs::path& output, const std::string& suffix) {
  return fs::path(output.string() + suffix);
}

void ensure_parent(const fs::path& p) {
  const auto dir = p.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw UsageError(std::string(what) + " '" + path + "' does not exist");
}

// ---------------------------------------------------------------------------
// Shared inputs.

// Parse errors carry a line number; add the file they came from.
template <typename F>
auto in_file(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

std::vector<Utterance> load_manifest(const std::string& path) {
  require_file(path, "manifest");
  auto utts = in_file(path, [&] { return read_manifest(path); });
  resolve_paths(utts, manifest_dir(path));
  return utts;
}

struct TokenData {
  std::uint32_t vocab = 0;
  std::vector<TokenSequence> sequences;
  std::vector<fs::path> files;
};

void merge_vocab(TokenData& d, std::uint32_t vocab, const std::string& file) {
  if (d.vocab != 0 && d.vocab != vocab)
    throw ValidationError("token file '" + file + "' has vocab " + std::to_string(vocab) + ", expected " +
                          std::to_string(d.vocab));
  d.vocab = vocab;
}

// Sequences from explicit token files, or from a manifest's token_path
// references (manifest order).
TokenData load_tokens(const std::vector<std::string>& token_files, const std::string& manifest) {
  TokenData d;
  if (!manifest.empty()) {
    const auto utts = load_manifest(manifest);
    d.files.push_back(manifest);
    std::map<std::string, std::unordered_map<std::string, std::vector<Token>>> by_file;
    for (const auto& u : utts) {
      if (!u.token_path) throw ValidationError("utterance '" + u.id + "' in " + manifest + " has no token_path");
      if (by_file.count(*u.token_path)) continue;
      require_file(*u.token_path, "token file");
      auto f = read_token_file(*u.token_path);
      merge_vocab(d, f.vocab_size, *u.token_path);
      auto& m = by_file[*u.token_path];
      for (auto& s : f.sequences) m.emplace(s.utterance_id, std::move(s.tokens));
      d.files.push_back(*u.token_path);
    }
    for (const auto& u : utts) {
      auto& m = by_file.at(*u.token_path);
      auto it = m.find(u.id);
      if (it == m.end()) throw ValidationError("no tokens for '" + u.id + "' in " + *u.token_path);
      d.sequences.push_back({u.id, it->second});
    }
  }
  for (const auto& f : token_files) {
    require_file(f, "token file");
    auto tf = read_token_file(f);
    merge_vocab(d, tf.vocab_size, f);
    for (auto& s : tf.sequences) d.sequences.push_back(std::move(s));
    d.files.push_back(f);
  }
  if (d.vocab == 0) throw UsageError("no token input given");
  return d;
}

std::vector<fs::path> audio_files(const std::vector<Utterance>& utts, const std::string& manifest) {
  std::vector<fs::path> out;
  for (const auto& u : utts) {
    if (!u.audio_path) throw ValidationError("utterance '" + u.id + "' in " + manifest + " has no audio_path");
    out.push_back(*u.audio_path);
  }
  return out;
}

json frontend_json(const FrontendConfig& f) {
  return {{"num_mel_bins", f.num_mel_bins}, {"frame_length_s", f.frame_length_s}, {"frame_shift_s", f.frame_shift_s},
          {"fft_size", f.fft_size},         {"low_freq", f.low_freq},             {"high_freq", f.high_freq},
          {"preemphasis", f.preemphasis},   {"energy_floor", f.energy_floor},     {"normalize", f.normalize}};
}

// ---------------------------------------------------------------------------
// Stages. Each returns false when `skip_current` is set and the existing
// provenance record shows the outputs are already up to date.

struct SegmentArgs {
  std::string manifest, out_dir;
  SegmentOptions opts;
  unsigned jobs = 1;
};

bool run_segment(const SegmentArgs& a, bool skip_current) {
  const auto utts = load_manifest(a.manifest);
  const fs::path out_dir = a.out_dir;
  const auto audio_dir = out_dir / "audio";
  Record r;
  r.stage = "segment";
  r.params = {{"max_segment_s", a.opts.max_segment_s},
              {"vad_threshold_db", a.opts.vad_threshold_db ? json(*a.opts.vad_threshold_db) : json(nullptr)}};
  r.inputs = {a.manifest};
  for (const auto& f : audio_files(utts, a.manifest)) r.inputs.push_back(f);
  r.file = out_dir / "provenance.json";

  // Segment file names follow from the input alone, so the expected outputs
  // are known before running only after planning; plan without writing.
  std::vector<std::vector<SampleRange>> plans(utts.size());
  std::vector<std::size_t> total(utts.size());
  parallel_for(utts.size(), a.jobs, [&](std::size_t i) {
    const auto pcm = read_wav(*utts[i].audio_path);
    plans[i] = plan_segments(pcm, a.opts);
  });
  const fs::path manifest_out = out_dir / "manifest.jsonl";
  r.outputs = {manifest_out};
  for (std::size_t i = 0; i < utts.size(); ++i)
    for (std::size_t k = 0; k < plans[i].size(); ++k)
      r.outputs.push_back(audio_dir / (safe_file_stem(utts[i].id + "-" + std::to_string(k)) + ".wav"));
  if (skip_current && up_to_date(r)) return false;

  fs::create_directories(audio_dir);
  std::vector<std::vector<Utterance>> parts(utts.size());
  parallel_for(utts.size(), a.jobs, [&](std::size_t i) { parts[i] = segment_audio(utts[i], a.opts, audio_dir); });
  std::vector<Utterance> out;
  for (auto& p : parts)
    for (auto& u : p) {
      u.audio_path = rel(*u.audio_path, out_dir);
      out.push_back(std::move(u));
    }
  write_manifest(manifest_out.string(), out);
  write_record(r);
  return true;
}

struct FeaturizeArgs {
  std::string manifest, out;
  FrontendConfig frontend;
  unsigned jobs = 1;
};

bool run_featurize(const FeaturizeArgs& a, bool skip_current) {
  const auto utts = load_manifest(a.manifest);
  a.frontend.validate();
  Record r;
  r.stage = "featurize";
  r.params = frontend_json(a.frontend);
  r.inputs = {a.manifest};
  for (const auto& f : audio_files(utts, a.manifest)) r.inputs.push_back(f);
  r.outputs = {a.out};
  r.file = beside(a.out, ".provenance.json");
  if (skip_current && up_to_date(r)) return false;

  ensure_parent(a.out);
  const LogMelFrontend fe(a.frontend);
  FeatureArchiveWriter writer(a.out);
  const std::size_t block = 32 * std::max(1u, a.jobs);
  std::size_t empty = 0;
  for (std::size_t begin = 0; begin < utts.size(); begin += block) {
    const std::size_t n = std::min(block, utts.size() - begin);
    std::vector<FeatureMatrix> feats(n);
    parallel_for(n, a.jobs, [&](std::size_t i) {
      const auto& u = utts[begin + i];
      const auto samples = to_float(read_wav(*u.audio_path));
      feats[i] = {u.id, fe.compute(samples), a.frontend.frame_shift_s, a.frontend.frame_length_s};
    });
    for (const auto& f : feats) {
      empty += f.frames.rows() == 0;
      writer.write(f);
    }
  }
  writer.close();
  if (empty)
    warn(&r.warnings, "short-audio", std::to_string(empty) + " utterance(s) shorter than one analysis window");
  write_record(r);
  return true;
}

struct TrainQuantizerArgs {
  std::vector<std::string> features;
  std::string out;
  QuantizerConfig q;
};

bool run_train_quantizer(TrainQuantizerArgs a, bool skip_current) {
  for (const auto& f : a.features) require_file(f, "feature archive");
  Record r;
  r.stage = "train-quantizer";
  r.params = {{"vocab_size", a.q.vocab_size}, {"max_iters", a.q.max_iters}, {"tolerance", a.q.tolerance},
              {"seed", a.q.seed},             {"sample_cap", a.q.sample_cap}};
  r.inputs.assign(a.features.begin(), a.features.end());
  r.outputs = {a.out};
  r.file = beside(a.out, ".provenance.json");
  if (skip_current && up_to_date(r)) return false;

  FrameReservoir reservoir(a.q.sample_cap, derive_seed(a.q.seed, 0x7e5));
  std::optional<std::size_t> dim;
  for (const auto& path : a.features) {
    FeatureArchiveReader reader(path);
    while (auto f = reader.next()) {
      if (f->frames.rows() == 0) continue;
      if (dim && *dim != f->frames.cols()) throw ValidationError("feature archives disagree on frame dimension");
      dim = f->frames.cols();
      reservoir.add(f->frames);
    }
  }
  if (!dim) throw ValidationError("no feature frames to train on");
  a.q.dim = static_cast<std::uint32_t>(*dim);
  const auto t = train_codebook(reservoir.sample(), a.q);
  ensure_parent(a.out);
  write_codebook(a.out, t.codebook);
  r.report = {{"frames_seen", reservoir.seen()},
              {"frames_sampled", reservoir.sample().rows()},
              {"dim", *dim},
              {"distortion", t.distortion},
              {"empty_cluster_repairs", t.empty_cluster_repairs},
              {"converged", t.converged}};
  write_record(r);
  return true;
}

struct QuantizeArgs {
  std::string features, codebook, out;
  bool collapse = false;
  unsigned jobs = 1;
};

bool run_quantize(const QuantizeArgs& a, bool skip_current) {
  require_file(a.features, "feature archive");
  require_file(a.codebook, "codebook");
  Record r;
  r.stage = "quantize";
  r.params = {{"collapse_repeats", a.collapse}};
  r.inputs = {a.features, a.codebook};
  r.outputs = {a.out};
  r.file = beside(a.out, ".provenance.json");
  if (skip_current && up_to_date(r)) return false;

  const auto cb = read_codebook(a.codebook);
  FeatureArchiveReader reader(a.features);
  ensure_parent(a.out);
  TokenWriter writer(a.out, cb.vocab_size());
  const std::size_t block = 64 * std::max(1u, a.jobs);
  std::size_t empty = 0;
  for (;;) {
    std::vector<FeatureMatrix> feats;
    while (feats.size() < block)
      if (auto f = reader.next())
        feats.push_back(std::move(*f));
      else
        break;
    if (feats.empty()) break;
    std::vector<TokenSequence> seqs(feats.size());
    parallel_for(feats.size(), a.jobs, [&](std::size_t i) { seqs[i] = quantize(feats[i], cb, a.collapse); });
    for (const auto& s : seqs) {
      empty += s.tokens.empty();
      writer.write(s);
    }
  }
  writer.close();
  if (empty) warn(&r.warnings, "empty-sequence", std::to_string(empty) + " utterance(s) produced no tokens");
  write_record(r);
  return true;
}

struct TrainLmArgs {
  std::vector<std::string> tokens;
  std::string manifest, out;
  int order = 5;
  unsigned jobs = 1;
};

bool run_train_lm(const TrainLmArgs& a, bool skip_current) {
  check_order(a.order);
  const auto data = load_tokens(a.tokens, a.manifest);
  Record r;
  r.stage = "train-lm";
  r.params = {{"order", a.order}, {"vocab_size", data.vocab}};
  r.inputs = data.files;
  r.outputs = {a.out};
  r.file = beside(a.out, ".provenance.json");
  if (skip_current && up_to_date(r)) return false;

  // Shard-level counting merged in shard order.
  const std::size_t shards = std::max<std::size_t>(1, std::min<std::size_t>(a.jobs, data.sequences.size()));
  std::vector<NgramCounter> counters;
  for (std::size_t s = 0; s < shards; ++s) counters.emplace_back(a.order, data.vocab);
  const std::size_t per = (data.sequences.size() + shards - 1) / shards;
  parallel_for(shards, a.jobs, [&](std::size_t s) {
    for (std::size_t i = s * per; i < std::min(data.sequences.size(), (s + 1) * per); ++i)
      counters[s].add(data.sequences[i]);
  });
  for (std::size_t s = 1; s < shards; ++s) counters[0].merge(counters[s]);
  const auto counts = counters[0].finish();
  const auto model = estimate(counts, &r.warnings);
  ensure_parent(a.out);
  write_arpa(model, a.out);
  json sizes = json::array();
  for (int n = 1; n <= a.order; ++n) sizes.push_back(model.num_probs(n));
  json disc = json::array();
  for (const auto& d : model.discounts())
    disc.push_back({{"d1", d.d1}, {"d2", d.d2}, {"d3", d.d3}, {"fallback", d.fallback}});
  r.report = {{"sequences", counts.sequences()}, {"ngrams", sizes}, {"discounts", disc}};
  write_record(r);
  return true;
}

struct ScoreArgs {
  std::string target_lm, general_lm, manifest, out;
  std::vector<std::string> tokens;
  std::size_t shard_size = 10000;
  bool include_eos = false;
  unsigned jobs = 1;
};

bool run_score(const ScoreArgs& a, bool skip_current) {
  require_file(a.target_lm, "target LM");
  require_file(a.general_lm, "general LM");
  if (a.shard_size == 0) throw UsageError("--shard-size must be positive");
  Record r;
  r.stage = "score";
  r.params = {{"shard_size", a.shard_size}, {"include_eos", a.include_eos}};
  r.inputs = {a.target_lm, a.general_lm};
  // Token inputs are listed before loading so the freshness check is cheap.
  if (!a.manifest.empty()) {
    require_file(a.manifest, "manifest");
    r.inputs.push_back(a.manifest);
    auto utts = load_manifest(a.manifest);
    std::vector<std::string> seen;
    for (const auto& u : utts)
      if (u.token_path && std::find(seen.begin(), seen.end(), *u.token_path) == seen.end()) {
        seen.push_back(*u.token_path);
        r.inputs.push_back(*u.token_path);
      }
  }
  for (const auto& t : a.tokens) {
    require_file(t, "token file");
    r.inputs.push_back(t);
  }
  if (a.manifest.empty() && a.tokens.empty()) throw UsageError("score needs --tokens or --manifest");
  r.outputs = {a.out};
  r.file = beside(a.out, ".provenance.json");
  if (skip_current && up_to_date(r)) return false;

  const auto target = read_arpa(a.target_lm);
  const auto general = read_arpa(a.general_lm);
  check_compatible(target, general);

  ensure_parent(a.out);
  const fs::path shard_dir = beside(a.out, ".shards");
  fs::remove_all(shard_dir);
  fs::create_directories(shard_dir);
  std::vector<fs::path> shard_files;
  std::size_t skipped = 0;

  auto score_shard = [&](std::vector<TokenSequence>& batch) {
    std::vector<std::optional<DomainScore>> scored(batch.size());
    parallel_for(batch.size(), a.jobs, [&](std::size_t i) {
      if (!batch[i].tokens.empty()) scored[i] = score(batch[i], target, general, a.include_eos);
    });
    char name[32];
    std::snprintf(name, sizeof name, "shard-%06zu.jsonl", shard_files.size());
    const auto path = shard_dir / name;
    std::ofstream out(path, std::ios::trunc);
    for (const auto& s : scored) {
      if (s)
        out << to_json(*s).dump() << '\n';
      else
        ++skipped;
    }
    if (!out.flush()) throw IoError("write failed on '" + path.string() + "'");
    shard_files.push_back(path);
    batch.clear();
  };

  std::vector<TokenSequence> batch;
  auto push = [&](TokenSequence s) {
    batch.push_back(std::move(s));
    if (batch.size() == a.shard_size) score_shard(batch);
  };
  if (!a.manifest.empty())
    for (auto& s : load_tokens({}, a.manifest).sequences) push(std::move(s));
  for (const auto& t : a.tokens) {
    TokenReader reader(t);
    while (auto s = reader.next()) push(std::move(*s));
  }
  if (!batch.empty()) score_shard(batch);

  {
    std::ofstream out(a.out, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot open '" + a.out + "' for writing");
    for (const auto& f : shard_files) {
      std::ifstream in(f, std::ios::binary);
      out << in.rdbuf();
    }
    if (!out.flush()) throw IoError("write failed on '" + a.out + "'");
  }
  fs::remove_all(shard_dir);
  if (skipped) warn(&r.warnings, "empty-sequence", std::to_string(skipped) + " empty token sequence(s) not scored");
  write_record(r);
  return true;
}

struct SelectArgs {
  std::string scores, manifest, out, summary, histogram;
  Budget budget;
  std::size_t histogram_bins = 50;
};

std::string stem_path(const std::string& out, const std::string& suffix) {
  fs::path p(out);
  if (p.extension() == ".jsonl") p.replace_extension();
  return p.string() + suffix;
}

bool run_select(SelectArgs a, bool skip_current) {
  require_file(a.scores, "score file");
  const auto pool = load_manifest(a.manifest);
  if (a.summary.empty()) a.summary = stem_path(a.out, ".summary.tsv");
  if (a.histogram.empty()) a.histogram = stem_path(a.out, ".histogram.csv");
  Record r;
  r.stage = "select";
  r.params = {{"budget", a.budget.describe()}, {"histogram_bins", a.histogram_bins}};
  r.inputs = {a.scores, a.manifest};
  r.outputs = {a.out, a.summary, a.histogram};
  r.file = beside(a.out, ".provenance.json");
  if (skip_current && up_to_date(r)) return false;

  const auto scores = in_file(a.scores, [&] { return read_scores(a.scores); });
  if (scores.empty()) throw ValidationError("score file '" + a.scores + "' is empty");
  std::unordered_map<std::string, double> duration;
  for (const auto& u : pool) duration.emplace(u.id, u.duration_s);
  std::vector<double> durations;
  std::unordered_set<std::string> ids;
  for (const auto& s : scores) {
    auto it = duration.find(s.utterance_id);
    if (it == duration.end()) throw ValidationError("scored utterance '" + s.utterance_id + "' not in " + a.manifest);
    if (!ids.insert(s.utterance_id).second) throw ValidationError("duplicate score for '" + s.utterance_id + "'");
    durations.push_back(it->second);
  }
  if (ids.size() < pool.size())
    warn(&r.warnings, "unscored-utterances",
         std::to_string(pool.size() - ids.size()) + " manifest utterance(s) have no score and are not ranked");
  const auto m = select(scores, durations, a.budget, &r.warnings);

  // Manifest paths are rewritten relative to the output's directory.
  auto out_pool = pool;
  const auto out_dir = manifest_dir(a.out);
  for (auto& u : out_pool) {
    if (u.audio_path) u.audio_path = rel(*u.audio_path, out_dir);
    if (u.token_path) u.token_path = rel(*u.token_path, out_dir);
  }
  ensure_parent(a.out);
  write_selection_manifest(a.out, m, out_pool);
  for (const auto& [path, text] : {std::pair{a.summary, selection_summary(m)},
                                   std::pair{a.histogram, score_histogram_csv(m, a.histogram_bins)}}) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::trunc);
    out << text;
    if (!out.flush()) throw IoError("write failed on '" + path + "'");
  }
  r.report = {{"pool_hours", m.pool_hours},
              {"selected_hours", m.selected_hours},
              {"selected_utterances", m.selected_count},
              {"threshold_score", m.threshold_score ? json(*m.threshold_score) : json(nullptr)}};
  write_record(r);
  return true;
}

// ---------------------------------------------------------------------------
// Configuration for subcommands: --config, else $TOKENSEL_CONFIG, else
// built-in defaults. Flags given on the command line win.

struct Globals {
  std::string config_path;
  unsigned jobs = 1;
  CLI::Option* jobs_opt = nullptr;
};

std::optional<std::string> config_source(const Globals& g) {
  if (!g.config_path.empty()) return g.config_path;
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return std::string(env);
  return std::nullopt;
}

PipelineConfig effective_config(const Globals& g) {
  PipelineConfig c;
  if (auto path = config_source(g)) {
    require_file(*path, "config");
    c = load_config(*path);
  }
  if (g.jobs_opt->count()) {
    c.jobs = g.jobs;
    c.quantizer.jobs = g.jobs;
  }
  return c;
}

template <typename T>
T pick(const CLI::Option* opt, const T& flag, const T& fallback) {
  return opt->count() ? flag : fallback;
}

// --variant grammar: kind[:opt,...] with kind tokens|features and options
// k=<codebook size>, scale=<target LM data fraction>, order=<n>, collapse, eos.
PipelineVariant parse_variant(const std::string& text) {
  PipelineVariant v;
  v.name = text;
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (kind == "features")
    v.use_features = true;
  else if (kind != "tokens")
    throw UsageError("variant '" + text + "': kind must be tokens or features");
  if (colon == std::string::npos) return v;
  std::stringstream rest(text.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    const auto eq = item.find('=');
    const std::string key = item.substr(0, eq), val = eq == std::string::npos ? "" : item.substr(eq + 1);
    try {
      if (key == "k")
        v.codebook_size = static_cast<std::uint32_t>(std::stoul(val));
      else if (key == "scale")
        v.target_train_scale = std::stod(val);
      else if (key == "order")
        v.order = std::stoi(val);
      else if (key == "collapse" && val.empty())
        v.collapse_repeats = true;
      else if (key == "eos" && val.empty())
        v.include_eos = true;
      else
        throw UsageError("variant '" + text + "': unknown option '" + item + "'");
    } catch (const std::logic_error&) {
      throw UsageError("variant '" + text + "': bad value in '" + item + "'");
    }
  }
  if (v.order < 1 || v.order > 16) throw UsageError("variant '" + text + "': order must be in [1, 16]");
  if (!(v.target_train_scale > 0 && v.target_train_scale <= 1))
    throw UsageError("variant '" + text + "': scale must be in (0, 1]");
  if (v.use_features && v.codebook_size < 2) throw UsageError("variant '" + text + "': k must be >= 2");
  return v;
}

// ---------------------------------------------------------------------------
// pipeline

bool all_have_audio(const std::vector<Utterance>& utts) {
  return std::all_of(utts.begin(), utts.end(), [](const Utterance& u) { return u.audio_path.has_value(); });
}

void report_stage(const std::string& stage, bool ran) {
  std::cout << json{{"stage", stage}, {"status", ran ? "ran" : "up-to-date"}}.dump() << std::endl;
}

void run_pipeline(const PipelineConfig& c) {
  c.validate(true);
  const fs::path work = c.paths.work_dir;
  fs::create_directories(work);
  const std::vector<std::pair<std::string, std::string>> sets{
      {"target", c.paths.target_manifest}, {"general", c.paths.general_manifest}, {"pool", c.paths.pool_manifest}};

  bool audio = c.input == "audio";
  if (c.input == "auto") {
    audio = true;
    for (const auto& [name, m] : sets) audio = audio && all_have_audio(load_manifest(m));
  }

  std::map<std::string, std::string> manifest;  // per set, the manifest later stages use
  for (const auto& [name, m] : sets) manifest[name] = m;

  std::string target_tokens, general_tokens, pool_tokens;
  if (audio) {
    if (c.segment_enabled)
      for (const auto& [name, m] : sets) {
        SegmentArgs s{m, (work / "segment" / name).string(), c.segment, c.jobs};
        report_stage("segment:" + name, run_segment(s, true));
        manifest[name] = (work / "segment" / name / "manifest.jsonl").string();
      }
    std::map<std::string, std::string> feats;
    for (const auto& [name, m] : sets) {
      feats[name] = (work / "features" / (name + ".feats")).string();
      report_stage("featurize:" + name, run_featurize({manifest[name], feats[name], c.frontend, c.jobs}, true));
    }
    TrainQuantizerArgs tq{{feats["target"], feats["general"]}, (work / "quantizer" / "codebook.bin").string(),
                          c.quantizer};
    report_stage("train-quantizer", run_train_quantizer(tq, true));
    std::map<std::string, std::string> toks;
    for (const auto& [name, m] : sets) {
      toks[name] = (work / "tokens" / (name + ".bin")).string();
      report_stage("quantize:" + name,
                   run_quantize({feats[name], tq.out, toks[name], c.quantizer.collapse_repeats, c.jobs}, true));
    }
    target_tokens = toks["target"];
    general_tokens = toks["general"];
    pool_tokens = toks["pool"];
  }

  auto lm_args = [&](const std::string& name, const std::string& tokens) {
    TrainLmArgs t;
    if (audio)
      t.tokens = {tokens};
    else
      t.manifest = manifest[name];
    t.out = (work / "lm" / (name + ".arpa")).string();
    t.order = c.lm_order;
    t.jobs = c.jobs;
    return t;
  };
  const auto tlm = lm_args("target", target_tokens), glm = lm_args("general", general_tokens);
  report_stage("train-lm:target", run_train_lm(tlm, true));
  report_stage("train-lm:general", run_train_lm(glm, true));

  ScoreArgs sc;
  sc.target_lm = tlm.out;
  sc.general_lm = glm.out;
  if (audio)
    sc.tokens = {pool_tokens};
  else
    sc.manifest = manifest["pool"];
  sc.out = (work / "scores" / "pool.jsonl").string();
  sc.jobs = c.jobs;
  report_stage("score", run_score(sc, true));

  SelectArgs sel;
  sel.scores = sc.out;
  sel.manifest = manifest["pool"];
  sel.out = (work / "selection" / "selection.jsonl").string();
  sel.budget = c.budget;
  sel.histogram_bins = c.histogram_bins;
  report_stage("select", run_select(sel, true));
  std::cout << json{{"status", "done"}, {"selection", rel(sel.out, fs::current_path())}}.dump() << std::endl;
}

// ---------------------------------------------------------------------------

int fail(const char* kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << std::endl;
  return code;
}

int run(int argc, char** argv) {
  CLI::App app{"tokensel: rank and select speech utterances by contrastive n-gram scores over quantized tokens"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file (default: $" + std::string(kConfigEnvVar) + ")");
  g.jobs_opt = app.add_option("--jobs", g.jobs, "worker threads for parallel stages")->check(CLI::Range(1u, 1024u));

  std::function<void()> action;

  // segment
  auto* seg = app.add_subcommand("segment", "cut audio utterances into segments of bounded length");
  SegmentArgs seg_a;
  double seg_max = 32;
  double seg_vad = 0;
  seg->add_option("--manifest", seg_a.manifest, "input manifest (audio)")->required();
  seg->add_option("--out-dir", seg_a.out_dir, "output directory")->required();
  auto* seg_max_opt = seg->add_option("--max-segment-s", seg_max, "maximum segment length in seconds");
  auto* seg_vad_opt = seg->add_option("--vad-threshold-db", seg_vad, "enable energy VAD at this dBFS level");
  seg->callback([&] {
    action = [&] {
      const auto c = effective_config(g);
      seg_a.opts = c.segment;
      seg_a.opts.max_segment_s = pick(seg_max_opt, seg_max, c.segment.max_segment_s);
      if (seg_vad_opt->count()) seg_a.opts.vad_threshold_db = seg_vad;
      max_segment_samples(seg_a.opts.max_segment_s);
      seg_a.jobs = c.jobs;
      run_segment(seg_a, false);
    };
  });

  // featurize
  auto* feat = app.add_subcommand("featurize", "compute log-mel features for every utterance of a manifest");
  FeaturizeArgs feat_a;
  int mel_bins = 80;
  bool cmvn = false;
  feat->add_option("--manifest", feat_a.manifest, "input manifest (audio)")->required();
  feat->add_option("--out", feat_a.out, "output feature archive")->required();
  auto* mel_opt = feat->add_option("--num-mel-bins", mel_bins, "mel filterbank size");
  auto* cmvn_opt = feat->add_flag("--normalize", cmvn, "per-utterance mean/variance normalization");
  feat->callback([&] {
    action = [&] {
      const auto c = effective_config(g);
      feat_a.frontend = c.frontend;
      feat_a.frontend.num_mel_bins = pick(mel_opt, mel_bins, c.frontend.num_mel_bins);
      feat_a.frontend.normalize = pick(cmvn_opt, cmvn, c.frontend.normalize);
      feat_a.jobs = c.jobs;
      run_featurize(feat_a, false);
    };
  });

  // train-quantizer
  auto* tq = app.add_subcommand("train-quantizer", "learn a k-means codebook from feature archives");
  TrainQuantizerArgs tq_a;
  QuantizerConfig tq_flags;
  tq->add_option("--features", tq_a.features, "feature archive(s)")->required();
  tq->add_option("--out", tq_a.out, "output codebook")->required();
  auto* tq_k = tq->add_option("--vocab-size", tq_flags.vocab_size, "codebook size");
  auto* tq_it = tq->add_option("--max-iters", tq_flags.max_iters, "Lloyd iterations");
  auto* tq_tol = tq->add_option("--tolerance", tq_flags.tolerance, "relative distortion change to stop at");
  auto* tq_seed = tq->add_option("--seed", tq_flags.seed, "random seed");
  auto* tq_cap = tq->add_option("--sample-cap", tq_flags.sample_cap, "frames kept for training (reservoir)");
  tq->callback([&] {
    action = [&] {
      const auto c = effective_config(g);
      tq_a.q = c.quantizer;
      tq_a.q.vocab_size = pick(tq_k, tq_flags.vocab_size, c.quantizer.vocab_size);
      tq_a.q.max_iters = pick(tq_it, tq_flags.max_iters, c.quantizer.max_iters);
      tq_a.q.tolerance = pick(tq_tol, tq_flags.tolerance, c.quantizer.tolerance);
      tq_a.q.seed = pick(tq_seed, tq_flags.seed, c.quantizer.seed);
      tq_a.q.sample_cap = pick(tq_cap, tq_flags.sample_cap, c.quantizer.sample_cap);
      run_train_quantizer(tq_a, false);
    };
  });

  // quantize
  auto* qz = app.add_subcommand("quantize", "map feature frames to codebook token ids");
  QuantizeArgs qz_a;
  bool collapse = false;
  qz->add_option("--features", qz_a.features, "feature archive")->required();
  qz->add_option("--codebook", qz_a.codebook, "codebook file")->required();
  qz->add_option("--out", qz_a.out, "output token file")->required();
  auto* collapse_opt = qz->add_flag("--collapse-repeats", collapse, "merge runs of identical tokens");
  qz->callback([&] {
    action = [&] {
      const auto c = effective_config(g);
      qz_a.collapse = pick(collapse_opt, collapse, c.quantizer.collapse_repeats);
      qz_a.jobs = c.jobs;
      run_quantize(qz_a, false);
    };
  });

  // train-lm
  auto* tl = app.add_subcommand("train-lm", "estimate a modified Kneser-Ney back-off LM and write ARPA");
  TrainLmArgs tl_a;
  int order = 5;
  auto* tl_tok = tl->add_option("--tokens", tl_a.tokens, "token file(s)");
  auto* tl_man = tl->add_option("--manifest", tl_a.manifest, "manifest whose token_path entries to use");
  tl->add_option("--out", tl_a.out, "output ARPA file")->required();
  auto* order_opt = tl->add_option("--order", order, "n-gram order");
  tl_tok->excludes(tl_man);
  tl->callback([&] {
    action = [&] {
      const auto c = effective_config(g);
      tl_a.order = pick(order_opt, order, c.lm_order);
      tl_a.jobs = c.jobs;
      if (tl_a.tokens.empty() && tl_a.manifest.empty()) throw UsageError("train-lm needs --tokens or --manifest");
      run_train_lm(tl_a, false);
    };
  });

  // score
  auto* sc = app.add_subcommand("score", "score utterances by per-token log-likelihood difference");
  ScoreArgs sc_a;
  sc->add_option("--target-lm", sc_a.target_lm, "target-domain ARPA model")->required();
  sc->add_option("--general-lm", sc_a.general_lm, "general-domain ARPA model")->required();
  auto* sc_tok = sc->add_option("--tokens", sc_a.tokens, "token file(s) to score");
  auto* sc_man = sc->add_option("--manifest", sc_a.manifest, "manifest whose token_path entries to score");
  sc->add_option("--out", sc_a.out, "output score file (JSONL)")->required();
  sc->add_option("--shard-size", sc_a.shard_size, "utterances per score shard");
  sc->add_flag("--include-eos", sc_a.include_eos, "also score the end-of-utterance event");
  sc_tok->excludes(sc_man);
  sc->callback([&] {
    action = [&] {
      sc_a.jobs = effective_config(g).jobs;
      run_score(sc_a, false);
    };
  });

  // select
  auto* se = app.add_subcommand("select", "select the top-ranked utterances within a budget");
  SelectArgs se_a;
  double frac = 0, hours = 0, thr = 0;
  std::uint64_t topk = 0;
  bool closest = false;
  std::size_t bins = 50;
  se->add_option("--scores", se_a.scores, "score file")->required();
  se->add_option("--manifest", se_a.manifest, "pool manifest (durations)")->required();
  se->add_option("--out", se_a.out, "output selection manifest")->required();
  se->add_option("--summary", se_a.summary, "summary TSV (default: beside --out)");
  se->add_option("--histogram", se_a.histogram, "score histogram CSV (default: beside --out)");
  auto* frac_opt = se->add_option("--budget-fraction", frac, "fraction of pool hours");
  auto* hours_opt = se->add_option("--budget-hours", hours, "absolute hours");
  auto* topk_opt = se->add_option("--top-k", topk, "number of utterances");
  auto* thr_opt = se->add_option("--threshold", thr, "minimum score");
  auto* closest_opt = se->add_flag("--closest", closest, "hour budgets: allow the item that lands closest");
  auto* bins_opt = se->add_option("--histogram-bins", bins, "histogram bins");
  frac_opt->excludes(hours_opt)->excludes(topk_opt)->excludes(thr_opt);
  hours_opt->excludes(topk_opt)->excludes(thr_opt);
  topk_opt->excludes(thr_opt);
  se->callback([&] {
    action = [&] {
      const auto c = effective_config(g);
      se_a.budget = c.budget;
      if (frac_opt->count()) se_a.budget = Budget::fraction(frac);
      if (hours_opt->count()) se_a.budget = Budget::hours(hours);
      if (topk_opt->count()) se_a.budget = Budget::top_k(topk);
      if (thr_opt->count()) se_a.budget = Budget::threshold(thr);
      se_a.budget.closest = pick(closest_opt, closest, c.budget.closest);
      se_a.histogram_bins = pick(bins_opt, bins, c.histogram_bins);
      try {
        se_a.budget.validate();
      } catch (const ArgumentError& e) {
        throw UsageError(e.what());
      }
      if (se_a.histogram_bins == 0) throw UsageError("--histogram-bins must be positive");
      run_select(se_a, false);
    };
  });

  // tau
  auto* ta = app.add_subcommand("tau", "Kendall tau-b between two score files (aligned by utterance id)");
  std::string tau_a, tau_b, tau_out;
  ta->add_option("scores_a", tau_a, "first score file")->required();
  ta->add_option("scores_b", tau_b, "second score file")->required();
  ta->add_option("--out", tau_out, "also write the result here");
  ta->callback([&] {
    action = [&] {
      require_file(tau_a, "score file");
      require_file(tau_b, "score file");
      const auto a = in_file(tau_a, [&] { return read_scores(tau_a); });
      const auto b = in_file(tau_b, [&] { return read_scores(tau_b); });
      if (a.size() != b.size()) throw ValidationError("score files have different numbers of utterances");
      std::unordered_map<std::string, double> by_id;
      for (const auto& s : b)
        if (!by_id.emplace(s.utterance_id, s.score).second)
          throw ValidationError("duplicate utterance '" + s.utterance_id + "' in " + tau_b);
      std::vector<double> xa, xb;
      for (const auto& s : a) {
        auto it = by_id.find(s.utterance_id);
        if (it == by_id.end()) throw ValidationError("utterance '" + s.utterance_id + "' missing from " + tau_b);
        xa.push_back(s.score);
        xb.push_back(it->second);
      }
      const auto t = kendall_tau(xa, xb);
      const json result{{"tau", t ? json(*t) : json(nullptr)}, {"n", xa.size()}};
      std::cout << result.dump() << std::endl;
      if (!tau_out.empty()) {
        ensure_parent(tau_out);
        std::ofstream(tau_out, std::ios::trunc) << result.dump() << '\n';
        Record r;
        r.stage = "tau";
        r.inputs = {tau_a, tau_b};
        r.outputs = {tau_out};
        r.file = beside(tau_out, ".provenance.json");
        write_record(r);
      }
    };
  });

  // synth-bench
  auto* sb = app.add_subcommand("synth-bench", "run the synthetic two-source selection benchmark");
  BenchConfig bc;
  std::string sources = "random";
  std::vector<std::string> variant_specs;
  int trials = 1;
  std::string sb_out, sb_csv, sb_fixtures;
  bool fixture_audio = false;
  sb->add_option("--vocab-size", bc.vocab_size, "token vocabulary of the sources");
  sb->add_option("--sources", sources, "random | disjoint | identical | perturbed");
  sb->add_option("--support", bc.support, "successors per state");
  sb->add_option("--perturbation", bc.perturbation, "perturbed sources: mixing weight");
  sb->add_option("--pool-size", bc.pool_size, "pool utterances");
  sb->add_option("--target-fraction", bc.target_fraction, "share of target utterances in the pool");
  sb->add_option("--length-min", bc.lengths.min, "minimum utterance length (tokens)");
  sb->add_option("--length-max", bc.lengths.max, "maximum utterance length (tokens)");
  sb->add_option("--target-train", bc.target_train, "target LM training utterances");
  sb->add_option("--general-train", bc.general_train, "general LM training utterances");
  sb->add_option("--budget-fraction", bc.budget_fraction, "selected share of the pool");
  sb->add_option("--seed", bc.seed, "random seed");
  sb->add_option("--feature-dim", bc.feature_dim, "feature path: frame dimension");
  sb->add_option("--feature-noise", bc.feature_noise, "feature path: emission noise");
  sb->add_option("--codebook-sample-cap", bc.codebook_sample_cap, "feature path: k-means training frames");
  sb->add_option("--kmeans-iters", bc.kmeans_iters, "feature path: Lloyd iterations");
  sb->add_option("--variant", variant_specs, "pipeline variant, e.g. tokens, features:k=512, tokens:scale=0.5");
  sb->add_option("--trials", trials, "independent trials with consecutive seeds")->check(CLI::Range(1, 100000));
  sb->add_option("--out", sb_out, "report JSON (default: stdout)");
  sb->add_option("--scores-csv", sb_csv, "per-utterance scores of the first variant (first trial)");
  sb->add_option("--fixtures", sb_fixtures, "write the benchmark corpora (manifests + tokens) here");
  sb->add_flag("--fixture-audio", fixture_audio, "also render fixture utterances as WAV audio");
  sb->callback([&] {
    action = [&] {
      try {
        bc.sources = source_kind_from(sources);
        bc.validate();
      } catch (const ConfigError& e) {
        throw UsageError(e.what());
      }
      bc.jobs = effective_config(g).jobs;
      std::vector<PipelineVariant> variants;
      for (const auto& s : variant_specs) variants.push_back(parse_variant(s));
      if (variants.empty()) variants.push_back(parse_variant("tokens"));
      json params;
      {
        BenchReport shape;
        shape.config = bc;
        const json j = to_json(shape);
        params["seed"] = bc.seed;
        params["config"] = j["config"];
        for (const auto& v : variants) params["variants"].push_back(v.name);
      }

      if (!sb_fixtures.empty()) {
        fs::create_directories(sb_fixtures);
        const auto corpora = sample_bench_corpora(bc);
        write_bench_fixtures(corpora, sb_fixtures, fixture_audio, bc.seed);
        Record r;
        r.stage = "synth-bench-fixtures";
        r.params = params["config"];
        r.params["seed"] = bc.seed;
        r.params["audio"] = fixture_audio;
        for (const char* name : {"pool", "target", "general"}) {
          r.outputs.push_back(fs::path(sb_fixtures) / name / "manifest.jsonl");
          r.outputs.push_back(fs::path(sb_fixtures) / name / "tokens.bin");
        }
        r.file = fs::path(sb_fixtures) / "provenance.json";
        write_record(r);
      }

      json out;
      std::vector<double> precision;
      for (int t = 0; t < trials; ++t) {
        BenchConfig cfg = bc;
        cfg.seed = bc.seed + static_cast<std::uint64_t>(t);
        const auto rep = run_benchmark(cfg, variants);
        if (t == 0 && !sb_csv.empty()) {
          ensure_parent(sb_csv);
          std::ofstream(sb_csv, std::ios::trunc) << bench_scores_csv(rep);
        }
        precision.push_back(rep.precision_at_budget);
        if (trials == 1)
          out = to_json(rep);
        else
          out["reports"].push_back(to_json(rep));
      }
      if (trials > 1) {
        json summary;
        double sum = 0;
        for (double p : precision) sum += p;
        summary["trials"] = trials;
        summary["precision_mean"] = sum / double(trials);
        summary["precision_min"] = *std::min_element(precision.begin(), precision.end());
        summary["precision_max"] = *std::max_element(precision.begin(), precision.end());
        json ordered;
        ordered["summary"] = summary;
        ordered["reports"] = out["reports"];
        out = ordered;
      }
      if (sb_out.empty()) {
        std::cout << out.dump(2) << std::endl;
      } else {
        ensure_parent(sb_out);
        std::ofstream(sb_out, std::ios::trunc) << out.dump(2) << '\n';
        Record r;
        r.stage = "synth-bench";
        r.params = params;
        r.params["trials"] = trials;
        r.outputs = {sb_out};
        if (!sb_csv.empty()) r.outputs.push_back(sb_csv);
        r.file = beside(sb_out, ".provenance.json");
        write_record(r);
      }
    };
  });

  // validate-config
  auto* vc = app.add_subcommand("validate-config", "check a pipeline config and print it with defaults filled in");
  vc->callback([&] {
    action = [&] {
      const auto path = config_source(g);
      if (!path) throw UsageError("no config given (--config or $" + std::string(kConfigEnvVar) + ")");
      PipelineConfig c = effective_config(g);
      c.validate(true);
      const auto j = to_json(c);
      std::cout << json{{"valid", true}, {"config_sha256", sha256_string(j.dump())}, {"config", j}}.dump(2)
                << std::endl;
    };
  });

  // pipeline
  auto* pl = app.add_subcommand("pipeline", "run every stage from a config, skipping stages that are up to date");
  pl->callback([&] {
    action = [&] {
      if (!config_source(g)) throw UsageError("pipeline needs a config (--config or $" + std::string(kConfigEnvVar) + ")");
      run_pipeline(effective_config(g));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kExitUsage);
  }

  try {
    action();
  } catch (const UsageError& e) {
    return fail(e.kind(), e.what(), kExitUsage);
  } catch (const ConfigError& e) {
    return fail(e.kind(), e.what(), kExitUsage);
  } catch (const ArgumentError& e) {
    return fail(e.kind(), e.what(), kExitUsage);
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), kExitRuntime);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), kExitRuntime);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
