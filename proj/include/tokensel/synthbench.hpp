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

// Synthetic two-domain corpora with known ground truth, and an end-to-end
// benchmark that measures how well contrastive selection recovers the
// target-domain utterances from a mixed pool.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tokensel/corpus_io.hpp"
#include "tokensel/error.hpp"
#include "tokensel/kneser_ney.hpp"
#include "tokensel/matrix.hpp"
#include "tokensel/ngram_counts.hpp"
#include "tokensel/quantizer.hpp"
#include "tokensel/selector.hpp"

namespace tokensel {

inline constexpr const char* kTargetTag = "target";
inline constexpr const char* kGeneralTag = "general";

// Derives independent sub-seeds from one seed (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct MarkovSource {
  std::uint32_t vocab_size = 0;
  Matrix<double> transition;  // row-stochastic
  std::vector<double> initial;
  std::uint64_t seed = 0;

  void validate() const {
    if (vocab_size == 0) throw ArgumentError("Markov source with empty vocab");
    if (transition.rows() != vocab_size || transition.cols() != vocab_size || initial.size() != vocab_size)
      throw ArgumentError("Markov source shape mismatch");
    auto check = [](std::span<const double> row, const char* what) {
      double s = 0;
      for (double p : row) {
        if (!(p >= 0)) throw ValidationError(std::string(what) + " has a negative entry");
        s += p;
      }
      if (std::fabs(s - 1) > 1e-9) throw ValidationError(std::string(what) + " does not sum to 1");
    };
    for (std::size_t r = 0; r < vocab_size; ++r) check(transition.row(r), "transition row");
    check(initial, "initial distribution");
  }

  // Each state moves to `support` distinct random successors drawn from
  // [first, first + span) with Dirichlet(1) weights; uniform start there.
  static MarkovSource random_sparse(std::uint32_t vocab, std::uint32_t support, std::uint64_t seed,
                                    std::uint32_t first = 0, std::uint32_t span = 0) {
    if (span == 0) span = vocab - first;
    if (first + span > vocab || support == 0) throw ArgumentError("bad sparse source shape");
    support = std::min(support, span);
    MarkovSource m;
    m.vocab_size = vocab;
    m.seed = seed;
    m.transition = Matrix<double>(vocab, vocab, 0.0);
    m.initial.assign(vocab, 0.0);
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> gamma(1.0, 1.0);
    std::vector<std::uint32_t> states(span);
    for (std::uint32_t r = 0; r < vocab; ++r) {
      std::iota(states.begin(), states.end(), first);
      std::shuffle(states.begin(), states.end(), rng);
      double total = 0;
      std::vector<double> w(support);
      for (auto& x : w) total += (x = gamma(rng) + 1e-3);
      for (std::uint32_t k = 0; k < support; ++k) m.transition(r, states[k]) = w[k] / total;
    }
    for (std::uint32_t s = first; s < first + span; ++s) m.initial[s] = 1.0 / span;
    return m;
  }

  // (1 - alpha) * a + alpha * b, row by row.
  static MarkovSource mixture(const MarkovSource& a, const MarkovSource& b, double alpha) {
    if (a.vocab_size != b.vocab_size) throw ArgumentError("mixture of sources with different vocab");
    if (!(alpha >= 0 && alpha <= 1)) throw ArgumentError("mixture weight outside [0, 1]");
    MarkovSource m = a;
    m.seed = derive_seed(a.seed, b.seed);
    for (std::size_t i = 0; i < m.transition.data().size(); ++i)
      m.transition.data()[i] = (1 - alpha) * a.transition.data()[i] + alpha * b.transition.data()[i];
    for (std::size_t i = 0; i < m.initial.size(); ++i) m.initial[i] = (1 - alpha) * a.initial[i] + alpha * b.initial[i];
    return m;
  }

  std::vector<Token> sample(std::size_t length, std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto draw = [&](std::span<const double> p) {
      double r = u(rng), cum = 0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        cum += p[k];
        if (r < cum && p[k] > 0) return static_cast<Token>(k);
      }
      for (std::size_t k = p.size(); k-- > 0;)
        if (p[k] > 0) return static_cast<Token>(k);
      return Token{0};
    };
    std::vector<Token> out;
    out.reserve(length);
    if (length == 0) return out;
    out.push_back(draw(initial));
    while (out.size() < length) out.push_back(draw(transition.row(out.back())));
    return out;
  }
};

struct LengthRange {
  std::size_t min = 200;
  std::size_t max = 200;
};

struct SyntheticCorpus {
  std::uint32_t vocab_size = 0;
  std::vector<Utterance> utterances;  // token_path "tokens.bin", domain_tag target/general
  std::vector<TokenSequence> tokens;  // aligned with utterances
};

inline constexpr double kSecondsPerToken = 0.01;

// n_target utterances from `target` and n_general from `general`, in a
// seeded random interleaving; ids "<prefix>-NNNNNN".
inline SyntheticCorpus sample_corpus(const MarkovSource& target, const MarkovSource& general, std::size_t n_target,
                                     std::size_t n_general, LengthRange lengths, std::uint64_t seed,
                                     const std::string& id_prefix = "syn") {
  if (target.vocab_size != general.vocab_size) throw ArgumentError("sources differ in vocab size");
  if (lengths.min < 2 || lengths.max < lengths.min) throw ArgumentError("utterance lengths must satisfy 2 <= min <= max");
  std::mt19937_64 rng(seed);
  std::vector<bool> is_target(n_target + n_general, false);
  std::fill(is_target.begin(), is_target.begin() + static_cast<std::ptrdiff_t>(n_target), true);
  std::shuffle(is_target.begin(), is_target.end(), rng);

  SyntheticCorpus c;
  c.vocab_size = target.vocab_size;
  std::uniform_int_distribution<std::size_t> len(lengths.min, lengths.max);
  const int width = 6;
  for (std::size_t i = 0; i < is_target.size(); ++i) {
    std::string num = std::to_string(i);
    if (num.size() < width) num.insert(0, width - num.size(), '0');
    Utterance u;
    u.id = id_prefix + "-" + num;
    u.token_path = "tokens.bin";
    u.domain_tag = is_target[i] ? kTargetTag : kGeneralTag;
    auto tokens = (is_target[i] ? target : general).sample(len(rng), rng);
    u.duration_s = double(tokens.size()) * kSecondsPerToken;
    c.tokens.push_back({u.id, std::move(tokens)});
    c.utterances.push_back(std::move(u));
  }
  return c;
}

inline void write_corpus(const SyntheticCorpus& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_manifest((dir / "manifest.jsonl").string(), c.utterances);
  write_tokens(c.tokens, c.vocab_size, (dir / "tokens.bin").string());
}

// ---------------------------------------------------------------------------
// Benchmark.

enum class SourceKind { kRandom, kDisjoint, kIdentical, kPerturbed };

inline const char* to_string(SourceKind k) {
  switch (k) {
    case SourceKind::kRandom: return "random";
    case SourceKind::kDisjoint: return "disjoint";
    case SourceKind::kIdentical: return "identical";
    case SourceKind::kPerturbed: return "perturbed";
  }
  return "?";
}

inline SourceKind source_kind_from(const std::string& s) {
  if (s == "random") return SourceKind::kRandom;
  if (s == "disjoint") return SourceKind::kDisjoint;
  if (s == "identical") return SourceKind::kIdentical;
  if (s == "perturbed") return SourceKind::kPerturbed;
  throw ConfigError("unknown source kind '" + s + "'");
}

struct BenchConfig {
  std::uint32_t vocab_size = 64;
  SourceKind sources = SourceKind::kRandom;
  std::uint32_t support = 4;   // successors per state
  double perturbation = 1.0;   // kPerturbed: target = (1-a) general + a other
  std::size_t pool_size = 2000;
  double target_fraction = 0.1;
  LengthRange lengths{200, 200};
  std::size_t target_train = 200;
  std::size_t general_train = 400;
  double budget_fraction = 0.1;
  std::uint64_t seed = 1;
  // Continuous-feature path: state s emits mean_s + noise * N(0, I).
  std::uint32_t feature_dim = 16;
  double feature_noise = 0.5;
  std::size_t codebook_sample_cap = 50000;
  std::uint32_t kmeans_iters = 20;
  unsigned jobs = 1;

  void validate() const {
    if (vocab_size < 2) throw ConfigError("bench: vocab_size must be >= 2");
    if (pool_size == 0) throw ConfigError("bench: empty pool");
    if (!(target_fraction >= 0 && target_fraction <= 1)) throw ConfigError("bench: target_fraction outside [0, 1]");
    if (!(budget_fraction > 0 && budget_fraction <= 1)) throw ConfigError("bench: budget_fraction outside (0, 1]");
    if (lengths.min < 2 || lengths.max < lengths.min) throw ConfigError("bench: lengths must satisfy 2 <= min <= max");
    if (support == 0) throw ConfigError("bench: support must be >= 1");
    if (!(perturbation >= 0 && perturbation <= 1)) throw ConfigError("bench: perturbation outside [0, 1]");
  }
};

struct PipelineVariant {
  std::string name = "tokens";
  bool use_features = false;  // emit Gaussian frames and learn a codebook
  std::uint32_t codebook_size = 64;
  bool collapse_repeats = false;
  int order = 5;
  double target_train_scale = 1.0;  // fraction of the target training split used
  bool include_eos = false;         // score the end-of-utterance event too
};

struct VariantResult {
  std::string name;
  double precision = 0;
  double recall = 0;
  std::vector<DomainScore> scores;  // pool order
  std::vector<std::string> selected;
};

struct BenchReport {
  BenchConfig config;
  std::vector<PipelineVariant> variants;
  std::vector<VariantResult> results;
  std::vector<std::string> pool_ids;
  std::vector<std::string> pool_tags;
  std::size_t pool_target = 0;
  std::size_t budget = 0;
  // Headline numbers are those of the first variant.
  double precision_at_budget = 0;
  double recall_at_budget = 0;
  std::optional<double> tau_between_configs;      // first vs second variant
  std::optional<double> jaccard_between_configs;  // of their selected sets
};

struct BenchSources {
  MarkovSource target;
  MarkovSource general;
};

inline BenchSources make_sources(const BenchConfig& cfg) {
  const auto s_target = derive_seed(cfg.seed, 1), s_general = derive_seed(cfg.seed, 2);
  const auto v = cfg.vocab_size;
  switch (cfg.sources) {
    case SourceKind::kRandom:
      return {MarkovSource::random_sparse(v, cfg.support, s_target), MarkovSource::random_sparse(v, cfg.support, s_general)};
    case SourceKind::kDisjoint:
      return {MarkovSource::random_sparse(v, cfg.support, s_target, 0, v / 2),
              MarkovSource::random_sparse(v, cfg.support, s_general, v / 2, v - v / 2)};
    case SourceKind::kIdentical: {
      auto g = MarkovSource::random_sparse(v, cfg.support, s_general);
      return {g, g};
    }
    case SourceKind::kPerturbed: {
      auto g = MarkovSource::random_sparse(v, cfg.support, s_general);
      auto other = MarkovSource::random_sparse(v, cfg.support, s_target);
      return {MarkovSource::mixture(g, other, cfg.perturbation), g};
    }
  }
  throw ConfigError("unknown source kind");
}

inline double jaccard(std::vector<std::string> a, std::vector<std::string> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::string> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  const std::size_t uni = a.size() + b.size() - both.size();
  return uni == 0 ? 1.0 : double(both.size()) / double(uni);
}

// The three corpora one benchmark run draws: the mixed pool to be ranked and
// the training splits for the target and general LMs.
struct BenchCorpora {
  SyntheticCorpus pool, target_train, general_train;
};

inline BenchCorpora sample_bench_corpora(const BenchConfig& cfg) {
  cfg.validate();
  const auto [target_src, general_src] = make_sources(cfg);
  BenchCorpora data;
  const auto n_pool_target = static_cast<std::size_t>(std::llround(double(cfg.pool_size) * cfg.target_fraction));
  const auto n_gen_target = static_cast<std::size_t>(std::llround(double(cfg.general_train) * cfg.target_fraction));
  data.pool = sample_corpus(target_src, general_src, n_pool_target, cfg.pool_size - n_pool_target, cfg.lengths,
                            derive_seed(cfg.seed, 3), "pool");
  data.target_train = sample_corpus(target_src, general_src, cfg.target_train, 0, cfg.lengths,
                                    derive_seed(cfg.seed, 4), "ttrain");
  // The general LM sees a random sample of the pool distribution.
  data.general_train = sample_corpus(target_src, general_src, n_gen_target, cfg.general_train - n_gen_target,
                                     cfg.lengths, derive_seed(cfg.seed, 5), "gtrain");
  return data;
}

// Renders tokens as audio, 10 ms per token: a two-partial tone whose pitch is
// set by the token id, plus low-level noise. Lets the audio frontend and the
// quantizer run on benchmark fixtures.
inline std::vector<std::int16_t> render_tokens_pcm(std::span<const Token> tokens, std::uint32_t vocab,
                                                   std::uint64_t seed) {
  constexpr std::size_t kPerToken = kSampleRate / 100;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.003);
  std::vector<std::int16_t> pcm(tokens.size() * kPerToken);
  double phase1 = 0, phase2 = 0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const double f = 150.0 + 6000.0 * double(tokens[t]) / double(std::max<std::uint32_t>(vocab, 1));
    for (std::size_t i = 0; i < kPerToken; ++i) {
      phase1 += 2 * std::numbers::pi * f / kSampleRate;
      phase2 += 2 * std::numbers::pi * 1.5 * f / kSampleRate;
      const double x = 0.3 * std::sin(phase1) + 0.1 * std::sin(phase2) + noise(rng);
      pcm[t * kPerToken + i] = static_cast<std::int16_t>(std::lround(std::clamp(x, -1.0, 1.0) * 32767.0));
    }
  }
  return pcm;
}

// Writes <dir>/{pool,target,general}/manifest.jsonl with tokens.bin and, if
// `audio`, one WAV per utterance under audio/. Manifest paths are relative.
inline void write_bench_fixtures(const BenchCorpora& data, const std::filesystem::path& dir, bool audio,
                                 std::uint64_t seed) {
  std::uint64_t stream = 100;
  for (const auto& [name, corpus] : {std::pair<const char*, const SyntheticCorpus*>{"pool", &data.pool},
                                     {"target", &data.target_train},
                                     {"general", &data.general_train}}) {
    const auto sub = dir / name;
    SyntheticCorpus c = *corpus;
    if (audio) {
      std::filesystem::create_directories(sub / "audio");
      for (std::size_t i = 0; i < c.utterances.size(); ++i) {
        const auto rel = std::string("audio/") + safe_file_stem(c.utterances[i].id) + ".wav";
        write_wav((sub / rel).string(),
                  render_tokens_pcm(c.tokens[i].tokens, c.vocab_size, derive_seed(seed, stream + i)));
        c.utterances[i].audio_path = rel;
      }
    }
    stream += 1u << 20;
    write_corpus(c, sub);
  }
}

namespace detail {

inline Matrix<float> emit_frames(std::span<const Token> states, const Matrix<float>& means, double noise,
                                 std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix<float> frames(states.size(), means.cols());
  for (std::size_t t = 0; t < states.size(); ++t) {
    auto mean = means.row(states[t]);
    auto row = frames.row(t);
    for (std::size_t d = 0; d < row.size(); ++d) row[d] = static_cast<float>(mean[d] + noise * gauss(rng));
  }
  return frames;
}

}  // namespace detail

inline BenchReport run_benchmark(const BenchConfig& cfg, std::span<const PipelineVariant> variants) {
  cfg.validate();
  if (variants.empty()) throw ConfigError("bench: no pipeline variants");
  const auto data = sample_bench_corpora(cfg);

  // Continuous frames, shared by every feature-path variant.
  std::vector<Matrix<float>> pool_frames, ttrain_frames, gtrain_frames;
  const bool any_features =
      std::any_of(variants.begin(), variants.end(), [](const auto& v) { return v.use_features; });
  if (any_features) {
    std::mt19937_64 rng(derive_seed(cfg.seed, 6));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix<float> means(cfg.vocab_size, cfg.feature_dim);
    for (auto& v : means.data()) v = static_cast<float>(gauss(rng));
    auto emit = [&](const SyntheticCorpus& c, std::vector<Matrix<float>>& out) {
      for (const auto& s : c.tokens) out.push_back(detail::emit_frames(s.tokens, means, cfg.feature_noise, rng));
    };
    emit(data.pool, pool_frames);
    emit(data.target_train, ttrain_frames);
    emit(data.general_train, gtrain_frames);
  }

  BenchReport report;
  report.config = cfg;
  report.variants.assign(variants.begin(), variants.end());
  for (const auto& u : data.pool.utterances) {
    report.pool_ids.push_back(u.id);
    report.pool_tags.push_back(*u.domain_tag);
    report.pool_target += *u.domain_tag == kTargetTag;
  }
  report.budget = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.budget_fraction * cfg.pool_size)));

  for (const auto& variant : variants) {
    const auto n_target_lm = static_cast<std::size_t>(std::llround(cfg.target_train * variant.target_train_scale));
    if (n_target_lm == 0 || cfg.general_train == 0)
      throw ConfigError("bench: training split too small for an order-" + std::to_string(variant.order) + " LM");

    std::uint32_t vocab = cfg.vocab_size;
    std::vector<TokenSequence> pool_tokens = data.pool.tokens;
    std::vector<TokenSequence> ttrain = data.target_train.tokens, gtrain = data.general_train.tokens;
    if (variant.use_features) {
      QuantizerConfig q;
      q.vocab_size = variant.codebook_size;
      q.dim = cfg.feature_dim;
      q.max_iters = cfg.kmeans_iters;
      q.seed = derive_seed(cfg.seed, 7);
      q.sample_cap = std::max<std::size_t>(cfg.codebook_sample_cap, variant.codebook_size);
      q.jobs = cfg.jobs;
      FrameReservoir reservoir(q.sample_cap, derive_seed(cfg.seed, 8));
      for (const auto& f : ttrain_frames) reservoir.add(f);
      for (const auto& f : gtrain_frames) reservoir.add(f);
      const auto codebook = train_codebook(reservoir.sample(), q).codebook;
      auto requantize = [&](std::vector<TokenSequence>& seqs, const std::vector<Matrix<float>>& frames) {
        parallel_for(seqs.size(), cfg.jobs, [&](std::size_t i) {
          FeatureMatrix fm{seqs[i].utterance_id, frames[i]};
          seqs[i] = quantize(fm, codebook, variant.collapse_repeats);
        });
      };
      requantize(pool_tokens, pool_frames);
      requantize(ttrain, ttrain_frames);
      requantize(gtrain, gtrain_frames);
      vocab = variant.codebook_size;
    } else if (variant.collapse_repeats) {
      for (auto* set : {&pool_tokens, &ttrain, &gtrain})
        for (auto& s : *set) s.tokens = collapse_repeats(s.tokens);
    }

    std::size_t target_tokens = 0, general_tokens = 0;
    for (std::size_t i = 0; i < n_target_lm; ++i) target_tokens += ttrain[i].tokens.size();
    for (const auto& s : gtrain) general_tokens += s.tokens.size();
    if (target_tokens < static_cast<std::size_t>(variant.order) || general_tokens < static_cast<std::size_t>(variant.order))
      throw ConfigError("bench: training split too small for an order-" + std::to_string(variant.order) + " LM");

    const auto target_lm = estimate(count(std::span(ttrain).first(n_target_lm), variant.order, vocab));
    const auto general_lm = estimate(count(gtrain, variant.order, vocab));

    VariantResult r;
    r.name = variant.name;
    r.scores.resize(pool_tokens.size());
    parallel_for(pool_tokens.size(), cfg.jobs,
                 [&](std::size_t i) { r.scores[i] = score(pool_tokens[i], target_lm, general_lm, variant.include_eos); });
    std::vector<double> durations;
    for (const auto& u : data.pool.utterances) durations.push_back(u.duration_s);
    const auto manifest = select(r.scores, durations, Budget::top_k(report.budget));
    std::unordered_map<std::string, bool> is_target;
    for (std::size_t i = 0; i < report.pool_ids.size(); ++i)
      is_target[report.pool_ids[i]] = report.pool_tags[i] == kTargetTag;
    std::size_t hits = 0;
    for (const auto& e : manifest.entries) {
      if (!e.selected) break;
      r.selected.push_back(e.utterance_id);
      hits += is_target[e.utterance_id];
    }
    r.precision = r.selected.empty() ? 0.0 : double(hits) / double(r.selected.size());
    r.recall = report.pool_target == 0 ? 0.0 : double(hits) / double(report.pool_target);
    report.results.push_back(std::move(r));
  }

  report.precision_at_budget = report.results[0].precision;
  report.recall_at_budget = report.results[0].recall;
  if (report.results.size() > 1) {
    std::vector<double> a, b;
    for (const auto& s : report.results[0].scores) a.push_back(s.score);
    for (const auto& s : report.results[1].scores) b.push_back(s.score);
    report.tau_between_configs = kendall_tau(a, b);
    report.jaccard_between_configs = jaccard(report.results[0].selected, report.results[1].selected);
  }
  return report;
}

inline nlohmann::ordered_json to_json(const BenchReport& r) {
  nlohmann::ordered_json j;
  const auto& c = r.config;
  j["seed"] = c.seed;
  j["config"] = {{"vocab_size", c.vocab_size},
                 {"sources", to_string(c.sources)},
                 {"support", c.support},
                 {"perturbation", c.perturbation},
                 {"pool_size", c.pool_size},
                 {"target_fraction", c.target_fraction},
                 {"length_min", c.lengths.min},
                 {"length_max", c.lengths.max},
                 {"target_train", c.target_train},
                 {"general_train", c.general_train},
                 {"budget_fraction", c.budget_fraction},
                 {"feature_dim", c.feature_dim},
                 {"feature_noise", c.feature_noise},
                 {"codebook_sample_cap", c.codebook_sample_cap},
                 {"kmeans_iters", c.kmeans_iters}};
  j["pool_target"] = r.pool_target;
  j["budget_utterances"] = r.budget;
  j["precision_at_budget"] = r.precision_at_budget;
  j["recall_at_budget"] = r.recall_at_budget;
  j["tau_between_configs"] = r.tau_between_configs ? nlohmann::ordered_json(*r.tau_between_configs) : nullptr;
  j["jaccard_between_configs"] =
      r.jaccard_between_configs ? nlohmann::ordered_json(*r.jaccard_between_configs) : nullptr;
  auto& vs = j["variants"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.variants.size(); ++i) {
    const auto& v = r.variants[i];
    vs.push_back({{"name", v.name},
                  {"use_features", v.use_features},
                  {"codebook_size", v.codebook_size},
                  {"collapse_repeats", v.collapse_repeats},
                  {"order", v.order},
                  {"target_train_scale", v.target_train_scale},
                  {"include_eos", v.include_eos},
                  {"precision", r.results[i].precision},
                  {"recall", r.results[i].recall}});
  }
  return j;
}

// utterance_id,tag,score for one variant, pool order.
inline std::string bench_scores_csv(const BenchReport& r, std::size_t variant = 0) {
  std::ostringstream os;
  os << std::setprecision(17) << "utterance_id,tag,score\n";
  const auto& scores = r.results.at(variant).scores;
  for (std::size_t i = 0; i < scores.size(); ++i)
    os << scores[i].utterance_id << ',' << r.pool_tags[i] << ',' << scores[i].score << '\n';
  return os.str();
}

}  // namespace tokensel
