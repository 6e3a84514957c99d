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

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "tokensel/binary_io.hpp"
#include "tokensel/error.hpp"
#include "tokensel/wav.hpp"

namespace tokensel {

using Token = std::uint32_t;

// Largest vocabulary a token file (and the n-gram sentinels) can address.
inline constexpr std::uint32_t kMaxVocab = 0xFFFFFF00u;

struct Utterance {
  std::string id;
  std::optional<std::string> audio_path;
  std::optional<std::string> token_path;
  double duration_s = 0.0;
  std::optional<std::string> domain_tag;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct TokenSequence {
  std::string utterance_id;
  std::vector<Token> tokens;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

// ---------------------------------------------------------------------------
// Manifests: one JSON object per line.

inline nlohmann::ordered_json to_json(const Utterance& u) {
  nlohmann::ordered_json j;
  j["id"] = u.id;
  if (u.audio_path) j["audio_path"] = *u.audio_path;
  if (u.token_path) j["token_path"] = *u.token_path;
  j["duration_s"] = u.duration_s;
  if (u.domain_tag) j["domain_tag"] = *u.domain_tag;
  return j;
}

namespace detail {

inline std::optional<std::string> optional_string(const nlohmann::json& j,
                                                  const char* key,
                                                  std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(std::string("'") + key + "' must be a string", line);
  return it->get<std::string>();
}

}  // namespace detail

// Parses one manifest line. Unknown fields are ignored so that score and
// selection manifests can be read back as plain corpora.
inline Utterance parse_utterance(std::string_view text, std::size_t line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line);
  }
  if (!j.is_object()) throw ParseError("expected a JSON object", line);
  Utterance u;
  auto id = j.find("id");
  if (id == j.end() || !id->is_string()) throw ParseError("missing string field 'id'", line);
  u.id = id->get<std::string>();
  if (u.id.empty()) throw ParseError("empty 'id'", line);
  u.audio_path = detail::optional_string(j, "audio_path", line);
  u.token_path = detail::optional_string(j, "token_path", line);
  u.domain_tag = detail::optional_string(j, "domain_tag", line);
  if (!u.audio_path && !u.token_path)
    throw ParseError("utterance needs 'audio_path' or 'token_path'", line);
  auto dur = j.find("duration_s");
  if (dur == j.end() || !dur->is_number()) throw ParseError("missing numeric field 'duration_s'", line);
  u.duration_s = dur->get<double>();
  if (!std::isfinite(u.duration_s) || u.duration_s < 0)
    throw ParseError("'duration_s' must be a finite number >= 0", line);
  return u;
}

inline void check_unique_ids(std::span<const Utterance> utts) {
  std::unordered_set<std::string> seen;
  for (const auto& u : utts)
    if (!seen.insert(u.id).second) throw ValidationError("duplicate utterance id '" + u.id + "'");
}

inline std::vector<Utterance> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path + "'");
  std::vector<Utterance> utts;
  std::unordered_set<std::string> seen;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto u = parse_utterance(line, n);
    if (!seen.insert(u.id).second)
      throw ValidationError(path + ":" + std::to_string(n) + ": duplicate utterance id '" + u.id + "'");
    utts.push_back(std::move(u));
  }
  return utts;
}

inline void write_manifest(const std::string& path, std::span<const Utterance> utts) {
  check_unique_ids(utts);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open manifest '" + path + "' for writing");
  for (const auto& u : utts) out << to_json(u).dump() << '\n';
  binary::check_written(out, path);
}

// Rewrites relative audio/token paths as if they were relative to `base`.
inline void resolve_paths(std::vector<Utterance>& utts, const std::filesystem::path& base) {
  auto fix = [&](std::optional<std::string>& p) {
    if (p && std::filesystem::path(*p).is_relative()) p = (base / *p).lexically_normal().string();
  };
  for (auto& u : utts) {
    fix(u.audio_path);
    fix(u.token_path);
  }
}

inline std::filesystem::path manifest_dir(const std::string& manifest_path) {
  auto dir = std::filesystem::path(manifest_path).parent_path();
  return dir.empty() ? std::filesystem::path(".") : dir;
}

// ---------------------------------------------------------------------------
// Segmentation.

struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const SampleRange&, const SampleRange&) = default;
};

// Splits [begin, end) into consecutive pieces of at most max_samples.
inline std::vector<SampleRange> chunk_range(SampleRange range, std::size_t max_samples) {
  if (max_samples == 0) throw ArgumentError("max segment length must be positive");
  std::vector<SampleRange> out;
  for (std::size_t b = range.begin; b < range.end; b += max_samples)
    out.push_back({b, std::min(range.end, b + max_samples)});
  return out;
}

// Energy-threshold voice activity: 10 ms frames whose RMS level (dBFS) is at
// least threshold_db are speech; maximal speech runs become regions.
inline std::vector<SampleRange> energy_vad(std::span<const std::int16_t> pcm,
                                           double threshold_db) {
  constexpr std::size_t kFrame = kSampleRate / 100;
  std::vector<SampleRange> regions;
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t start = kNone;
  for (std::size_t b = 0; b < pcm.size(); b += kFrame) {
    const std::size_t e = std::min(pcm.size(), b + kFrame);
    double energy = 0;
    for (std::size_t i = b; i < e; ++i) {
      const double x = pcm[i] / 32768.0;
      energy += x * x;
    }
    const double db = 10.0 * std::log10(energy / double(e - b) + 1e-20);
    if (db >= threshold_db) {
      if (start == kNone) start = b;
    } else if (start != kNone) {
      regions.push_back({start, b});
      start = kNone;
    }
  }
  if (start != kNone) regions.push_back({start, pcm.size()});
  return regions;
}

struct SegmentOptions {
  double max_segment_s = 32.0;
  std::optional<double> vad_threshold_db;
};

inline std::size_t max_segment_samples(double max_segment_s) {
  if (!(max_segment_s > 0) || !std::isfinite(max_segment_s))
    throw ArgumentError("max_segment_s must be a positive number");
  return static_cast<std::size_t>(std::llround(max_segment_s * kSampleRate));
}

// Sample ranges an utterance of `pcm` is cut into.
inline std::vector<SampleRange> plan_segments(std::span<const std::int16_t> pcm,
                                              const SegmentOptions& opts) {
  const auto max_samples = max_segment_samples(opts.max_segment_s);
  std::vector<SampleRange> regions;
  if (opts.vad_threshold_db)
    regions = energy_vad(pcm, *opts.vad_threshold_db);
  else
    regions.push_back({0, pcm.size()});
  std::vector<SampleRange> out;
  for (auto r : regions)
    for (auto c : chunk_range(r, max_samples)) out.push_back(c);
  return out;
}

inline std::string safe_file_stem(std::string_view id) {
  std::string s(id);
  for (auto& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  return s;
}

// Reads the utterance's audio, writes each segment to out_dir as
// "<id>-<k>.wav" and returns the segment utterances (ids "<id>-<k>").
// Without VAD the segments concatenate back to the input exactly.
inline std::vector<Utterance> segment_audio(const Utterance& utt,
                                            const SegmentOptions& opts,
                                            const std::filesystem::path& out_dir) {
  if (!utt.audio_path) throw ArgumentError("utterance '" + utt.id + "' has no audio_path");
  const auto pcm = read_wav(*utt.audio_path);
  const auto ranges = plan_segments(pcm, opts);
  std::vector<Utterance> out;
  out.reserve(ranges.size());
  for (std::size_t k = 0; k < ranges.size(); ++k) {
    Utterance seg;
    seg.id = utt.id + "-" + std::to_string(k);
    auto file = out_dir / (safe_file_stem(seg.id) + ".wav");
    std::span<const std::int16_t> piece(pcm.data() + ranges[k].begin,
                                        ranges[k].end - ranges[k].begin);
    write_wav(file.string(), piece);
    seg.audio_path = file.string();
    seg.duration_s = double(piece.size()) / kSampleRate;
    seg.domain_tag = utt.domain_tag;
    out.push_back(std::move(seg));
  }
  return out;
}

inline std::vector<Utterance> segment_audio(const Utterance& utt, double max_segment_s,
                                            const std::filesystem::path& out_dir) {
  return segment_audio(utt, SegmentOptions{max_segment_s, std::nullopt}, out_dir);
}

// ---------------------------------------------------------------------------
// Token files.
//
//   "TSTK" | u32 version | u32 vocab_size | u64 count
//   count x { u32 id_len | id bytes | u32 length | length x id }
//
// Ids are u16 when vocab_size <= 65536, else u32. All integers little-endian.

inline constexpr std::string_view kTokenMagic = "TSTK";
inline constexpr std::uint32_t kTokenVersion = 1;

inline bool narrow_tokens(std::uint32_t vocab_size) { return vocab_size <= 65536; }

class TokenWriter {
 public:
  TokenWriter(std::string path, std::uint32_t vocab_size)
      : path_(std::move(path)), vocab_(vocab_size), out_(binary::open_out(path_)) {
    if (vocab_ == 0 || vocab_ > kMaxVocab) throw ArgumentError("invalid vocab size " + std::to_string(vocab_));
    binary::put_magic(out_, kTokenMagic);
    binary::put(out_, kTokenVersion);
    binary::put(out_, vocab_);
    count_pos_ = out_.tellp();
    binary::put(out_, std::uint64_t{0});
  }
  TokenWriter(const TokenWriter&) = delete;
  TokenWriter& operator=(const TokenWriter&) = delete;
  ~TokenWriter() {
    try {
      close();
    } catch (...) {
    }
  }

  void write(const TokenSequence& seq) {
    for (Token t : seq.tokens)
      if (t >= vocab_)
        throw ValidationError("token " + std::to_string(t) + " in '" + seq.utterance_id +
                              "' is outside vocab of size " + std::to_string(vocab_));
    binary::put_string(out_, seq.utterance_id);
    binary::put(out_, static_cast<std::uint32_t>(seq.tokens.size()));
    if (narrow_tokens(vocab_))
      for (Token t : seq.tokens) binary::put(out_, static_cast<std::uint16_t>(t));
    else
      for (Token t : seq.tokens) binary::put(out_, t);
    ++count_;
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    out_.seekp(count_pos_);
    binary::put(out_, count_);
    binary::check_written(out_, path_);
    out_.close();
  }

 private:
  std::string path_;
  std::uint32_t vocab_;
  std::ofstream out_;
  std::streampos count_pos_;
  std::uint64_t count_ = 0;
  bool closed_ = false;
};

class TokenReader {
 public:
  explicit TokenReader(std::string path) : path_(std::move(path)), in_(binary::open_in(path_)) {
    binary::expect_magic(in_, kTokenMagic, path_);
    if (auto v = binary::get<std::uint32_t>(in_, "version"); v != kTokenVersion)
      throw FormatError(path_ + ": unsupported token file version " + std::to_string(v));
    vocab_ = binary::get<std::uint32_t>(in_, "vocab_size");
    if (vocab_ == 0 || vocab_ > kMaxVocab) throw FormatError(path_ + ": invalid vocab size in header");
    count_ = binary::get<std::uint64_t>(in_, "count");
  }

  std::uint32_t vocab_size() const noexcept { return vocab_; }
  std::uint64_t count() const noexcept { return count_; }

  std::optional<TokenSequence> next() {
    if (read_ == count_) {
      if (in_.peek() != std::char_traits<char>::eof())
        throw FormatError(path_ + ": trailing data after " + std::to_string(count_) + " sequences");
      return std::nullopt;
    }
    TokenSequence seq;
    seq.utterance_id = binary::get_string(in_, "utterance id");
    const auto len = binary::get<std::uint32_t>(in_, "sequence length");
    seq.tokens.resize(len);
    for (auto& t : seq.tokens) {
      t = narrow_tokens(vocab_) ? binary::get<std::uint16_t>(in_, "tokens")
                                : binary::get<std::uint32_t>(in_, "tokens");
      if (t >= vocab_)
        throw FormatError(path_ + ": token " + std::to_string(t) + " exceeds header vocab " +
                          std::to_string(vocab_));
    }
    ++read_;
    return seq;
  }

 private:
  std::string path_;
  std::ifstream in_;
  std::uint32_t vocab_ = 0;
  std::uint64_t count_ = 0;
  std::uint64_t read_ = 0;
};

inline void write_tokens(std::span<const TokenSequence> sequences, std::uint32_t vocab_size,
                         const std::string& path) {
  for (const auto& s : sequences)
    for (Token t : s.tokens)
      if (t >= vocab_size)
        throw ValidationError("token " + std::to_string(t) + " >= vocab size " + std::to_string(vocab_size));
  TokenWriter w(path, vocab_size);
  for (const auto& s : sequences) w.write(s);
  w.close();
}

struct TokenFile {
  std::uint32_t vocab_size = 0;
  std::vector<TokenSequence> sequences;
};

inline TokenFile read_token_file(const std::string& path) {
  TokenReader r(path);
  TokenFile f{r.vocab_size(), {}};
  f.sequences.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(r.count(), 1u << 20)));
  while (auto s = r.next()) f.sequences.push_back(std::move(*s));
  return f;
}

inline std::vector<TokenSequence> read_tokens(const std::string& path) {
  return read_token_file(path).sequences;
}

// As read_tokens, but the header must declare `expected_vocab`.
inline std::vector<TokenSequence> read_tokens(const std::string& path, std::uint32_t expected_vocab) {
  auto f = read_token_file(path);
  if (f.vocab_size != expected_vocab)
    throw FormatError(path + ": header vocab " + std::to_string(f.vocab_size) +
                      " does not match expected " + std::to_string(expected_vocab));
  return std::move(f.sequences);
}

}  // namespace tokensel
