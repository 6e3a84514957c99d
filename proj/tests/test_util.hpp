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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tokensel/corpus_io.hpp"
#include "tokensel/exact_sum.hpp"
#include "tokensel/ngram_model.hpp"

namespace tokensel::testing {

inline std::vector<TokenSequence> random_corpus(std::mt19937_64& rng, Token vocab, std::size_t max_seqs,
                                                std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> nseq(1, max_seqs), len(1, max_len);
  // Skewed token draw so that some n-grams repeat and count-of-counts vary.
  std::geometric_distribution<Token> tok(0.25);
  std::vector<TokenSequence> out(nseq(rng));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].utterance_id = "s" + std::to_string(i);
    out[i].tokens.resize(len(rng));
    for (auto& t : out[i].tokens) t = tok(rng) % vocab;
  }
  return out;
}

inline std::vector<std::vector<Token>> plain(const std::vector<TokenSequence>& seqs) {
  std::vector<std::vector<Token>> out;
  for (const auto& s : seqs) out.push_back(s.tokens);
  return out;
}

inline std::vector<TokenSequence> sequences(const std::vector<std::vector<Token>>& toks) {
  std::vector<TokenSequence> out;
  for (std::size_t i = 0; i < toks.size(); ++i) out.push_back({"s" + std::to_string(i), toks[i]});
  return out;
}

// Largest |1 - sum_w P(w|h)| over every stored context h, with unseen words
// completed by back-off.
inline double max_normalization_error(const NgramModel& m) {
  double worst = 0;
  for (const auto& h : m.contexts()) {
    ExactSum sum;
    for (Token w = 0; w <= m.eos(); ++w) sum.add(m.prob(h, w));
    worst = std::max(worst, std::abs(1.0 - sum.value()));
  }
  return worst;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("tokensel-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace tokensel::testing
