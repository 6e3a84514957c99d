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
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tokensel/context_trie.hpp"
#include "tokensel/corpus_io.hpp"
#include "tokensel/error.hpp"

namespace tokensel {

// Sentinels sit just above the codebook range: EOS = vocab, BOS = vocab + 1.
inline constexpr Token eos_token(Token vocab_size) { return vocab_size; }
inline constexpr Token bos_token(Token vocab_size) { return vocab_size + 1; }

inline void check_order(int order) {
  if (order < 1 || order > 16) throw ArgumentError("n-gram order must be in [1, 16]");
}

struct NgramCount {
  std::uint64_t raw = 0;
  std::uint64_t adjusted = 0;  // distinct left extensions; 0 at the top order
  friend bool operator==(const NgramCount&, const NgramCount&) = default;
};

class NgramCounts;

// Streaming n-gram counter. Each sequence is padded with order-1 BOS tokens
// and one EOS; every n-gram (n <= order) not ending in BOS is counted.
// Counters over disjoint shards can be merged; addition commutes, so the
// result does not depend on stream order or sharding.
class NgramCounter {
 public:
  NgramCounter(int order, Token vocab_size) : order_(order), vocab_(vocab_size) {
    check_order(order);
    if (vocab_size == 0 || vocab_size > kMaxVocab) throw ArgumentError("invalid vocab size");
  }

  int order() const noexcept { return order_; }
  Token vocab_size() const noexcept { return vocab_; }

  void add(std::span<const Token> sequence) {
    for (Token t : sequence)
      if (t >= vocab_)
        throw ValidationError("token " + std::to_string(t) + " outside vocab of size " + std::to_string(vocab_));
    std::vector<Token> padded(order_ - 1, bos_token(vocab_));
    padded.insert(padded.end(), sequence.begin(), sequence.end());
    padded.push_back(eos_token(vocab_));
    for (std::size_t e = order_ - 1; e < padded.size(); ++e) {
      const Token w = padded[e];
      auto node = ContextTrie::kRoot;
      for (int n = 1; n <= order_; ++n) {
        if (n > 1) node = trie_.child_or_add(node, padded[e - (n - 1)]);
        bump(node, w, 1);
      }
    }
  }

  void add(const TokenSequence& seq) { add(std::span<const Token>(seq.tokens)); }

  void merge(const NgramCounter& other) {
    if (other.order_ != order_ || other.vocab_ != vocab_)
      throw ArgumentError("cannot merge counters of different order or vocab");
    for (const auto& e : other.entries_) {
      const auto context = other.trie_.tokens(e.node);
      bump(trie_.insert(context), e.word, e.raw);
    }
  }

  NgramCounts finish() const;

 private:
  friend class NgramCounts;
  struct Entry {
    ContextTrie::NodeId node;
    Token word;
    std::uint64_t raw;
  };

  void bump(ContextTrie::NodeId node, Token w, std::uint64_t by) {
    auto [it, inserted] = index_.try_emplace(ContextTrie::key(node, w), entries_.size());
    if (inserted) entries_.push_back({node, w, 0});
    entries_[it->second].raw += by;
  }

  int order_;
  Token vocab_;
  ContextTrie trie_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::vector<Entry> entries_;
};

// Finished counts: raw counts for every order, continuation ("adjusted")
// counts for orders below the top, and count-of-counts n1..n4 per order
// taken over the counts Kneser-Ney uses at that order.
class NgramCounts {
 public:
  using NodeId = ContextTrie::NodeId;

  struct Entry {
    NodeId node;  // context
    Token word;
    NgramCount count;
  };

  int order() const noexcept { return order_; }
  Token vocab_size() const noexcept { return vocab_; }
  Token eos() const noexcept { return eos_token(vocab_); }
  Token bos() const noexcept { return bos_token(vocab_); }
  std::uint64_t sequences() const noexcept { return sequences_; }
  const ContextTrie& trie() const noexcept { return trie_; }
  std::span<const Entry> entries() const noexcept { return entries_; }

  // Raw (n == order) or continuation (n < order) count used by Kneser-Ney.
  std::uint64_t kn_count(const Entry& e) const {
    return trie_.depth(e.node) + 1 == static_cast<std::uint32_t>(order_) ? e.count.raw : e.count.adjusted;
  }

  std::optional<NgramCount> find(std::span<const Token> ngram) const {
    if (ngram.empty() || ngram.size() > static_cast<std::size_t>(order_)) return std::nullopt;
    auto node = trie_.find(ngram.first(ngram.size() - 1));
    if (!node) return std::nullopt;
    auto it = index_.find(ContextTrie::key(*node, ngram.back()));
    if (it == index_.end()) return std::nullopt;
    return entries_[it->second].count;
  }

  std::uint64_t raw(std::span<const Token> ngram) const {
    auto c = find(ngram);
    return c ? c->raw : 0;
  }
  std::uint64_t adjusted(std::span<const Token> ngram) const {
    auto c = find(ngram);
    return c ? c->adjusted : 0;
  }

  std::optional<std::size_t> index_of(NodeId node, Token w) const {
    auto it = index_.find(ContextTrie::key(node, w));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // n1..n4 of order n.
  const std::array<std::uint64_t, 4>& count_of_counts(int n) const { return coc_.at(n - 1); }

  std::size_t size(int n) const {
    std::size_t k = 0;
    for (const auto& e : entries_)
      if (trie_.depth(e.node) + 1 == static_cast<std::uint32_t>(n)) ++k;
    return k;
  }

  // All n-grams of order n with their counts, sorted by token tuple.
  std::vector<std::pair<std::vector<Token>, NgramCount>> sorted(int n) const {
    std::vector<std::pair<std::vector<Token>, NgramCount>> out;
    for (const auto& e : entries_) {
      if (trie_.depth(e.node) + 1 != static_cast<std::uint32_t>(n)) continue;
      auto tokens = trie_.tokens(e.node);
      tokens.push_back(e.word);
      out.emplace_back(std::move(tokens), e.count);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
  }

  friend bool operator==(const NgramCounts& a, const NgramCounts& b) {
    if (a.order_ != b.order_ || a.vocab_ != b.vocab_ || a.coc_ != b.coc_) return false;
    for (int n = 1; n <= a.order_; ++n)
      if (a.sorted(n) != b.sorted(n)) return false;
    return true;
  }

 private:
  friend class NgramCounter;
  int order_ = 0;
  Token vocab_ = 0;
  std::uint64_t sequences_ = 0;
  ContextTrie trie_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::vector<Entry> entries_;
  std::vector<std::array<std::uint64_t, 4>> coc_;
};

inline NgramCounts NgramCounter::finish() const {
  NgramCounts c;
  c.order_ = order_;
  c.vocab_ = vocab_;
  c.trie_ = trie_;
  c.index_ = index_;
  c.entries_.reserve(entries_.size());
  for (const auto& e : entries_) {
    c.entries_.push_back({e.node, e.word, {e.raw, 0}});
    if (trie_.depth(e.node) == 0 && e.word == eos_token(vocab_)) c.sequences_ = e.raw;
  }
  // Each stored (x h, w) is one distinct left extension of (h, w).
  for (const auto& e : c.entries_) {
    if (e.node == ContextTrie::kRoot) continue;
    auto it = c.index_.find(ContextTrie::key(trie_.parent(e.node), e.word));
    ++c.entries_[it->second].count.adjusted;
  }
  c.coc_.assign(order_, {0, 0, 0, 0});
  for (const auto& e : c.entries_) {
    const auto k = c.kn_count(e);
    if (k >= 1 && k <= 4) ++c.coc_[trie_.depth(e.node)][k - 1];
  }
  return c;
}

inline NgramCounts count(std::span<const TokenSequence> sequences, int order, Token vocab_size) {
  NgramCounter counter(order, vocab_size);
  for (const auto& s : sequences) counter.add(s);
  return counter.finish();
}

}  // namespace tokensel
