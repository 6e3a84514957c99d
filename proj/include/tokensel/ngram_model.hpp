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
#include <numbers>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "tokensel/context_trie.hpp"
#include "tokensel/corpus_io.hpp"
#include "tokensel/error.hpp"
#include "tokensel/exact_sum.hpp"
#include "tokensel/ngram_counts.hpp"

namespace tokensel {

// log10 of zero probability, as written in ARPA files.
inline constexpr double kLog10Zero = -99.0;

// Discounts applied to counts 1, 2 and 3+ at one order.
struct Discounts {
  double d1 = 0.5, d2 = 0.5, d3 = 0.5;
  std::array<std::uint64_t, 4> count_of_counts{};
  bool fallback = false;

  double for_count(std::uint64_t c) const { return c == 0 ? 0.0 : c == 1 ? d1 : c == 2 ? d2 : d3; }
};

struct NgramRecord {
  std::vector<Token> tokens;
  std::optional<double> log10_prob;  // absent for context-only entries such as <s>
  std::optional<double> log10_backoff;
};

// Back-off n-gram model. Probabilities are stored as log10 under their
// context node; back-off weights (log10) live on context nodes. Queries use
// the back-off recursion P(w|h) = p(h w) if stored, else bow(h) P(w|h'),
// with bow(h) = 1 for contexts that are not stored.
class NgramModel {
 public:
  using NodeId = ContextTrie::NodeId;

  NgramModel(int order, Token vocab_size) : order_(order), vocab_(vocab_size) {
    check_order(order);
    if (vocab_size == 0 || vocab_size > kMaxVocab) throw ArgumentError("invalid vocab size");
    bows_.push_back(std::nullopt);
  }

  int order() const noexcept { return order_; }
  Token vocab_size() const noexcept { return vocab_; }
  Token eos() const noexcept { return eos_token(vocab_); }
  Token bos() const noexcept { return bos_token(vocab_); }

  // Per-order discounts when estimated here; empty for models read from ARPA.
  const std::vector<Discounts>& discounts() const noexcept { return discounts_; }

  // ---- construction (used by the estimator and the ARPA reader)

  void set_log10_prob(std::span<const Token> ngram, double log10_prob) {
    check_ngram(ngram);
    if (ngram.back() == bos()) throw ArgumentError("BOS cannot be predicted");
    const auto node = insert(ngram.first(ngram.size() - 1));
    auto [it, inserted] = probs_.try_emplace(ContextTrie::key(node, ngram.back()), log10_prob);
    if (inserted)
      ++counts_[ngram.size() - 1];
    else
      it->second = log10_prob;
  }

  void set_log10_backoff(std::span<const Token> context, double log10_bow) {
    check_ngram(context);
    if (context.size() >= static_cast<std::size_t>(order_))
      throw ArgumentError("back-off weight on a top-order n-gram");
    bows_[insert(context)] = log10_bow;
  }

  void set_discounts(std::vector<Discounts> d) { discounts_ = std::move(d); }

  // ---- queries

  std::optional<double> stored_log10_prob(std::span<const Token> ngram) const {
    if (ngram.empty() || ngram.size() > static_cast<std::size_t>(order_)) return std::nullopt;
    auto node = trie_.find(ngram.first(ngram.size() - 1));
    if (!node) return std::nullopt;
    auto it = probs_.find(ContextTrie::key(*node, ngram.back()));
    if (it == probs_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<double> stored_log10_backoff(std::span<const Token> context) const {
    auto node = trie_.find(context);
    if (!node || context.empty()) return std::nullopt;
    return bows_[*node];
  }

  // log10 P(word | history); only the last order-1 history tokens matter.
  double log10_prob(std::span<const Token> history, Token word) const {
    if (word > eos()) throw ArgumentError("query word outside vocab");
    const std::size_t ctx = std::min<std::size_t>(history.size(), order_ - 1);
    NodeId node = ContextTrie::kRoot;
    auto it = probs_.find(ContextTrie::key(node, word));
    double best = it == probs_.end() ? kLog10Zero : it->second;
    double backoff = 0;
    for (std::size_t j = 1; j <= ctx; ++j) {
      auto next = trie_.child(node, history[history.size() - j]);
      if (!next) break;
      node = *next;
      auto p = probs_.find(ContextTrie::key(node, word));
      if (p != probs_.end()) {
        best = p->second;
        backoff = 0;
      } else if (bows_[node]) {
        backoff += *bows_[node];
      }
    }
    return best + backoff;
  }

  double prob(std::span<const Token> history, Token word) const {
    return std::pow(10.0, log10_prob(history, word));
  }

  // Natural-log probability of the tokens of `seq` given order-1 BOS of
  // history. The EOS event is included only on request.
  double logprob(std::span<const Token> seq, bool include_eos = false) const {
    if (seq.empty()) throw ArgumentError("logprob of an empty sequence");
    std::vector<Token> padded(order_ - 1, bos());
    padded.reserve(padded.size() + seq.size() + 1);
    for (Token t : seq) {
      if (t >= vocab_) throw ValidationError("token " + std::to_string(t) + " outside vocab");
      padded.push_back(t);
    }
    if (include_eos) padded.push_back(eos());
    ExactSum sum;
    for (std::size_t i = order_ - 1; i < padded.size(); ++i)
      sum.add(log10_prob(std::span<const Token>(padded).first(i), padded[i]));
    return sum.value() * std::numbers::ln10;
  }

  double logprob(const TokenSequence& seq, bool include_eos = false) const {
    return logprob(std::span<const Token>(seq.tokens), include_eos);
  }

  // Stored n-grams of order n plus context-only entries, sorted by tokens.
  std::vector<NgramRecord> ngrams(int n) const {
    std::vector<NgramRecord> out;
    for (const auto& [key, lp] : probs_) {
      const auto node = static_cast<NodeId>(key >> 32);
      if (trie_.depth(node) + 1 != static_cast<std::uint32_t>(n)) continue;
      NgramRecord r;
      r.tokens = trie_.tokens(node);
      r.tokens.push_back(static_cast<Token>(key & 0xFFFFFFFFu));
      r.log10_prob = lp;
      if (auto c = trie_.find(r.tokens)) r.log10_backoff = bows_[*c];
      out.push_back(std::move(r));
    }
    // Contexts whose own n-gram has no probability (e.g. <s>).
    for (NodeId node = 1; node < trie_.size(); ++node) {
      if (trie_.depth(node) != static_cast<std::uint32_t>(n) || !bows_[node]) continue;
      auto tokens = trie_.tokens(node);
      if (stored_log10_prob(tokens)) continue;
      out.push_back({std::move(tokens), std::nullopt, bows_[node]});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.tokens < b.tokens; });
    return out;
  }

  // Contexts carrying a back-off weight (every context with stored
  // continuations in an estimated model), oldest token first.
  std::vector<std::vector<Token>> contexts() const {
    std::vector<std::vector<Token>> out;
    for (NodeId node = 0; node < trie_.size(); ++node)
      if (node == ContextTrie::kRoot || bows_[node]) out.push_back(trie_.tokens(node));
    std::sort(out.begin(), out.end());
    return out;
  }

  std::size_t num_probs(int n) const { return counts_.at(n - 1); }

 private:
  void check_ngram(std::span<const Token> ngram) const {
    if (ngram.empty() || ngram.size() > static_cast<std::size_t>(order_))
      throw ArgumentError("n-gram length outside [1, order]");
    for (Token t : ngram)
      if (t > bos()) throw ArgumentError("n-gram token outside vocab");
  }

  NodeId insert(std::span<const Token> context) {
    const auto node = trie_.insert(context);
    if (bows_.size() < trie_.size()) bows_.resize(trie_.size());
    return node;
  }

  int order_;
  Token vocab_;
  ContextTrie trie_;
  std::unordered_map<std::uint64_t, double> probs_;
  std::vector<std::optional<double>> bows_;
  std::vector<std::size_t> counts_ = std::vector<std::size_t>(16, 0);
  std::vector<Discounts> discounts_;
};

// Per-token perplexity over `sequences`, EOS excluded.
inline double perplexity(const NgramModel& model, std::span<const TokenSequence> sequences) {
  ExactSum lp;
  std::size_t tokens = 0;
  for (const auto& s : sequences) {
    lp.add(model.logprob(s));
    tokens += s.tokens.size();
  }
  if (tokens == 0) throw ArgumentError("perplexity over no tokens");
  return std::exp(-lp.value() / double(tokens));
}

}  // namespace tokensel
