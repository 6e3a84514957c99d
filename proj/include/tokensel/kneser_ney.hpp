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

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "tokensel/error.hpp"
#include "tokensel/ngram_counts.hpp"
#include "tokensel/ngram_model.hpp"

namespace tokensel {

// Modified Kneser-Ney discounts from count-of-counts n1..n4:
//   Y = n1 / (n1 + 2 n2)
//   D1 = 1 - 2Y n2/n1,  D2 = 2 - 3Y n3/n2,  D3+ = 3 - 4Y n4/n3
// When a ratio is undefined or a discount leaves (0, k] the order falls back
// to a flat 0.5 and a warning is recorded.
inline Discounts modified_kn_discounts(const std::array<std::uint64_t, 4>& n, int order,
                                       Warnings* warnings = nullptr) {
  Discounts d;
  d.count_of_counts = n;
  const double n1 = double(n[0]), n2 = double(n[1]), n3 = double(n[2]), n4 = double(n[3]);
  bool ok = n1 > 0 && n2 > 0 && n3 > 0;
  if (ok) {
    const double y = n1 / (n1 + 2 * n2);
    d.d1 = 1 - 2 * y * n2 / n1;
    d.d2 = 2 - 3 * y * n3 / n2;
    d.d3 = 3 - 4 * y * n4 / n3;
    ok = d.d1 > 0 && d.d1 <= 1 && d.d2 > 0 && d.d2 <= 2 && d.d3 > 0 && d.d3 <= 3;
  }
  if (!ok) {
    d.d1 = d.d2 = d.d3 = 0.5;
    d.fallback = true;
    warn(warnings, "kn-discount-fallback",
         "order " + std::to_string(order) + ": count-of-counts (" + std::to_string(n[0]) + ", " +
             std::to_string(n[1]) + ", " + std::to_string(n[2]) + ", " + std::to_string(n[3]) +
             ") give no valid modified Kneser-Ney discounts; using absolute discount 0.5");
  }
  return d;
}

// Interpolated modified Kneser-Ney over a closed vocabulary. For a context h
// with continuations at order n (count c = raw at the top order, number of
// distinct left extensions below it):
//   p(w|h)   = (c(h w) - D(c)) / S(h) + gamma(h) p(w|h')
//   gamma(h) = (D1 N1(h) + D2 N2(h) + D3 N3+(h)) / S(h)
// bottoming out in the uniform distribution over vocab and EOS. gamma(h) is
// exactly the back-off weight of h, so the stored model answers queries with
// the plain back-off recursion.
inline NgramModel estimate(const NgramCounts& counts, Warnings* warnings = nullptr) {
  if (counts.sequences() == 0) throw ArgumentError("cannot estimate a model from zero sequences");
  const int order = counts.order();
  const Token vocab = counts.vocab_size();
  const auto& trie = counts.trie();
  const auto entries = counts.entries();

  std::vector<Discounts> discounts;
  for (int n = 1; n <= order; ++n) discounts.push_back(modified_kn_discounts(counts.count_of_counts(n), n, warnings));

  // Group entries by context node, orders ascending so lower-order
  // probabilities exist before they are interpolated into.
  std::vector<std::size_t> by_context(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) by_context[i] = i;
  std::sort(by_context.begin(), by_context.end(), [&](std::size_t a, std::size_t b) {
    const auto da = trie.depth(entries[a].node), db = trie.depth(entries[b].node);
    if (da != db) return da < db;
    if (entries[a].node != entries[b].node) return entries[a].node < entries[b].node;
    return entries[a].word < entries[b].word;
  });

  NgramModel model(order, vocab);
  std::vector<double> prob(entries.size(), 0.0);
  const double uniform = 1.0 / (double(vocab) + 1.0);
  double root_gamma = 0;

  for (std::size_t begin = 0; begin < by_context.size();) {
    const auto node = entries[by_context[begin]].node;
    std::size_t end = begin;
    std::uint64_t total = 0, n1 = 0, n2 = 0, n3 = 0;
    for (; end < by_context.size() && entries[by_context[end]].node == node; ++end) {
      const auto c = counts.kn_count(entries[by_context[end]]);
      total += c;
      n1 += c == 1;
      n2 += c == 2;
      n3 += c >= 3;
    }
    const int n = static_cast<int>(trie.depth(node)) + 1;
    const auto& d = discounts[n - 1];
    const double s = double(total);
    const double gamma = (d.d1 * double(n1) + d.d2 * double(n2) + d.d3 * double(n3)) / s;

    auto context = trie.tokens(node);
    if (node != ContextTrie::kRoot) model.set_log10_backoff(context, std::log10(gamma));
    else root_gamma = gamma;
    context.push_back(0);
    for (std::size_t k = begin; k < end; ++k) {
      const auto idx = by_context[k];
      const auto& e = entries[idx];
      double lower = uniform;
      if (node != ContextTrie::kRoot) lower = prob[*counts.index_of(trie.parent(node), e.word)];
      const auto c = counts.kn_count(e);
      prob[idx] = (double(c) - d.for_count(c)) / s + gamma * lower;
      context.back() = e.word;
      model.set_log10_prob(context, std::log10(prob[idx]));
    }
    begin = end;
  }

  // Closed vocabulary: tokens never seen still get unigram mass.
  for (Token w = 0; w <= eos_token(vocab); ++w) {
    const Token g[1] = {w};
    if (!counts.index_of(ContextTrie::kRoot, w)) model.set_log10_prob(g, std::log10(root_gamma * uniform));
  }
  model.set_discounts(std::move(discounts));
  return model;
}

}  // namespace tokensel
