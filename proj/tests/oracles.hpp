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

// Reference implementations used only by tests. Each one follows the
// textbook definition directly and shares no code path with the library
// routine it checks.

#include <cmath>
#include <array>
#include <algorithm>
#include <complex>
#include <limits>
#include <optional>
#include <cstdint>
#include <map>
#include <numbers>
#include <set>
#include <vector>

#include "tokensel/corpus_io.hpp"
#include "tokensel/ngram_model.hpp"

namespace tokensel::oracle {

// O(n^2) DFT by direct summation, with the signal zero-padded to n.
inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x, std::size_t n) {
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    long double re = 0, im = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      const long double angle = -2.0L * std::numbers::pi_v<long double> * (long double)((k * t) % n) / (long double)n;
      re += x[t] * std::cos(angle);
      im += x[t] * std::sin(angle);
    }
    out[k] = {double(re), double(im)};
  }
  return out;
}

// Kendall tau-b by enumerating every pair.
struct TauCounts {
  std::int64_t concordant = 0, discordant = 0, ties_a = 0, ties_b = 0, pairs = 0;
};

inline TauCounts tau_pairs(const std::vector<double>& a, const std::vector<double>& b) {
  TauCounts c;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      ++c.pairs;
      const bool ta = a[i] == a[j], tb = b[i] == b[j];
      if (ta) ++c.ties_a;
      if (tb) ++c.ties_b;
      if (ta || tb) continue;
      if ((a[i] < a[j]) == (b[i] < b[j]))
        ++c.concordant;
      else
        ++c.discordant;
    }
  return c;
}

inline std::optional<double> kendall_tau_b(const std::vector<double>& a, const std::vector<double>& b) {
  const auto c = tau_pairs(a, b);
  if (c.ties_a == c.pairs || c.ties_b == c.pairs) return std::nullopt;
  return double(c.concordant - c.discordant) / std::sqrt(double(c.pairs - c.ties_a) * double(c.pairs - c.ties_b));
}

using Gram = std::vector<Token>;

inline std::vector<Gram> padded_sentences(const std::vector<std::vector<Token>>& corpus, int order, Token vocab) {
  std::vector<Gram> out;
  for (const auto& s : corpus) {
    Gram p(order - 1, bos_token(vocab));
    p.insert(p.end(), s.begin(), s.end());
    p.push_back(eos_token(vocab));
    out.push_back(std::move(p));
  }
  return out;
}

// Nested-loop recount: every substring of length <= order of every padded
// sentence whose last token is not BOS.
inline std::map<Gram, std::uint64_t> naive_counts(const std::vector<std::vector<Token>>& corpus, int order,
                                                  Token vocab) {
  std::map<Gram, std::uint64_t> counts;
  for (const auto& p : padded_sentences(corpus, order, vocab))
    for (std::size_t i = 0; i < p.size(); ++i)
      for (int n = 1; n <= order && i + n <= p.size(); ++n) {
        Gram g(p.begin() + i, p.begin() + i + n);
        if (g.back() == bos_token(vocab)) continue;
        ++counts[g];
      }
  return counts;
}

// Interpolated modified Kneser-Ney evaluated straight from its definition.
class KneserNey {
 public:
  KneserNey(const std::vector<std::vector<Token>>& corpus, int order, Token vocab)
      : order_(order), vocab_(vocab), raw_(naive_counts(corpus, order, vocab)) {
    for (const auto& [h, c] : raw_)
      if (h.size() >= 2) left_[Gram(h.begin() + 1, h.end())].insert(h.front());
    for (int n = 1; n <= order_; ++n) {
      std::array<double, 4> nk{0, 0, 0, 0};
      for (const auto& [g, c] : raw_) {
        if (static_cast<int>(g.size()) != n) continue;
        const auto k = kn_count(g);
        if (k >= 1 && k <= 4) nk[k - 1] += 1;
      }
      std::array<double, 3> d{0.5, 0.5, 0.5};
      if (nk[0] > 0 && nk[1] > 0 && nk[2] > 0) {
        const double y = nk[0] / (nk[0] + 2 * nk[1]);
        const std::array<double, 3> cand{1 - 2 * y * nk[1] / nk[0], 2 - 3 * y * nk[2] / nk[1],
                                         3 - 4 * y * nk[3] / nk[2]};
        bool ok = true;
        for (int k = 0; k < 3; ++k) ok = ok && cand[k] > 0 && cand[k] <= k + 1;
        if (ok) d = cand;
      }
      discounts_.push_back(d);
    }
  }

  // c(g): raw count at the top order, else the number of distinct tokens x
  // for which x g occurs.
  std::uint64_t kn_count(const Gram& g) const {
    if (static_cast<int>(g.size()) == order_) {
      auto it = raw_.find(g);
      return it == raw_.end() ? 0 : it->second;
    }
    auto it = left_.find(g);
    return it == left_.end() ? 0 : it->second.size();
  }

  // Interpolated P(w | h) with |h| = n - 1.
  double prob(const Gram& h, Token w) const {
    const int n = static_cast<int>(h.size()) + 1;
    const double lower = h.empty() ? uniform() : prob(Gram(h.begin() + 1, h.end()), w);
    const auto [total, gamma] = context_stats(h);
    if (total == 0) return lower;
    Gram g = h;
    g.push_back(w);
    const double c = double(kn_count(g));
    const double d = discount(n, static_cast<std::uint64_t>(c));
    return std::max(c - d, 0.0) / total + gamma * lower;
  }

  // Interpolation weight of context h; nullopt when h has no continuations.
  std::optional<double> gamma(const Gram& h) const {
    const auto [total, g] = context_stats(h);
    if (total == 0) return std::nullopt;
    return g;
  }

  // All stored n-grams of order n (length n, last token not BOS).
  std::vector<Gram> ngrams(int n) const {
    std::vector<Gram> out;
    for (const auto& [g, c] : raw_)
      if (static_cast<int>(g.size()) == n) out.push_back(g);
    return out;
  }

  std::array<double, 3> discounts(int n) const { return discounts_.at(n - 1); }

 private:
  double uniform() const { return 1.0 / (double(vocab_) + 1.0); }

  double discount(int n, std::uint64_t c) const {
    if (c == 0) return 0;
    return discounts_[n - 1][std::min<std::uint64_t>(c, 3) - 1];
  }

  std::pair<double, double> context_stats(const Gram& h) const {
    const int n = static_cast<int>(h.size()) + 1;
    double total = 0, mass = 0;
    for (Token w = 0; w <= eos_token(vocab_); ++w) {
      Gram g = h;
      g.push_back(w);
      if (!raw_.count(g)) continue;
      const auto c = kn_count(g);
      total += double(c);
      mass += discount(n, c);
    }
    return {total, total == 0 ? 0.0 : mass / total};
  }

  int order_;
  Token vocab_;
  std::map<Gram, std::uint64_t> raw_;
  std::map<Gram, std::set<Token>> left_;
  std::vector<std::array<double, 3>> discounts_;
};

// Largest |log10 difference| between a model and the formula oracle over
// every stored probability and back-off weight. Structural disagreement
// (missing or extra entries) reports infinity.
inline double kn_max_error(const NgramModel& m, const KneserNey& kn, int order, Token vocab) {
  constexpr double kMismatch = std::numeric_limits<double>::infinity();
  double worst = 0;
  auto compare = [&](std::optional<double> got, double want) {
    if (!got) {
      worst = kMismatch;
      return;
    }
    worst = std::max(worst, std::abs(*got - want));
  };
  for (Token w = 0; w <= eos_token(vocab); ++w) compare(m.stored_log10_prob(Gram{w}), std::log10(kn.prob({}, w)));
  if (m.num_probs(1) != std::size_t(vocab) + 1) worst = kMismatch;

  std::set<Gram> contexts;
  for (int n = 2; n <= order; ++n) {
    const auto grams = kn.ngrams(n);
    if (m.num_probs(n) != grams.size()) worst = kMismatch;
    for (const auto& g : grams) {
      Gram h(g.begin(), g.end() - 1);
      compare(m.stored_log10_prob(g), std::log10(kn.prob(h, g.back())));
      contexts.insert(h);
    }
  }
  for (const auto& h : contexts) {
    const auto g = kn.gamma(h);
    if (!g) return kMismatch;
    compare(m.stored_log10_backoff(h), std::log10(*g));
  }
  if (m.contexts().size() != contexts.size() + 1) worst = kMismatch;
  return worst;
}

// Back-off recursion over a model's stored entries only:
//   P(w|h) = p(h w) if stored, else bow(h) P(w|h[1:]).
inline double backoff_log10(const NgramModel& m, Gram h, Token w) {
  if (static_cast<int>(h.size()) > m.order() - 1) h.erase(h.begin(), h.end() - (m.order() - 1));
  Gram g = h;
  g.push_back(w);
  if (auto p = m.stored_log10_prob(g)) return *p;
  if (h.empty()) return kLog10Zero;
  const double bow = m.stored_log10_backoff(h).value_or(0.0);
  return bow + backoff_log10(m, Gram(h.begin() + 1, h.end()), w);
}

// ln P(q) by the naive recursion, EOS excluded.
inline double naive_logprob(const NgramModel& m, const std::vector<Token>& q) {
  Gram history(m.order() - 1, m.bos());
  long double total = 0;
  for (Token t : q) {
    total += backoff_log10(m, history, t);
    history.push_back(t);
  }
  return double(total * std::numbers::ln10_v<long double>);
}

}  // namespace tokensel::oracle
