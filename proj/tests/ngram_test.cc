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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "test_util.hpp"
#include "tokensel/arpa.hpp"
#include "tokensel/kneser_ney.hpp"
#include "tokensel/ngram_counts.hpp"
#include "tokensel/synthbench.hpp"

namespace tokensel {
namespace {

using testing::sequences;
using Gram = std::vector<Token>;

constexpr Token a = 0, b = 1, c = 2;

NgramModel train(const std::vector<std::vector<Token>>& corpus, int order, Token vocab, Warnings* w = nullptr) {
  return estimate(count(sequences(corpus), order, vocab), w);
}

TEST(Count, SingleTokenOrderOne) {
  const auto counts = count(sequences({{a}}), 1, 2);
  const auto got = counts.sorted(1);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].first, Gram{a});
  EXPECT_EQ(got[0].second.raw, 1u);
  EXPECT_EQ(got[1].first, Gram{eos_token(2)});
  EXPECT_EQ(got[1].second.raw, 1u);
  EXPECT_EQ(counts.sequences(), 1u);
}

TEST(Count, BigramsWithPadding) {
  const Token V = 2;
  const auto counts = count(sequences({{a, b}}), 2, V);
  const auto got = counts.sorted(2);
  ASSERT_EQ(got.size(), 3u);
  std::vector<Gram> grams;
  for (const auto& [g, n] : got) {
    EXPECT_EQ(n.raw, 1u);
    grams.push_back(g);
  }
  std::vector<Gram> want{{bos_token(V), a}, {a, b}, {b, eos_token(V)}};
  std::sort(want.begin(), want.end());
  EXPECT_EQ(grams, want);
}

TEST(Count, MatchesNaiveRecount) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Token V = 10;
    const int order = 1 + trial % 4;
    std::vector<std::vector<Token>> corpus(100);
    for (auto& s : corpus) {
      s.resize(1 + rng() % 12);
      for (auto& t : s) t = rng() % V;
    }
    const auto counts = count(sequences(corpus), order, V);
    const auto naive = oracle::naive_counts(corpus, order, V);
    std::map<Gram, std::uint64_t> got;
    for (int n = 1; n <= order; ++n)
      for (const auto& [g, k] : counts.sorted(n)) got[g] = k.raw;
    EXPECT_EQ(got, naive) << "order " << order;
  }
}

TEST(Count, LowerOrderEqualsSumOfExtensions) {
  std::mt19937_64 rng(11);
  const Token V = 6;
  const int order = 3;
  auto seqs = testing::random_corpus(rng, V, 40, 10);
  const auto counts = count(seqs, order, V);
  for (int n = 1; n < order; ++n) {
    std::map<Gram, std::uint64_t> ext;
    for (const auto& [g, k] : counts.sorted(n + 1))
      ext[Gram(g.begin(), g.end() - 1)] += k.raw;
    for (const auto& [g, k] : counts.sorted(n)) {
      EXPECT_GE(k.raw, 1u);
      const std::uint64_t final_occurrences = g.back() == counts.eos() ? k.raw : 0;
      EXPECT_EQ(k.raw, ext[g] + final_occurrences);
    }
  }
}

TEST(Count, StreamOrderInvariant) {
  std::mt19937_64 rng(3);
  auto seqs = testing::random_corpus(rng, 8, 50, 15);
  const auto base = count(seqs, 3, 8);
  std::ostringstream base_arpa;
  write_arpa(estimate(base), base_arpa);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(seqs.begin(), seqs.end(), rng);
    const auto again = count(seqs, 3, 8);
    EXPECT_TRUE(again == base);
    std::ostringstream arpa;
    write_arpa(estimate(again), arpa);
    EXPECT_EQ(arpa.str(), base_arpa.str());
  }
}

TEST(Count, ShardMergeEqualsSinglePass) {
  std::mt19937_64 rng(5);
  const auto seqs = testing::random_corpus(rng, 8, 50, 15);
  NgramCounter whole(4, 8), left(4, 8), right(4, 8);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    whole.add(seqs[i]);
    (i % 3 == 0 ? left : right).add(seqs[i]);
  }
  right.merge(left);
  EXPECT_TRUE(right.finish() == whole.finish());
}

TEST(Count, Errors) {
  EXPECT_THROW(count(sequences({{a, 5}}), 2, 5), ValidationError);
  EXPECT_THROW(count(sequences({{a}}), 0, 5), ArgumentError);
  NgramCounter x(2, 4), y(3, 4);
  EXPECT_THROW(x.merge(y), ArgumentError);
  EXPECT_THROW(estimate(count(std::vector<TokenSequence>{}, 2, 4)), ArgumentError);
}

TEST(Estimate, RepeatedTokenNormalizes) {
  const auto m = train({{a, a, a}}, 1, 1);
  EXPECT_NEAR(m.prob({}, a) + m.prob({}, m.eos()), 1.0, 1e-12);
  // c(a)=3, c(EOS)=1, discounts fall back to 0.5, gamma = 1/4:
  // P(a) = 2.5/4 + 1/4 * 1/2.
  EXPECT_NEAR(m.prob({}, a), 0.75, 1e-12);
}

TEST(Estimate, SymmetricCounts) {
  const auto m = train({{a, b}, {b, a}}, 2, 2);
  EXPECT_DOUBLE_EQ(m.prob({}, a), m.prob({}, b));
  const Gram bos{m.bos()};
  EXPECT_DOUBLE_EQ(m.prob(bos, a), m.prob(bos, b));
  EXPECT_DOUBLE_EQ(m.prob(Gram{a}, b), m.prob(Gram{b}, a));
}

TEST(Estimate, ThreeSentenceCorpusMatchesOracle) {
  const std::vector<std::vector<Token>> corpus{{a, b}, {a, c}, {b, a}};
  Warnings w;
  const auto m = train(corpus, 2, 3, &w);
  const oracle::KneserNey kn(corpus, 2, 3);
  EXPECT_LT(oracle::kn_max_error(m, kn, 2, 3), 1e-9);
  // Unigram continuation counts are a:2 b:2 c:1 </s>:3, so that order gets
  // real discounts; every bigram occurs once and falls back.
  EXPECT_FALSE(m.discounts()[0].fallback);
  EXPECT_NEAR(m.discounts()[0].d1, 0.2, 1e-15);
  EXPECT_TRUE(m.discounts()[1].fallback);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].code, "kn-discount-fallback");
}

TEST(Estimate, RandomCorporaMatchOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const Token V = 2 + rng() % 15;
    const int order = 1 + trial % 3;
    const auto seqs = testing::random_corpus(rng, V, 50, 20);
    const auto m = estimate(count(seqs, order, V));
    const oracle::KneserNey kn(testing::plain(seqs), order, V);
    EXPECT_LT(oracle::kn_max_error(m, kn, order, V), 1e-9) << "trial " << trial;
  }
}

TEST(Estimate, DiscountsFromCountOfCounts) {
  const auto d = modified_kn_discounts({10, 4, 2, 1}, 2);
  const double y = 10.0 / 18.0;
  EXPECT_FALSE(d.fallback);
  EXPECT_DOUBLE_EQ(d.d1, 1 - 2 * y * 4 / 10);
  EXPECT_DOUBLE_EQ(d.d2, 2 - 3 * y * 2 / 4);
  EXPECT_DOUBLE_EQ(d.d3, 3 - 4 * y * 1 / 2);
  Warnings w;
  const auto f = modified_kn_discounts({3, 1, 0, 0}, 1, &w);
  EXPECT_TRUE(f.fallback);
  EXPECT_EQ(f.d1, 0.5);
  EXPECT_EQ(f.d3, 0.5);
  EXPECT_EQ(w.size(), 1u);
}

TEST(Estimate, NormalizedAndInRange) {
  const auto src = MarkovSource::random_sparse(24, 5, 9);
  std::mt19937_64 rng(1);
  std::vector<std::vector<Token>> corpus;
  for (int i = 0; i < 200; ++i) corpus.push_back(src.sample(60, rng));
  for (int order : {1, 2, 3, 5}) {
    const auto m = train(corpus, order, 24);
    EXPECT_LT(testing::max_normalization_error(m), 1e-9) << "order " << order;
    for (int n = 1; n <= order; ++n)
      for (const auto& r : m.ngrams(n)) {
        if (r.log10_prob) {
          EXPECT_LE(*r.log10_prob, 0.0);
          EXPECT_TRUE(std::isfinite(*r.log10_prob));
        }
        if (r.log10_backoff) {
          EXPECT_TRUE(std::isfinite(*r.log10_backoff));
        }
      }
  }
}

TEST(Estimate, PerplexityFallsWithMoreData) {
  const std::vector<std::size_t> sizes{8, 16, 32, 64, 128};
  std::vector<std::vector<double>> ppl(sizes.size());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto src = MarkovSource::random_sparse(16, 4, 100 + seed);
    std::mt19937_64 rng(seed);
    std::vector<TokenSequence> held;
    for (int i = 0; i < 50; ++i) held.push_back({"h", src.sample(40, rng)});
    std::vector<TokenSequence> train_seqs;
    for (std::size_t i = 0; i < sizes.back(); ++i) train_seqs.push_back({"t", src.sample(40, rng)});
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      const auto m = estimate(count(std::span(train_seqs).first(sizes[k]), 3, 16));
      ppl[k].push_back(perplexity(m, held));
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2;
  };
  for (std::size_t k = 1; k < sizes.size(); ++k) EXPECT_LE(median(ppl[k]), median(ppl[k - 1])) << sizes[k];
}

TEST(Logprob, UniformOrderOne) {
  const Token V = 7;
  NgramModel m(1, V);
  for (Token w = 0; w <= V; ++w) {
    const Gram g{w};
    m.set_log10_prob(g, std::log10(1.0 / (V + 1)));
  }
  const std::vector<Token> q{0, 3, 6, 6, 1};
  EXPECT_NEAR(m.logprob(q), 5 * std::log(1.0 / (V + 1)), 1e-12);
}

TEST(Logprob, SingleTokenVocab) {
  const auto m = train({{a, a, a}}, 1, 1);
  EXPECT_NEAR(m.logprob(std::vector<Token>{a, a}), 2 * std::log(0.75), 1e-12);
}

TEST(Logprob, MatchesNaiveBackoff) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const Token V = 2 + rng() % 10;
    const int order = 1 + trial % 4;
    const auto m = estimate(count(testing::random_corpus(rng, V, 30, 12), order, V));
    for (int k = 0; k < 10; ++k) {
      std::vector<Token> q(1 + rng() % 20);
      for (auto& t : q) t = rng() % V;
      EXPECT_NEAR(m.logprob(q), oracle::naive_logprob(m, q), 1e-10);
    }
  }
}

TEST(Logprob, EndOfUtteranceAddsOneTerm) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Token V = 2 + rng() % 8;
    const int order = 1 + trial % 4;
    const auto m = estimate(count(testing::random_corpus(rng, V, 30, 12), order, V));
    std::vector<Token> q(1 + rng() % 15);
    for (auto& t : q) t = rng() % V;
    oracle::Gram history(order - 1, m.bos());
    history.insert(history.end(), q.begin(), q.end());
    const double eos_term = oracle::backoff_log10(m, history, m.eos()) * std::numbers::ln10;
    EXPECT_NEAR(m.logprob(q, true), oracle::naive_logprob(m, q) + eos_term, 1e-10);
    EXPECT_LT(m.logprob(q, true), m.logprob(q));
  }
}

TEST(Logprob, Errors) {
  const auto m = train({{a, b}}, 2, 2);
  EXPECT_THROW(m.logprob(std::vector<Token>{}), ArgumentError);
  EXPECT_THROW(m.logprob(std::vector<Token>{a, 2}), ValidationError);
}

TEST(Logprob, OrderOneDoublingIsExact) {
  std::mt19937_64 rng(4);
  const auto m = estimate(count(testing::random_corpus(rng, 9, 40, 20), 1, 9));
  for (int k = 0; k < 50; ++k) {
    std::vector<Token> q(1 + rng() % 30);
    for (auto& t : q) t = rng() % 9;
    auto qq = q;
    qq.insert(qq.end(), q.begin(), q.end());
    EXPECT_EQ(m.logprob(qq) / double(qq.size()), m.logprob(q) / double(q.size()));
  }
}

TEST(Arpa, RoundTripThreeSentenceModel) {
  const auto m = train({{a, b}, {a, c}, {b, a}}, 2, 3);
  std::stringstream s;
  write_arpa(m, s);
  const auto r = read_arpa(s);
  EXPECT_EQ(r.order(), 2);
  EXPECT_EQ(r.vocab_size(), 3u);
  EXPECT_EQ(r.contexts(), m.contexts());
  for (int n = 1; n <= 2; ++n) {
    const auto x = m.ngrams(n), y = r.ngrams(n);
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_EQ(x[i].tokens, y[i].tokens);
      EXPECT_EQ(x[i].log10_prob.has_value(), y[i].log10_prob.has_value());
      if (x[i].log10_prob) {
        EXPECT_NEAR(*x[i].log10_prob, *y[i].log10_prob, 0.5e-7 + 1e-15);
      }
      EXPECT_EQ(x[i].log10_backoff.has_value(), y[i].log10_backoff.has_value());
      if (x[i].log10_backoff) {
        EXPECT_NEAR(*x[i].log10_backoff, *y[i].log10_backoff, 0.5e-7 + 1e-15);
      }
    }
  }
  for (Token h : {a, b, c, m.bos()})
    for (Token w : {a, b, c, m.eos()}) EXPECT_NEAR(m.log10_prob(Gram{h}, w), r.log10_prob(Gram{h}, w), 1e-6);
}

TEST(Arpa, WriteIsStableAcrossRoundTrip) {
  std::mt19937_64 rng(8);
  const auto m = estimate(count(testing::random_corpus(rng, 12, 40, 15), 3, 12));
  std::stringstream s1, s2;
  write_arpa(m, s1);
  const std::string text = s1.str();
  write_arpa(read_arpa(s1), s2);
  EXPECT_EQ(s2.str(), text);
  EXPECT_NE(text.find("<s>"), std::string::npos);
  EXPECT_NE(text.find("</s>"), std::string::npos);
}

NgramModel parse(const std::string& text) {
  std::istringstream in(text);
  return read_arpa(in);
}

TEST(Arpa, EmptyBodyIsFormatError) {
  EXPECT_THROW(parse(""), FormatError);
  EXPECT_THROW(parse("\\data\\\n\\end\\\n"), FormatError);
  EXPECT_THROW(parse("\\data\\\nngram 1=2\n\n\\end\\\n"), FormatError);
}

TEST(Arpa, CountMismatchReportsLine) {
  std::string text =
      "\\data\\\nngram 1=3\nngram 2=5\n\n\\1-grams:\n-0.5\t0\t-0.3\n-0.5\t</s>\n-99\t<s>\t-0.2\n\n\\2-grams:\n";
  for (const char* g : {"<s> 0", "0 0", "0 </s>", "<s> </s>"}) text += std::string("-0.1\t") + g + "\n";
  text += "\n\\end\\\n";
  try {
    parse(text);
    FAIL() << "expected a format error";
  } catch (const FormatError& e) {
    EXPECT_GT(e.line(), 0u);
  }
  EXPECT_THROW(parse("\\data\\\nngram 1=1\n\n\\1-grams:\n-0.5\tzz\n\n\\end\\\n"), FormatError);
  EXPECT_THROW(parse("\\data\\\nngram 1=1\n\n\\1-grams:\n-0.5\t0\n"), FormatError);
}

}  // namespace
}  // namespace tokensel
