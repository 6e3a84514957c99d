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
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tokensel/corpus_io.hpp"
#include "tokensel/error.hpp"
#include "tokensel/exact_sum.hpp"
#include "tokensel/ngram_model.hpp"

namespace tokensel {

// Contrastive domain-relevance score of one utterance:
//   score = (ln P_target(q) - ln P_general(q)) / len(q)
struct DomainScore {
  std::string utterance_id;
  double score = 0;
  std::size_t len = 0;
  double logp_target = 0;
  double logp_general = 0;

  friend bool operator==(const DomainScore&, const DomainScore&) = default;
};

inline void check_compatible(const NgramModel& target, const NgramModel& general) {
  if (target.order() != general.order())
    throw ArgumentError("target and general models differ in order (" + std::to_string(target.order()) + " vs " +
                        std::to_string(general.order()) + ")");
  if (target.vocab_size() != general.vocab_size())
    throw ArgumentError("target and general models differ in vocab size (" + std::to_string(target.vocab_size()) +
                        " vs " + std::to_string(general.vocab_size()) + ")");
}

// len(q) counts the utterance's tokens whether or not EOS is scored.
inline DomainScore score(const TokenSequence& q, const NgramModel& target, const NgramModel& general,
                         bool include_eos = false) {
  check_compatible(target, general);
  if (q.tokens.empty()) throw ArgumentError("cannot score empty token sequence '" + q.utterance_id + "'");
  DomainScore s;
  s.utterance_id = q.utterance_id;
  s.len = q.tokens.size();
  s.logp_target = target.logprob(q, include_eos);
  s.logp_general = general.logprob(q, include_eos);
  s.score = (s.logp_target - s.logp_general) / double(s.len);
  return s;
}

// ---------------------------------------------------------------------------
// Budgeted selection.

struct Budget {
  enum class Kind { kFraction, kHours, kTopK, kThreshold };
  Kind kind = Kind::kFraction;
  double value = 0.06;
  bool closest = false;  // hour budgets: admit the overshooting item when that lands closer

  static Budget fraction(double f, bool closest = false) { return {Kind::kFraction, f, closest}; }
  static Budget hours(double h, bool closest = false) { return {Kind::kHours, h, closest}; }
  static Budget top_k(std::size_t k) { return {Kind::kTopK, double(k), false}; }
  static Budget threshold(double t) { return {Kind::kThreshold, t, false}; }

  void validate() const {
    if (!std::isfinite(value)) throw ArgumentError("budget must be finite");
    switch (kind) {
      case Kind::kFraction:
      case Kind::kHours:
        if (!(value > 0)) throw ArgumentError("budget must be positive");
        break;
      case Kind::kTopK:
        if (!(value >= 1) || value != std::floor(value)) throw ArgumentError("top-k budget must be a positive integer");
        break;
      case Kind::kThreshold:
        break;
    }
  }

  std::string describe() const {
    std::ostringstream os;
    os << std::setprecision(17);
    switch (kind) {
      case Kind::kFraction: os << "fraction=" << value; break;
      case Kind::kHours: os << "hours=" << value; break;
      case Kind::kTopK: os << "top_k=" << static_cast<std::uint64_t>(value); break;
      case Kind::kThreshold: os << "threshold=" << value; break;
    }
    if (closest) os << ",closest";
    return os.str();
  }
};

struct RankedEntry {
  std::string utterance_id;
  double score = 0;
  double duration_s = 0;
  bool selected = false;
};

struct SelectionManifest {
  std::vector<RankedEntry> entries;  // score descending, ties by id ascending
  Budget budget;
  std::optional<double> threshold_score;  // score of the last selected entry
  double pool_hours = 0;
  double selected_hours = 0;
  std::size_t selected_count = 0;
};

// Indices of `scores` in ranking order.
inline std::vector<std::size_t> rank_order(std::span<const DomainScore> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a].score != scores[b].score) return scores[a].score > scores[b].score;
    return scores[a].utterance_id < scores[b].utterance_id;
  });
  return idx;
}

// Greedy prefix of the ranking. Hour budgets stop before the first item that
// would overshoot (or take it under `closest` when that is nearer the budget).
inline SelectionManifest select(std::span<const DomainScore> scores, std::span<const double> durations_s,
                                const Budget& budget, Warnings* warnings = nullptr) {
  budget.validate();
  if (scores.empty()) throw ArgumentError("nothing to select from");
  if (durations_s.size() != scores.size()) throw ArgumentError("one duration per score required");
  for (const auto& s : scores)
    if (std::isnan(s.score)) throw ValidationError("NaN score for '" + s.utterance_id + "'");

  SelectionManifest m;
  m.budget = budget;
  const auto order = rank_order(scores);
  ExactSum pool;
  for (double d : durations_s) {
    if (!(d >= 0) || !std::isfinite(d)) throw ValidationError("durations must be finite and >= 0");
    pool.add(d);
  }
  const double pool_s = pool.value();
  m.pool_hours = pool_s / 3600.0;

  std::size_t take = 0;
  ExactSum taken;
  switch (budget.kind) {
    case Budget::Kind::kFraction:
    case Budget::Kind::kHours: {
      const double limit_s =
          budget.kind == Budget::Kind::kFraction ? budget.value * pool_s : budget.value * 3600.0;
      if (limit_s > pool_s) warn(warnings, "budget-exceeds-pool", "budget exceeds the pool; selecting everything");
      for (; take < order.size(); ++take) {
        ExactSum trial = taken;
        trial.add(durations_s[order[take]]);
        const double next = trial.value();
        if (next > limit_s) {
          if (budget.closest && next - limit_s < limit_s - taken.value()) {
            taken = trial;
            ++take;
          }
          break;
        }
        taken = trial;
      }
      break;
    }
    case Budget::Kind::kTopK: {
      const auto k = static_cast<std::size_t>(budget.value);
      if (k > order.size()) warn(warnings, "budget-exceeds-pool", "top-k exceeds the pool; selecting everything");
      take = std::min(k, order.size());
      break;
    }
    case Budget::Kind::kThreshold:
      while (take < order.size() && scores[order[take]].score >= budget.value) ++take;
      break;
  }

  ExactSum selected;
  m.entries.reserve(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto i = order[r];
    const bool chosen = r < take;
    m.entries.push_back({scores[i].utterance_id, scores[i].score, durations_s[i], chosen});
    if (chosen) selected.add(durations_s[i]);
  }
  m.selected_count = take;
  m.selected_hours = selected.value() / 3600.0;
  if (take > 0) m.threshold_score = scores[order[take - 1]].score;
  return m;
}

// ---------------------------------------------------------------------------
// Kendall tau-b in O(n log n) (Knight's algorithm). Returns nullopt when
// either list is entirely tied, where the coefficient is undefined.

namespace detail {

// Sorts v in place, returning the number of strict inversions.
inline std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& tmp, std::size_t lo,
                                      std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = count_inversions(v, tmp, lo, mid) + count_inversions(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += mid - i;
      tmp[k++] = v[j++];
    } else {
      tmp[k++] = v[i++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + lo, tmp.begin() + hi, v.begin() + lo);
  return inv;
}

inline std::uint64_t tied_pairs(const std::vector<double>& sorted) {
  std::uint64_t ties = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const std::uint64_t t = j - i;
    ties += t * (t - 1) / 2;
    i = j;
  }
  return ties;
}

}  // namespace detail

inline std::optional<double> kendall_tau(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("kendall_tau: rankings differ in length");
  if (a.size() < 2) throw ArgumentError("kendall_tau: need at least two items");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::isnan(a[i]) || std::isnan(b[i])) throw ArgumentError("kendall_tau: NaN value");

  const std::size_t n = a.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return a[x] != a[y] ? a[x] < a[y] : b[x] < b[y];
  });

  std::int64_t ties_a = 0, ties_joint = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && a[idx[j]] == a[idx[i]]) ++j;
    const std::int64_t t = j - i;
    ties_a += t * (t - 1) / 2;
    for (std::size_t k = i; k < j;) {
      std::size_t m = k;
      while (m < j && b[idx[m]] == b[idx[k]]) ++m;
      const std::int64_t u = m - k;
      ties_joint += u * (u - 1) / 2;
      k = m;
    }
    i = j;
  }

  std::vector<double> seq(n), tmp(n);
  for (std::size_t i = 0; i < n; ++i) seq[i] = b[idx[i]];
  const auto swaps = static_cast<std::int64_t>(detail::count_inversions(seq, tmp, 0, n));
  const auto ties_b = static_cast<std::int64_t>(detail::tied_pairs(seq));
  const std::int64_t pairs = static_cast<std::int64_t>(n) * (static_cast<std::int64_t>(n) - 1) / 2;

  if (ties_a == pairs || ties_b == pairs) return std::nullopt;
  const std::int64_t concordant_minus_discordant = pairs - ties_a - ties_b + ties_joint - 2 * swaps;
  return double(concordant_minus_discordant) / std::sqrt(double(pairs - ties_a) * double(pairs - ties_b));
}

// ---------------------------------------------------------------------------
// Score files (JSONL).

inline nlohmann::ordered_json to_json(const DomainScore& s) {
  nlohmann::ordered_json j;
  j["utterance_id"] = s.utterance_id;
  j["score"] = s.score;
  j["len"] = s.len;
  j["logp_target"] = s.logp_target;
  j["logp_general"] = s.logp_general;
  return j;
}

inline DomainScore parse_score(std::string_view text, std::size_t line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line);
  }
  try {
    DomainScore s;
    s.utterance_id = j.at("utterance_id").get<std::string>();
    s.score = j.at("score").get<double>();
    s.len = j.at("len").get<std::size_t>();
    s.logp_target = j.at("logp_target").get<double>();
    s.logp_general = j.at("logp_general").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad score record: ") + e.what(), line);
  }
}

inline void write_score_lines(std::ostream& out, std::span<const DomainScore> scores) {
  for (const auto& s : scores) out << to_json(s).dump() << '\n';
}

inline void write_scores(const std::string& path, std::span<const DomainScore> scores) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_score_lines(out, scores);
  out.flush();
  if (!out) throw IoError("write failed on '" + path + "'");
}

inline std::vector<DomainScore> read_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open score file '" + path + "'");
  std::vector<DomainScore> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_score(line, n));
  }
  return out;
}

// Selection manifest: pool utterances in ranking order with score/selected.
inline void write_selection_manifest(const std::string& path, const SelectionManifest& m,
                                     std::span<const Utterance> pool) {
  std::unordered_map<std::string, const Utterance*> by_id;
  for (const auto& u : pool) by_id.emplace(u.id, &u);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (const auto& e : m.entries) {
    auto it = by_id.find(e.utterance_id);
    if (it == by_id.end()) throw ValidationError("scored utterance '" + e.utterance_id + "' missing from manifest");
    auto j = to_json(*it->second);
    j["score"] = e.score;
    j["selected"] = e.selected;
    out << j.dump() << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed on '" + path + "'");
}

inline std::string selection_summary(const SelectionManifest& m) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "pool_utterances\t" << m.entries.size() << '\n'
     << "pool_hours\t" << m.pool_hours << '\n'
     << "budget\t" << m.budget.describe() << '\n'
     << "selected_utterances\t" << m.selected_count << '\n'
     << "selected_hours\t" << m.selected_hours << '\n'
     << "threshold_score\t";
  if (m.threshold_score)
    os << *m.threshold_score;
  else
    os << "none";
  os << '\n';
  return os.str();
}

// CSV with `bins` equal-width score bins over the observed range.
inline std::string score_histogram_csv(const SelectionManifest& m, std::size_t bins = 50) {
  if (bins == 0) throw ArgumentError("histogram needs at least one bin");
  std::ostringstream os;
  os << std::setprecision(10) << "bin_low,bin_high,count,selected\n";
  if (m.entries.empty()) return os.str();
  double lo = m.entries.back().score, hi = m.entries.front().score;
  if (hi == lo) hi = lo + 1;
  std::vector<std::size_t> count(bins, 0), chosen(bins, 0);
  for (const auto& e : m.entries) {
    auto b = static_cast<std::size_t>((e.score - lo) / (hi - lo) * double(bins));
    b = std::min(b, bins - 1);
    ++count[b];
    chosen[b] += e.selected;
  }
  for (std::size_t b = 0; b < bins; ++b)
    os << lo + (hi - lo) * double(b) / double(bins) << ',' << lo + (hi - lo) * double(b + 1) / double(bins) << ','
       << count[b] << ',' << chosen[b] << '\n';
  return os.str();
}

}  // namespace tokensel
