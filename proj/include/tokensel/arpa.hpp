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

// ARPA back-off model text format. Tokens are decimal ids; BOS and EOS are
// written as <s> and </s>. Context-only entries carry probability -99.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tokensel/error.hpp"
#include "tokensel/ngram_model.hpp"

namespace tokensel {

inline constexpr int kArpaDecimals = 7;

namespace detail {

inline std::string arpa_token(Token t, Token vocab) {
  if (t == eos_token(vocab)) return "</s>";
  if (t == bos_token(vocab)) return "<s>";
  return std::to_string(t);
}

inline void append_fixed(std::string& out, double v, int decimals) {
  char buf[64];
  if (v == 0) v = 0;  // no "-0.0000000"
  const int len = std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  out.append(buf, static_cast<std::size_t>(len));
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

inline double parse_double(std::string_view s, std::size_t line) {
  // from_chars for double is not available on every toolchain we build with.
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size() || !std::isfinite(v)) throw FormatError("bad number '" + tmp + "'", line);
  return v;
}

}  // namespace detail

inline void write_arpa(const NgramModel& model, std::ostream& out, int decimals = kArpaDecimals) {
  std::vector<std::vector<NgramRecord>> sections;
  for (int n = 1; n <= model.order(); ++n) sections.push_back(model.ngrams(n));
  std::string buf = "\n\\data\\\n";
  for (int n = 1; n <= model.order(); ++n)
    buf += "ngram " + std::to_string(n) + "=" + std::to_string(sections[n - 1].size()) + "\n";
  out << buf;
  for (int n = 1; n <= model.order(); ++n) {
    buf = "\n\\" + std::to_string(n) + "-grams:\n";
    for (const auto& r : sections[n - 1]) {
      detail::append_fixed(buf, r.log10_prob.value_or(kLog10Zero), decimals);
      for (std::size_t i = 0; i < r.tokens.size(); ++i) {
        buf += i == 0 ? '\t' : ' ';
        buf += detail::arpa_token(r.tokens[i], model.vocab_size());
      }
      if (r.log10_backoff) {
        buf += '\t';
        detail::append_fixed(buf, *r.log10_backoff, decimals);
      }
      buf += '\n';
    }
    out << buf;
  }
  out << "\n\\end\\\n";
}

inline void write_arpa(const NgramModel& model, const std::string& path, int decimals = kArpaDecimals) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_arpa(model, out, decimals);
  out.flush();
  if (!out) throw IoError("write failed on '" + path + "'");
}

// Parses an ARPA model. The vocabulary size is one past the largest integer
// token among the unigrams.
inline NgramModel read_arpa(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  auto blank = [&] { return line.find_first_not_of(" \t") == std::string::npos; };

  bool found = false;
  while (next_line())
    if (line == "\\data\\") {
      found = true;
      break;
    }
  if (!found) throw FormatError("missing \\data\\ header", lineno);

  std::vector<std::size_t> declared;
  while (next_line()) {
    if (blank()) {
      if (declared.empty()) continue;
      break;
    }
    if (line.rfind("ngram ", 0) != 0) break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("malformed count line", lineno);
    std::size_t n = 0, c = 0;
    const auto* b = line.data();
    auto r1 = std::from_chars(b + 6, b + eq, n);
    auto r2 = std::from_chars(b + eq + 1, b + line.size(), c);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || r1.ptr != b + eq || r2.ptr != b + line.size())
      throw FormatError("malformed count line", lineno);
    if (n != declared.size() + 1) throw FormatError("n-gram counts out of order", lineno);
    declared.push_back(c);
  }
  if (declared.empty()) throw FormatError("no n-gram counts in \\data\\ section", lineno);
  if (declared.size() > 16) throw FormatError("order above 16 is not supported", lineno);
  const int order = static_cast<int>(declared.size());

  struct Raw {
    std::vector<std::string> tokens;
    double prob;
    std::optional<double> bow;
    std::size_t line;
  };
  std::vector<std::vector<Raw>> sections(order);
  long long max_id = -1;

  for (int n = 1; n <= order; ++n) {
    while (blank()) {
      if (!next_line()) throw FormatError("missing \\" + std::to_string(n) + "-grams: section", lineno);
    }
    if (line != "\\" + std::to_string(n) + "-grams:")
      throw FormatError("expected \\" + std::to_string(n) + "-grams:, got '" + line + "'", lineno);
    while (next_line() && !blank() && line[0] != '\\') {
      const auto f = detail::split_ws(line);
      if (f.size() != static_cast<std::size_t>(n) + 1 && f.size() != static_cast<std::size_t>(n) + 2)
        throw FormatError("expected " + std::to_string(n) + "-gram entry", lineno);
      Raw r;
      r.line = lineno;
      r.prob = detail::parse_double(f[0], lineno);
      for (int i = 1; i <= n; ++i) {
        r.tokens.emplace_back(f[i]);
        if (f[i] != "<s>" && f[i] != "</s>") {
          long long id = -1;
          auto res = std::from_chars(f[i].data(), f[i].data() + f[i].size(), id);
          if (res.ec != std::errc{} || res.ptr != f[i].data() + f[i].size() || id < 0 || id >= kMaxVocab)
            throw FormatError("token '" + std::string(f[i]) + "' is not a token id", lineno);
          if (n == 1) max_id = std::max(max_id, id);
        }
      }
      if (f.size() == static_cast<std::size_t>(n) + 2) r.bow = detail::parse_double(f[n + 1], lineno);
      sections[n - 1].push_back(std::move(r));
    }
    if (sections[n - 1].size() != declared[n - 1])
      throw FormatError("header declares " + std::to_string(declared[n - 1]) + " " + std::to_string(n) +
                            "-grams, body has " + std::to_string(sections[n - 1].size()),
                        lineno);
    if (!in && n < order) throw FormatError("unexpected end of file", lineno);
  }
  while (blank() && next_line()) {
  }
  if (line != "\\end\\") throw FormatError("missing \\end\\", lineno);
  if (max_id < 0) throw FormatError("no token ids among unigrams", lineno);

  const Token vocab = static_cast<Token>(max_id + 1);
  NgramModel model(order, vocab);
  std::vector<Token> ids;
  for (const auto& section : sections) {
    for (const auto& r : section) {
      ids.clear();
      for (const auto& t : r.tokens) {
        if (t == "<s>") ids.push_back(bos_token(vocab));
        else if (t == "</s>") ids.push_back(eos_token(vocab));
        else {
          const auto id = static_cast<Token>(std::stoull(t));
          if (id >= vocab) throw FormatError("token " + t + " missing from unigrams", r.line);
          ids.push_back(id);
        }
      }
      if (ids.back() != bos_token(vocab)) {
        if (model.stored_log10_prob(ids)) throw FormatError("duplicate n-gram", r.line);
        model.set_log10_prob(ids, r.prob);
      }
      if (r.bow) {
        if (ids.size() == static_cast<std::size_t>(order)) throw FormatError("back-off weight on top-order n-gram", r.line);
        model.set_log10_backoff(ids, *r.bow);
      }
    }
  }
  return model;
}

inline NgramModel read_arpa(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return read_arpa(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace tokensel
