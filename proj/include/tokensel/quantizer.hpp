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
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tokensel/binary_io.hpp"
#include "tokensel/corpus_io.hpp"
#include "tokensel/error.hpp"
#include "tokensel/frontend.hpp"
#include "tokensel/matrix.hpp"
#include "tokensel/parallel.hpp"

namespace tokensel {

struct QuantizerConfig {
  std::uint32_t vocab_size = 1024;
  std::uint32_t dim = 80;
  std::uint32_t max_iters = 50;
  double tolerance = 1e-4;  // relative distortion change that counts as converged
  std::uint64_t seed = 0;
  bool collapse_repeats = false;
  std::size_t sample_cap = 1'000'000;  // reservoir size for training frames
  unsigned jobs = 1;

  void validate() const {
    if (vocab_size < 2) throw ConfigError("quantizer: vocab_size must be >= 2");
    if (vocab_size > 65536) throw ConfigError("quantizer: vocab_size must be <= 65536");
    if (dim < 1) throw ConfigError("quantizer: dim must be >= 1");
    if (max_iters < 1) throw ConfigError("quantizer: max_iters must be >= 1");
    if (!(tolerance >= 0)) throw ConfigError("quantizer: tolerance must be >= 0");
    if (sample_cap < vocab_size) throw ConfigError("quantizer: sample_cap must be >= vocab_size");
  }
};

struct Codebook {
  std::uint64_t seed = 0;
  Matrix<float> centroids;  // vocab_size x dim

  std::uint32_t vocab_size() const { return static_cast<std::uint32_t>(centroids.rows()); }
  std::uint32_t dim() const { return static_cast<std::uint32_t>(centroids.cols()); }

  friend bool operator==(const Codebook&, const Codebook&) = default;
};

struct CodebookTraining {
  Codebook codebook;
  std::vector<double> distortion;  // mean squared error after each assignment step
  std::size_t empty_cluster_repairs = 0;
  bool converged = false;
};

template <typename A, typename B>
double squared_distance(const A& a, const B& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = double(a[i]) - double(b[i]);
    d += diff * diff;
  }
  return d;
}

namespace detail {

struct Assignment {
  std::vector<std::uint32_t> labels;
  std::vector<double> dist;
};

template <typename C>
std::pair<std::uint32_t, double> nearest(std::span<const float> x, const Matrix<C>& centroids) {
  std::uint32_t best = 0;
  double best_d = squared_distance(x, centroids.row(0));
  for (std::size_t c = 1; c < centroids.rows(); ++c) {
    const double d = squared_distance(x, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return {best, best_d};
}

inline void assign(const Matrix<float>& frames, const Matrix<double>& centroids, unsigned jobs,
                   Assignment& a) {
  constexpr std::size_t kBlock = 1024;
  const std::size_t n = frames.rows();
  a.labels.resize(n);
  a.dist.resize(n);
  parallel_for((n + kBlock - 1) / kBlock, jobs, [&](std::size_t b) {
    for (std::size_t i = b * kBlock, e = std::min(n, i + kBlock); i < e; ++i) {
      auto [label, d] = nearest(frames.row(i), centroids);
      a.labels[i] = label;
      a.dist[i] = d;
    }
  });
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / double(v.size());
}

// k-means++ seeding: first centre uniform, then D^2-weighted draws.
inline Matrix<double> kmeanspp(const Matrix<float>& frames, std::uint32_t k, std::mt19937_64& rng) {
  const std::size_t n = frames.rows(), dim = frames.cols();
  Matrix<double> centroids(k, dim);
  auto set_row = [&](std::size_t c, std::size_t i) {
    for (std::size_t d = 0; d < dim; ++d) centroids(c, d) = frames(i, d);
  };
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  set_row(0, first);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(frames.row(i), centroids.row(0));
  for (std::uint32_t c = 1; c < k; ++c) {
    double total = 0;
    for (double v : d2) total += v;
    std::size_t pick = 0;
    if (total > 0) {
      const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      double cum = 0;
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (d2[i] > 0 && cum > r) {
          pick = i;
          break;
        }
      }
      if (pick == n)  // r landed in the rounding slack at the end
        for (std::size_t i = n; i-- > 0;)
          if (d2[i] > 0) {
            pick = i;
            break;
          }
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
    set_row(c, pick);
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squared_distance(frames.row(i), centroids.row(c)));
  }
  return centroids;
}

}  // namespace detail

// k-means++ seeded Lloyd iterations. Deterministic for fixed (frames, config)
// regardless of config.jobs: only the assignment step runs in parallel and
// every reduction is sequential in frame order.
inline CodebookTraining train_codebook(const Matrix<float>& frames, const QuantizerConfig& cfg) {
  cfg.validate();
  if (frames.rows() < cfg.vocab_size)
    throw ArgumentError("need at least vocab_size (" + std::to_string(cfg.vocab_size) +
                        ") training frames, got " + std::to_string(frames.rows()));
  if (frames.cols() != cfg.dim)
    throw ArgumentError("frame dim " + std::to_string(frames.cols()) + " does not match quantizer dim " +
                        std::to_string(cfg.dim));
  for (float v : frames.data())
    if (!std::isfinite(v)) throw ValidationError("non-finite value in training frames");

  const std::size_t n = frames.rows(), dim = frames.cols(), k = cfg.vocab_size;
  std::mt19937_64 rng(cfg.seed);
  Matrix<double> centroids = detail::kmeanspp(frames, cfg.vocab_size, rng);

  CodebookTraining result;
  detail::Assignment cur;
  detail::assign(frames, centroids, cfg.jobs, cur);
  double distortion = detail::mean_of(cur.dist);
  result.distortion.push_back(distortion);

  // At least one update runs so that coincident seeds still get repaired.
  for (std::uint32_t iter = 0; iter < cfg.max_iters && (distortion > 0 || iter == 0); ++iter) {
    Matrix<double> next(k, dim);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = next.row(cur.labels[i]);
      auto x = frames.row(i);
      for (std::size_t d = 0; d < dim; ++d) row[d] += x[d];
      ++sizes[cur.labels[i]];
    }
    std::vector<std::size_t> by_distance;
    std::size_t next_far = 0;
    for (std::size_t c = 0; c < k; ++c) {
      auto row = next.row(c);
      if (sizes[c] > 0) {
        for (auto& v : row) v /= double(sizes[c]);
        continue;
      }
      // Empty cluster: move it onto the frame worst served by its centroid.
      if (by_distance.empty()) {
        by_distance.resize(n);
        std::iota(by_distance.begin(), by_distance.end(), std::size_t{0});
        std::stable_sort(by_distance.begin(), by_distance.end(),
                         [&](std::size_t a, std::size_t b) { return cur.dist[a] > cur.dist[b]; });
      }
      const std::size_t i = by_distance[next_far++ % n];
      for (std::size_t d = 0; d < dim; ++d) row[d] = frames(i, d);
      ++result.empty_cluster_repairs;
    }

    detail::Assignment trial;
    detail::assign(frames, next, cfg.jobs, trial);
    const double trial_distortion = detail::mean_of(trial.dist);
    if (trial_distortion > distortion) break;  // rounding noise at a fixed point
    const bool same_labels = trial.labels == cur.labels;
    const double rel = distortion > 0 ? (distortion - trial_distortion) / distortion : 0.0;
    centroids = std::move(next);
    cur = std::move(trial);
    distortion = trial_distortion;
    result.distortion.push_back(distortion);
    if (same_labels || rel <= cfg.tolerance) {
      result.converged = true;
      break;
    }
  }
  if (distortion == 0) result.converged = true;

  result.codebook.seed = cfg.seed;
  result.codebook.centroids = Matrix<float>(k, dim);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t d = 0; d < dim; ++d) result.codebook.centroids(c, d) = static_cast<float>(centroids(c, d));
  return result;
}

// Index of the nearest centroid; ties go to the smallest index.
inline Token nearest_centroid(std::span<const float> frame, const Codebook& codebook) {
  if (frame.size() != codebook.dim()) throw ArgumentError("frame dim does not match codebook dim");
  return detail::nearest(frame, codebook.centroids).first;
}

inline std::vector<Token> collapse_repeats(std::span<const Token> tokens) {
  std::vector<Token> out;
  for (Token t : tokens)
    if (out.empty() || out.back() != t) out.push_back(t);
  return out;
}

inline TokenSequence quantize(const FeatureMatrix& features, const Codebook& codebook,
                              bool collapse = false) {
  const auto& frames = features.frames;
  TokenSequence seq{features.utterance_id, {}};
  if (frames.rows() == 0) return seq;
  if (frames.cols() != codebook.dim())
    throw ArgumentError("feature dim " + std::to_string(frames.cols()) + " does not match codebook dim " +
                        std::to_string(codebook.dim()));
  seq.tokens.resize(frames.rows());
  for (std::size_t t = 0; t < frames.rows(); ++t) seq.tokens[t] = detail::nearest(frames.row(t), codebook.centroids).first;
  if (collapse) seq.tokens = collapse_repeats(seq.tokens);
  return seq;
}

// Uniform sample of at most `capacity` frames from a stream (Algorithm R).
class FrameReservoir {
 public:
  FrameReservoir(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
    if (capacity_ == 0) throw ArgumentError("reservoir capacity must be positive");
  }

  void add(std::span<const float> frame) {
    if (seen_ < capacity_) {
      sample_.push_row(frame);
    } else {
      const auto j = std::uniform_int_distribution<std::uint64_t>(0, seen_)(rng_);
      if (j < capacity_) std::copy(frame.begin(), frame.end(), sample_.row(j).begin());
    }
    ++seen_;
  }

  void add(const Matrix<float>& frames) {
    for (std::size_t r = 0; r < frames.rows(); ++r) add(frames.row(r));
  }

  std::uint64_t seen() const noexcept { return seen_; }
  const Matrix<float>& sample() const noexcept { return sample_; }

 private:
  std::size_t capacity_;
  std::mt19937_64 rng_;
  std::uint64_t seen_ = 0;
  Matrix<float> sample_;
};

// Codebook file: "TSCB" | u32 version | u32 vocab | u32 dim | u64 seed | f32 centroids row-major.
inline void write_codebook(const std::string& path, const Codebook& cb) {
  auto out = binary::open_out(path);
  binary::put_magic(out, "TSCB");
  binary::put(out, std::uint32_t{1});
  binary::put(out, cb.vocab_size());
  binary::put(out, cb.dim());
  binary::put(out, cb.seed);
  for (float v : cb.centroids.data()) binary::put_f32(out, v);
  binary::check_written(out, path);
}

inline Codebook read_codebook(const std::string& path) {
  auto in = binary::open_in(path);
  binary::expect_magic(in, "TSCB", path);
  if (binary::get<std::uint32_t>(in, "version") != 1) throw FormatError(path + ": unsupported codebook version");
  const auto vocab = binary::get<std::uint32_t>(in, "vocab_size");
  const auto dim = binary::get<std::uint32_t>(in, "dim");
  if (vocab < 1 || dim < 1 || vocab > 65536 || dim > 65536) throw FormatError(path + ": invalid codebook shape");
  Codebook cb;
  cb.seed = binary::get<std::uint64_t>(in, "seed");
  std::vector<float> data(std::size_t{vocab} * dim);
  for (auto& v : data) {
    v = binary::get_f32(in, "centroids");
    if (!std::isfinite(v)) throw FormatError(path + ": non-finite centroid value");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path + ": trailing bytes");
  cb.centroids = Matrix<float>(vocab, dim, std::move(data));
  return cb;
}

}  // namespace tokensel
