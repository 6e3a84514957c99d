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
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tokensel/binary_io.hpp"
#include "tokensel/error.hpp"
#include "tokensel/fft.hpp"
#include "tokensel/matrix.hpp"

namespace tokensel {

// Defaults give 80-dim log-mel frames over 25 ms windows every 10 ms at
// 16 kHz. The remaining knobs are conventional choices, all overridable.
struct FrontendConfig {
  double sample_rate = 16000.0;
  int num_mel_bins = 80;
  double frame_length_s = 0.025;
  double frame_shift_s = 0.010;
  std::size_t fft_size = 512;
  double low_freq = 125.0;
  double high_freq = 7600.0;
  double preemphasis = 0.97;
  double energy_floor = 1e-10;
  bool normalize = false;  // per-utterance mean/variance normalization

  std::size_t window_samples() const {
    return static_cast<std::size_t>(std::llround(frame_length_s * sample_rate));
  }
  std::size_t shift_samples() const {
    return static_cast<std::size_t>(std::llround(frame_shift_s * sample_rate));
  }

  void validate() const {
    if (sample_rate != 16000.0) throw ConfigError("frontend: only 16 kHz audio is supported");
    if (num_mel_bins < 1) throw ConfigError("frontend: num_mel_bins must be >= 1");
    if (!(frame_length_s > 0) || !(frame_shift_s > 0))
      throw ConfigError("frontend: frame length and shift must be positive");
    if (!is_power_of_two(fft_size)) throw ConfigError("frontend: fft_size must be a power of two");
    if (fft_size < window_samples()) throw ConfigError("frontend: fft_size smaller than the window");
    if (!(low_freq >= 0) || !(high_freq > low_freq) || high_freq > sample_rate / 2)
      throw ConfigError("frontend: need 0 <= low_freq < high_freq <= Nyquist");
    if (preemphasis < 0 || preemphasis >= 1) throw ConfigError("frontend: preemphasis must be in [0, 1)");
    if (!(energy_floor > 0)) throw ConfigError("frontend: energy_floor must be positive");
  }
};

struct FeatureMatrix {
  std::string utterance_id;
  Matrix<float> frames;
  double frame_shift_s = 0.010;
  double frame_length_s = 0.025;
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Center frequency (Hz) of each triangular filter.
inline std::vector<double> mel_center_frequencies(const FrontendConfig& cfg) {
  const double lo = hz_to_mel(cfg.low_freq), hi = hz_to_mel(cfg.high_freq);
  const double step = (hi - lo) / (cfg.num_mel_bins + 1);
  std::vector<double> centers(cfg.num_mel_bins);
  for (int m = 0; m < cfg.num_mel_bins; ++m) centers[m] = mel_to_hz(lo + (m + 1) * step);
  return centers;
}

inline std::size_t num_frames(std::size_t num_samples, std::size_t window, std::size_t shift) {
  if (num_samples < window) return 0;
  return (num_samples - window) / shift + 1;
}

class LogMelFrontend {
 public:
  explicit LogMelFrontend(FrontendConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    window_len_ = cfg_.window_samples();
    shift_ = cfg_.shift_samples();
    window_.resize(window_len_);
    for (std::size_t n = 0; n < window_len_; ++n)  // periodic Hann
      window_[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(n) / double(window_len_));

    const double lo = hz_to_mel(cfg_.low_freq), hi = hz_to_mel(cfg_.high_freq);
    const double step = (hi - lo) / (cfg_.num_mel_bins + 1);
    const std::size_t bins = cfg_.fft_size / 2 + 1;
    filters_.resize(cfg_.num_mel_bins);
    for (int m = 0; m < cfg_.num_mel_bins; ++m) {
      const double left = lo + m * step, center = left + step, right = center + step;
      auto& f = filters_[m];
      for (std::size_t k = 0; k < bins; ++k) {
        const double mel = hz_to_mel(double(k) * cfg_.sample_rate / double(cfg_.fft_size));
        double w = 0;
        if (mel > left && mel < center)
          w = (mel - left) / (center - left);
        else if (mel >= center && mel < right)
          w = (right - mel) / (right - center);
        if (w > 0) {
          if (f.weights.empty()) f.first_bin = k;
          f.weights.resize(k - f.first_bin + 1, 0.0);
          f.weights.back() = w;
        }
      }
    }
  }

  const FrontendConfig& config() const noexcept { return cfg_; }
  std::size_t frames_for(std::size_t num_samples) const {
    return num_frames(num_samples, window_len_, shift_);
  }

  // Filterbank weight of mel bin m at FFT bin k.
  double filter_weight(int m, std::size_t k) const {
    const auto& f = filters_.at(m);
    if (k < f.first_bin || k >= f.first_bin + f.weights.size()) return 0.0;
    return f.weights[k - f.first_bin];
  }

  // Raw filterbank energies (before the log) for one frame; exposed for tests.
  std::vector<double> frame_energies(std::span<const float> frame) const {
    std::vector<double> buf(window_len_);
    for (std::size_t i = 0; i < window_len_; ++i) buf[i] = frame[i];
    for (std::size_t i = window_len_ - 1; i > 0; --i) buf[i] -= cfg_.preemphasis * buf[i - 1];
    buf[0] -= cfg_.preemphasis * buf[0];
    for (std::size_t i = 0; i < window_len_; ++i) buf[i] *= window_[i];
    const auto spectrum = fft(buf, cfg_.fft_size);
    std::vector<double> energies(filters_.size());
    for (std::size_t m = 0; m < filters_.size(); ++m) {
      const auto& f = filters_[m];
      double e = 0;
      for (std::size_t j = 0; j < f.weights.size(); ++j) e += f.weights[j] * std::norm(spectrum[f.first_bin + j]);
      energies[m] = e;
    }
    return energies;
  }

  Matrix<float> compute(std::span<const float> samples) const {
    const std::size_t t_count = frames_for(samples.size());
    Matrix<float> out(t_count, filters_.size());
    const double log_floor = std::log(cfg_.energy_floor);
    for (std::size_t t = 0; t < t_count; ++t) {
      const auto energies = frame_energies(samples.subspan(t * shift_, window_len_));
      auto row = out.row(t);
      for (std::size_t m = 0; m < energies.size(); ++m) {
        const double e = energies[m];
        row[m] = static_cast<float>(e > cfg_.energy_floor ? std::log(e) : log_floor);
      }
    }
    if (cfg_.normalize) normalize_in_place(out);
    return out;
  }

 private:
  struct Filter {
    std::size_t first_bin = 0;
    std::vector<double> weights;
  };

  static void normalize_in_place(Matrix<float>& m) {
    if (m.rows() == 0) return;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      double mean = 0, sq = 0;
      for (std::size_t r = 0; r < m.rows(); ++r) mean += m(r, c);
      mean /= double(m.rows());
      for (std::size_t r = 0; r < m.rows(); ++r) sq += (m(r, c) - mean) * (m(r, c) - mean);
      const double sd = std::sqrt(sq / double(m.rows()));
      for (std::size_t r = 0; r < m.rows(); ++r)
        m(r, c) = static_cast<float>(sd > 0 ? (m(r, c) - mean) / sd : 0.0);
    }
  }

  FrontendConfig cfg_;
  std::size_t window_len_ = 0;
  std::size_t shift_ = 0;
  std::vector<double> window_;
  std::vector<Filter> filters_;
};

inline FeatureMatrix logmel(std::span<const float> samples, const FrontendConfig& cfg,
                            std::string utterance_id = {}) {
  LogMelFrontend fe(cfg);
  return {std::move(utterance_id), fe.compute(samples), cfg.frame_shift_s, cfg.frame_length_s};
}

// ---------------------------------------------------------------------------
// Feature files.
//
// Single matrix:  "TSFM" | u64 T | u32 dims | T*dims f32 row-major
// Archive:        "TSFA" | u32 version | u64 count | count x { id | u64 T | u32 dims | f32... }

namespace detail {

inline void put_frames(std::ostream& out, const Matrix<float>& m) {
  binary::put(out, static_cast<std::uint64_t>(m.rows()));
  binary::put(out, static_cast<std::uint32_t>(m.cols()));
  for (float v : m.data()) binary::put_f32(out, v);
}

inline Matrix<float> get_frames(std::istream& in, const std::string& path) {
  const auto rows = binary::get<std::uint64_t>(in, "frame count");
  const auto cols = binary::get<std::uint32_t>(in, "frame dims");
  if (cols == 0 && rows != 0) throw FormatError(path + ": zero-width feature matrix");
  if (cols != 0 && rows > (std::uint64_t{1} << 34) / cols) throw FormatError(path + ": implausible matrix size");
  std::vector<float> data(static_cast<std::size_t>(rows) * cols);
  for (auto& v : data) v = binary::get_f32(in, "frames");
  return Matrix<float>(rows, cols, std::move(data));
}

}  // namespace detail

inline void write_feature_matrix(const std::string& path, const Matrix<float>& m) {
  auto out = binary::open_out(path);
  binary::put_magic(out, "TSFM");
  detail::put_frames(out, m);
  binary::check_written(out, path);
}

inline Matrix<float> read_feature_matrix(const std::string& path) {
  auto in = binary::open_in(path);
  binary::expect_magic(in, "TSFM", path);
  return detail::get_frames(in, path);
}

class FeatureArchiveWriter {
 public:
  explicit FeatureArchiveWriter(std::string path) : path_(std::move(path)), out_(binary::open_out(path_)) {
    binary::put_magic(out_, "TSFA");
    binary::put(out_, std::uint32_t{1});
    count_pos_ = out_.tellp();
    binary::put(out_, std::uint64_t{0});
  }
  FeatureArchiveWriter(const FeatureArchiveWriter&) = delete;
  FeatureArchiveWriter& operator=(const FeatureArchiveWriter&) = delete;
  ~FeatureArchiveWriter() {
    try {
      close();
    } catch (...) {
    }
  }

  void write(const FeatureMatrix& f) {
    binary::put_string(out_, f.utterance_id);
    detail::put_frames(out_, f.frames);
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
  std::ofstream out_;
  std::streampos count_pos_;
  std::uint64_t count_ = 0;
  bool closed_ = false;
};

class FeatureArchiveReader {
 public:
  explicit FeatureArchiveReader(std::string path) : path_(std::move(path)), in_(binary::open_in(path_)) {
    binary::expect_magic(in_, "TSFA", path_);
    if (binary::get<std::uint32_t>(in_, "version") != 1) throw FormatError(path_ + ": unsupported archive version");
    count_ = binary::get<std::uint64_t>(in_, "count");
  }

  std::uint64_t count() const noexcept { return count_; }

  std::optional<FeatureMatrix> next() {
    if (read_ == count_) return std::nullopt;
    FeatureMatrix f;
    f.utterance_id = binary::get_string(in_, "utterance id");
    f.frames = detail::get_frames(in_, path_);
    ++read_;
    return f;
  }

 private:
  std::string path_;
  std::ifstream in_;
  std::uint64_t count_ = 0;
  std::uint64_t read_ = 0;
};

}  // namespace tokensel
