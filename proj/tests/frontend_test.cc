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

#include "oracles.hpp"
#include "test_util.hpp"
#include "tokensel/fft.hpp"
#include "tokensel/frontend.hpp"

namespace tokensel {
namespace {

double fft_error(const std::vector<double>& x, std::size_t n) {
  const auto got = fft(x, n);
  const auto want = oracle::naive_dft(x, n);
  double err = 0, scale = 0;
  for (std::size_t k = 0; k < n; ++k) {
    err = std::max(err, std::abs(got[k] - want[k]));
    scale = std::max(scale, std::abs(want[k]));
  }
  return err / scale;
}

TEST(Fft, Impulse) {
  std::vector<double> x(16, 0.0);
  x[0] = 1;
  for (const auto& v : fft(x, 16)) {
    EXPECT_NEAR(v.real(), 1.0, 1e-15);
    EXPECT_NEAR(v.imag(), 0.0, 1e-15);
  }
}

TEST(Fft, Constant) {
  const std::vector<double> x(8, 2.0);
  const auto y = fft(x, 8);
  EXPECT_NEAR(y[0].real(), 16.0, 1e-13);
  for (std::size_t k = 1; k < 8; ++k) EXPECT_NEAR(std::abs(y[k]), 0.0, 1e-13);
}

TEST(Fft, MatchesDirectDftAllSizes) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (std::size_t n = 4; n <= 1024; n *= 2) {
    for (std::size_t len : {n, n / 2 + 1, std::size_t{1}}) {
      std::vector<double> x(len);
      for (auto& v : x) v = g(rng);
      EXPECT_LT(fft_error(x, n), 1e-6) << "n=" << n << " len=" << len;
    }
  }
}

TEST(Fft, Errors) {
  std::vector<double> x(10, 1.0);
  EXPECT_THROW(fft(x, 12), ArgumentError);
  EXPECT_THROW(fft(x, 8), ArgumentError);
}

std::vector<float> sine(double hz, std::size_t n, double amplitude = 32767.0 / 32768.0) {
  std::vector<float> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = static_cast<float>(amplitude * std::sin(2 * std::numbers::pi * hz * double(i) / 16000.0));
  return x;
}

TEST(Frontend, OneSecondGives98Frames) {
  FrontendConfig cfg;
  EXPECT_EQ(cfg.window_samples(), 400u);
  EXPECT_EQ(cfg.shift_samples(), 160u);
  const auto f = logmel(sine(300, 16000), cfg);
  EXPECT_EQ(f.frames.rows(), 98u);
  EXPECT_EQ(f.frames.cols(), 80u);
}

TEST(Frontend, ShortInputIsEmpty) {
  LogMelFrontend fe{FrontendConfig{}};
  EXPECT_EQ(fe.compute(std::vector<float>(399, 0.1f)).rows(), 0u);
  EXPECT_EQ(fe.compute(std::vector<float>(400, 0.1f)).rows(), 1u);
  EXPECT_EQ(fe.compute(std::vector<float>{}).rows(), 0u);
}

TEST(Frontend, SilenceIsFloor) {
  FrontendConfig cfg;
  const auto f = logmel(std::vector<float>(4000, 0.0f), cfg);
  ASSERT_GT(f.frames.rows(), 0u);
  const float floor = static_cast<float>(std::log(cfg.energy_floor));
  for (float v : f.frames.data()) EXPECT_EQ(v, floor);
}

TEST(Frontend, SineArgmaxIsBracketingFilter) {
  FrontendConfig cfg;
  // Independent computation of the filter centres from the mel formula.
  const double lo = 2595.0 * std::log10(1 + 125.0 / 700), hi = 2595.0 * std::log10(1 + 7600.0 / 700);
  std::vector<double> centers;
  for (int m = 1; m <= 80; ++m) centers.push_back(700 * (std::pow(10.0, (lo + m * (hi - lo) / 81) / 2595) - 1));
  std::size_t below = 0;
  while (centers[below + 1] <= 440.0) ++below;
  ASSERT_LE(centers[below], 440.0);
  ASSERT_GE(centers[below + 1], 440.0);

  const auto f = logmel(sine(440, 16000), cfg);
  for (std::size_t t = 0; t < f.frames.rows(); ++t) {
    const auto row = f.frames.row(t);
    const auto arg = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    EXPECT_TRUE(arg == below || arg == below + 1) << "frame " << t << " argmax " << arg;
  }
}

TEST(Frontend, CentresMatchMelFormula) {
  FrontendConfig cfg;
  const auto c = mel_center_frequencies(cfg);
  ASSERT_EQ(c.size(), 80u);
  for (std::size_t m = 1; m < c.size(); ++m) EXPECT_GT(c[m], c[m - 1]);
  EXPECT_GT(c.front(), 125.0);
  EXPECT_LT(c.back(), 7600.0);
  EXPECT_NEAR(mel_to_hz(hz_to_mel(1234.5)), 1234.5, 1e-9);
}

TEST(Frontend, ScalingShiftsByTwoLogC) {
  FrontendConfig cfg;
  LogMelFrontend fe(cfg);
  std::mt19937_64 rng(3);
  std::normal_distribution<float> g(0.0f, 0.1f);
  std::vector<float> x(400);
  for (auto& v : x) v = g(rng);
  for (float c : {0.5f, 2.0f, 0.125f}) {
    std::vector<float> y(x);
    for (auto& v : y) v *= c;
    const auto ex = fe.frame_energies(x), ey = fe.frame_energies(y);
    for (std::size_t m = 0; m < ex.size(); ++m) EXPECT_NEAR(std::log(ey[m]) - std::log(ex[m]), 2 * std::log(double(c)), 1e-9);
  }
  std::vector<float> long_x(3200), long_y(3200);
  for (std::size_t i = 0; i < long_x.size(); ++i) {
    long_x[i] = g(rng);
    long_y[i] = long_x[i] * 4.0f;
  }
  const auto fx = fe.compute(long_x), fy = fe.compute(long_y);
  for (std::size_t i = 0; i < fx.data().size(); ++i)
    EXPECT_NEAR(fy.data()[i] - fx.data()[i], 2 * std::log(4.0), 1e-4);
}

TEST(Frontend, FiniteAndDeterministic) {
  FrontendConfig cfg;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> x(8000);
  for (auto& v : x) v = u(rng);
  x[100] = 1.0f;
  x[101] = -1.0f;
  for (std::size_t i = 2000; i < 3000; ++i) x[i] = 0.0f;
  const auto a = logmel(x, cfg), b = logmel(x, cfg);
  EXPECT_TRUE(a.frames == b.frames);
  for (float v : a.frames.data()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Frontend, NormalizeOption) {
  FrontendConfig cfg;
  cfg.normalize = true;
  std::mt19937_64 rng(2);
  std::normal_distribution<float> g(0.0f, 0.3f);
  std::vector<float> x(16000);
  for (auto& v : x) v = g(rng);
  const auto f = logmel(x, cfg);
  for (std::size_t c = 0; c < f.frames.cols(); ++c) {
    double mean = 0;
    for (std::size_t r = 0; r < f.frames.rows(); ++r) mean += f.frames(r, c);
    EXPECT_NEAR(mean / double(f.frames.rows()), 0.0, 1e-4);
  }
}

TEST(Frontend, ConfigValidation) {
  FrontendConfig cfg;
  cfg.sample_rate = 8000;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.fft_size = 256;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.high_freq = 9000;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.num_mel_bins = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_NO_THROW(FrontendConfig{}.validate());
}

TEST(FeatureFiles, MatrixRoundTrip) {
  testing::TempDir dir("feat");
  std::mt19937_64 rng(1);
  std::normal_distribution<float> g;
  Matrix<float> m(13, 7);
  for (auto& v : m.data()) v = g(rng);
  write_feature_matrix(dir / "m.bin", m);
  EXPECT_TRUE(read_feature_matrix(dir / "m.bin") == m);
  EXPECT_THROW(read_feature_matrix(dir / "missing.bin"), IoError);
}

TEST(FeatureFiles, ArchiveRoundTrip) {
  testing::TempDir dir("arch");
  std::vector<FeatureMatrix> items;
  for (int i = 0; i < 4; ++i) {
    FeatureMatrix f;
    f.utterance_id = "u" + std::to_string(i);
    f.frames = Matrix<float>(static_cast<std::size_t>(i * 3), 5, float(i));
    items.push_back(f);
  }
  {
    FeatureArchiveWriter w(dir / "a.bin");
    for (const auto& f : items) w.write(f);
  }
  FeatureArchiveReader r(dir / "a.bin");
  EXPECT_EQ(r.count(), 4u);
  for (const auto& f : items) {
    auto got = r.next();
    ASSERT_TRUE(got);
    EXPECT_EQ(got->utterance_id, f.utterance_id);
    EXPECT_TRUE(got->frames == f.frames);
  }
  EXPECT_FALSE(r.next());
}

}  // namespace
}  // namespace tokensel
