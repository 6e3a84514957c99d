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
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "tokensel/error.hpp"

namespace tokensel {

constexpr bool is_power_of_two(std::size_t n) noexcept { return n && !(n & (n - 1)); }

// In-place iterative radix-2 DIT transform; a.size() must be a power of two.
// Twiddles are evaluated directly per index rather than by recurrence.
inline void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (!is_power_of_two(n)) throw ArgumentError("FFT size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  std::vector<std::complex<double>> twiddle(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k)
    twiddle[k] = std::polar(1.0, -2.0 * std::numbers::pi * double(k) / double(n));
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t base = 0; base < n; base += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const auto u = a[base + k];
        const auto v = a[base + k + half] * twiddle[k * stride];
        a[base + k] = u + v;
        a[base + k + half] = u - v;
      }
    }
  }
}

// DFT of `signal` zero-padded to n points.
inline std::vector<std::complex<double>> fft(std::span<const double> signal, std::size_t n) {
  if (!is_power_of_two(n)) throw ArgumentError("FFT size must be a power of two");
  if (signal.size() > n) throw ArgumentError("FFT size smaller than the signal");
  std::vector<std::complex<double>> a(n);
  for (std::size_t i = 0; i < signal.size(); ++i) a[i] = signal[i];
  fft_inplace(a);
  return a;
}

}  // namespace tokensel
