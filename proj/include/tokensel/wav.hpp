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

// Minimal RIFF/WAVE support: 16 kHz, 16-bit, mono PCM only.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tokensel/binary_io.hpp"
#include "tokensel/error.hpp"

namespace tokensel {

inline constexpr std::uint32_t kSampleRate = 16000;

namespace detail {

inline std::vector<std::int16_t> read_wav_body(const std::string& path) {
  auto in = binary::open_in(path);
  auto fail = [&](const std::string& why) -> IoError {
    return IoError(path + ": " + why);
  };
  char tag[4];
  if (!in.read(tag, 4) || std::string(tag, 4) != "RIFF") throw fail("not a RIFF file");
  binary::get<std::uint32_t>(in, "RIFF size");
  if (!in.read(tag, 4) || std::string(tag, 4) != "WAVE") throw fail("not a WAVE file");

  bool have_fmt = false;
  while (in.read(tag, 4)) {
    const std::string id(tag, 4);
    const auto size = binary::get<std::uint32_t>(in, "chunk size");
    if (id == "fmt ") {
      if (size < 16) throw fail("short fmt chunk");
      const auto format = binary::get<std::uint16_t>(in, "format");
      const auto channels = binary::get<std::uint16_t>(in, "channels");
      const auto rate = binary::get<std::uint32_t>(in, "rate");
      binary::get<std::uint32_t>(in, "byte rate");
      binary::get<std::uint16_t>(in, "block align");
      const auto bits = binary::get<std::uint16_t>(in, "bits");
      if (format != 1) throw fail("only PCM WAV is supported");
      if (channels != 1) throw fail("only mono audio is supported");
      if (rate != kSampleRate) throw fail("sample rate must be 16000 Hz, got " + std::to_string(rate));
      if (bits != 16) throw fail("only 16-bit samples are supported");
      in.seekg(size - 16 + (size & 1), std::ios::cur);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw fail("data chunk before fmt chunk");
      std::vector<std::int16_t> samples(size / 2);
      for (auto& s : samples)
        s = static_cast<std::int16_t>(binary::get<std::uint16_t>(in, "samples"));
      return samples;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);
    }
  }
  throw fail("no data chunk");
}

}  // namespace detail

// Every failure to obtain samples is reported as an IoError.
inline std::vector<std::int16_t> read_wav(const std::string& path) {
  try {
    return detail::read_wav_body(path);
  } catch (const FormatError& e) {
    throw IoError(path + ": " + e.what());
  }
}

inline void write_wav(const std::string& path, std::span<const std::int16_t> samples) {
  auto out = binary::open_out(path);
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  binary::put_magic(out, "RIFF");
  binary::put(out, std::uint32_t{36} + data_bytes);
  binary::put_magic(out, "WAVEfmt ");
  binary::put(out, std::uint32_t{16});
  binary::put(out, std::uint16_t{1});
  binary::put(out, std::uint16_t{1});
  binary::put(out, kSampleRate);
  binary::put(out, kSampleRate * 2);
  binary::put(out, std::uint16_t{2});
  binary::put(out, std::uint16_t{16});
  binary::put_magic(out, "data");
  binary::put(out, data_bytes);
  for (auto s : samples) binary::put(out, static_cast<std::uint16_t>(s));
  binary::check_written(out, path);
}

// Samples scaled to [-1, 1).
inline std::vector<float> to_float(std::span<const std::int16_t> pcm) {
  std::vector<float> out(pcm.size());
  for (std::size_t i = 0; i < pcm.size(); ++i) out[i] = pcm[i] / 32768.0f;
  return out;
}

}  // namespace tokensel
