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

// Little-endian binary helpers shared by the token, feature and codebook
// containers. Integers are written byte-by-byte so files are identical on
// any host; floats go through their IEEE bit pattern.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>

#include "tokensel/error.hpp"

namespace tokensel::binary {

template <typename UInt>
void put(std::ostream& out, UInt value) {
  static_assert(std::is_unsigned_v<UInt>);
  std::array<char, sizeof(UInt)> bytes;
  for (std::size_t i = 0; i < sizeof(UInt); ++i)
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

inline void put_f32(std::ostream& out, float value) {
  put(out, std::bit_cast<std::uint32_t>(value));
}

inline void put_string(std::ostream& out, std::string_view s) {
  put(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void put_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

template <typename UInt>
UInt get(std::istream& in, const char* what) {
  static_assert(std::is_unsigned_v<UInt>);
  std::array<unsigned char, sizeof(UInt)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size()))
    throw FormatError(std::string("truncated file reading ") + what);
  UInt value = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i)
    value |= static_cast<UInt>(bytes[i]) << (8 * i);
  return value;
}

inline float get_f32(std::istream& in, const char* what) {
  return std::bit_cast<float>(get<std::uint32_t>(in, what));
}

inline std::string get_string(std::istream& in, const char* what,
                              std::uint32_t max_len = 1u << 20) {
  auto len = get<std::uint32_t>(in, what);
  if (len > max_len) throw FormatError(std::string("oversized string in ") + what);
  std::string s(len, '\0');
  if (len && !in.read(s.data(), len))
    throw FormatError(std::string("truncated file reading ") + what);
  return s;
}

inline void expect_magic(std::istream& in, std::string_view magic,
                         const std::string& path) {
  std::string got(magic.size(), '\0');
  if (!in.read(got.data(), static_cast<std::streamsize>(got.size())) ||
      got != magic)
    throw FormatError(path + ": bad magic, expected '" + std::string(magic) + "'");
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

inline void check_written(std::ostream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write failed on '" + path + "'");
}

}  // namespace tokensel::binary
