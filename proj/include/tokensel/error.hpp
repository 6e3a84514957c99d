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

#include <stdexcept>
#include <string>
#include <vector>

namespace tokensel {

// Root of every error thrown by the library. kind() is a stable short name
// used by the CLI for machine-readable error lines.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// Bad argument to an operation (precondition violated by the caller).
class ArgumentError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "argument"; }
};

// Data failed a semantic check (duplicate ids, out-of-range tokens, NaN).
class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation"; }
};

// Text input could not be parsed. line() is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  const char* kind() const noexcept override { return "parse"; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A file's structure does not match its declared format.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  const char* kind() const noexcept override { return "format"; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

// Non-fatal condition reported by an operation (fallback taken, budget
// saturated, ...). Operations append to a caller-owned list when given one.
struct Warning {
  std::string code;
  std::string message;
};

using Warnings = std::vector<Warning>;

inline void warn(Warnings* sink, std::string code, std::string message) {
  if (sink) sink->push_back({std::move(code), std::move(message)});
}

}  // namespace tokensel
