// Copyright 2026 The gmphd_mots Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gmphd_mots {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed compact RLE input. `offset()` is the byte position of the bad character.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : Error(what + " (byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Structurally valid data that violates a size or sum constraint.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Operands whose shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a numeric argument was violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Text input that cannot be parsed. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// File system or image codec failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gmphd_mots
