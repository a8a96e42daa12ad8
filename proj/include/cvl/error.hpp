// Copyright 2026 The cvl Authors
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

namespace cvl {

// Broad failure classes. The CLI maps these onto distinct exit codes.
enum class ErrorKind {
  validation,
  too_short,
  configuration,
  method_inapplicable,
  insufficient_points,
  undefined_reference,
  empty_row,
  parse,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::validation, what) {}
};

// Fewer than two measurements where an interval is required.
struct TooShortError : Error {
  explicit TooShortError(const std::string& what)
      : Error(ErrorKind::too_short, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::configuration, what) {}
};

struct MethodInapplicableError : Error {
  explicit MethodInapplicableError(const std::string& what)
      : Error(ErrorKind::method_inapplicable, what) {}
};

struct InsufficientPointsError : Error {
  explicit InsufficientPointsError(const std::string& what)
      : Error(ErrorKind::insufficient_points, what) {}
};

struct UndefinedReferenceError : Error {
  explicit UndefinedReferenceError(const std::string& what)
      : Error(ErrorKind::undefined_reference, what) {}
};

// A bias-table row for which no individual could be subsampled.
struct EmptyRowError : Error {
  explicit EmptyRowError(const std::string& what)
      : Error(ErrorKind::empty_row, what) {}
};

// Malformed input; carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(ErrorKind::parse,
              line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace cvl
