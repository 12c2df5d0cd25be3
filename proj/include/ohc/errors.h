// Copyright 2026 The OHC Support Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OHC_ERRORS_H_
#define OHC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace ohc {

// Base class for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file or record. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

// A precondition on arguments or data was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Filesystem failures (open, read, write).
class IoError : public Error {
 public:
  using Error::Error;
};

// A design matrix is not of full column rank.
class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& column)
      : Error("design matrix is rank deficient: column '" + column +
              "' is collinear with preceding columns"),
        column_(column) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

// Maximum-likelihood estimates diverge (complete or quasi-complete
// separation).
class SeparationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ohc

#endif  // OHC_ERRORS_H_
