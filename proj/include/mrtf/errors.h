// Copyright 2026 The mrtf Authors. All Rights Reserved.
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

#ifndef MRTF_ERRORS_H_
#define MRTF_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mrtf {

// Invalid input data or configuration: bad indices, broken invariants,
// inconsistent dimensions. The CLI maps this family to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed text input. line() is 1-based, 0 when the error is not tied to a
// particular line (e.g. premature end of file).
class ParseError : public DataError {
 public:
  ParseError(int line, const std::string& what)
      : DataError(line > 0 ? "line " + std::to_string(line) + ": " + what
                           : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// NaN/Inf during evaluation, or an optimizer that could not make a single
// step. Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace mrtf

#endif  // MRTF_ERRORS_H_
