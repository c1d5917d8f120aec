/*
 * Copyright 2026 The avqa Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef AVQA_ERROR_HPP_
#define AVQA_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace avqa {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  kValidation = 2,  // bad config, bad arguments, broken invariants
  kData = 3,        // unreadable or malformed input files
  kNumeric = 4,     // NaN/Inf or degenerate numerics
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::kValidation, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorKind::kData, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::kNumeric, what) {}
};

}  // namespace avqa

#endif  // AVQA_ERROR_HPP_
