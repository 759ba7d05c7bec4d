// Copyright 2026 The finedetail Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FINEDETAIL_ERROR_H_
#define FINEDETAIL_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace finedetail {

// Error categories. The numeric values of kIo, kContract and kEquivalence are
// the CLI exit codes.
enum class ErrorKind {
  kIo = 1,
  kContract = 2,
  kEquivalence = 3,
  kDecode = 4,
  kUnsupported = 5,
  kUndefined = 6,
  kNumeric = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// A precondition of an operation was not met by the caller.
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what)
      : Error(ErrorKind::kContract, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

// Malformed PNG/JPEG input. The message names the failing chunk or marker.
class DecodeError : public Error {
 public:
  explicit DecodeError(const std::string& what)
      : Error(ErrorKind::kDecode, what) {}

 protected:
  DecodeError(ErrorKind kind, const std::string& what) : Error(kind, what) {}
};

// Well-formed input using a feature outside the supported subset
// (progressive or arithmetic-coded JPEG, for instance).
class UnsupportedFeature : public DecodeError {
 public:
  explicit UnsupportedFeature(const std::string& what)
      : DecodeError(ErrorKind::kUnsupported, what) {}
};

// The requested quantity does not exist for this input: an image smaller than
// one patch, an empty co-occurrence matrix, a zero-variance series.
class UndefinedResult : public Error {
 public:
  explicit UndefinedResult(const std::string& what)
      : Error(ErrorKind::kUndefined, what) {}
};

class NumericFailure : public Error {
 public:
  NumericFailure(const std::string& what, std::ptrdiff_t step)
      : Error(ErrorKind::kNumeric, what), step_(step) {}
  // Training step at which the failure was detected, or -1.
  std::ptrdiff_t step() const { return step_; }

 private:
  std::ptrdiff_t step_;
};

namespace internal {
[[noreturn]] void ThrowContract(const char* file, int line, const char* cond,
                                const std::string& msg);
}  // namespace internal

}  // namespace finedetail

#define FD_REQUIRE(cond, msg)                                               \
  do {                                                                      \
    if (!(cond)) {                                                          \
      ::finedetail::internal::ThrowContract(__FILE__, __LINE__, #cond, msg); \
    }                                                                       \
  } while (0)

#endif  // FINEDETAIL_ERROR_H_
