// Copyright 2026 The sdlm Authors. All Rights Reserved.
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
#include <optional>
#include <stdexcept>
#include <string>

namespace sdlm {

// Every exception thrown by the library derives from Error. The three
// second-level classes map one-to-one onto the CLI exit codes:
//   ConfigError -> 2, DataError -> 3, RemoteError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

// Caller passed arguments that violate an operation's preconditions.
class InputError : public DataError {
 public:
  using DataError::DataError;
};

// A file could not be parsed. `line` is 1-based when known.
class FormatError : public DataError {
 public:
  FormatError(const std::string& what, std::optional<std::size_t> line = {})
      : DataError(what), line_(line) {}
  std::optional<std::size_t> line() const { return line_; }

 private:
  std::optional<std::size_t> line_;
};

// Parsed data violates a domain invariant (probabilities out of range,
// rows not summing to one, ...).
class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

class VocabularyError : public DataError {
 public:
  using DataError::DataError;
};

// p(Yes) + p(No) == 0 under the diagnosis template.
class DegenerateModelError : public DataError {
 public:
  using DataError::DataError;
};

class UndefinedCorrelationError : public DataError {
 public:
  using DataError::DataError;
};

class InfinitePerplexityError : public DataError {
 public:
  InfinitePerplexityError(const std::string& what, std::size_t position)
      : DataError(what), position_(position) {}
  // Corpus index of the token that received zero probability.
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Transport failure or protocol violation talking to a remote model or
// scorer. Carries whatever the server sent back.
class RemoteError : public Error {
 public:
  RemoteError(const std::string& what, std::string raw_response = {},
              int status = 0, std::optional<double> retry_after = {})
      : Error(what),
        raw_response_(std::move(raw_response)),
        status_(status),
        retry_after_(retry_after) {}

  const std::string& raw_response() const { return raw_response_; }
  int status() const { return status_; }
  // Seconds, from a Retry-After header, if the server sent one.
  std::optional<double> retry_after() const { return retry_after_; }

 private:
  std::string raw_response_;
  int status_;
  std::optional<double> retry_after_;
};

// Reply broke the wire contract (unparseable, wrong shape, size
// mismatch, bad sum).
class RemoteValidationError : public RemoteError {
 public:
  using RemoteError::RemoteError;
};

}  // namespace sdlm
