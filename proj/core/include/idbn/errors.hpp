// Copyright 2026 The idbn Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace idbn {

/// Process exit codes used by the command-line driver.
enum class ExitCode : int {
  kSuccess = 0,
  kConfig = 2,
  kData = 3,
  kNumeric = 4,
};

/// Base of every error raised by the library. Each subclass carries the exit
/// code the driver reports for it.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, ExitCode code) : std::runtime_error(what), code_(code) {}
  ExitCode exit_code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Invalid hyperparameters, unknown config keys, violated preconditions on
/// arguments supplied by the caller.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, ExitCode::kConfig) {}
};

/// Dimension mismatch between a tensor and the layer it is fed to.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(what, ExitCode::kConfig) {}
};

/// Missing, unreadable or malformed input data.
class DataError : public Error {
 public:
  enum class Kind { kIo, kBadMagic, kTruncated, kCountMismatch, kFormat, kInsufficient, kGeneration, kMissingLevel };

  DataError(Kind kind, const std::string& what) : Error(what, ExitCode::kData), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Fits that fail to converge, degenerate inputs to estimators, non-finite
/// parameters.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what, ExitCode::kNumeric) {}
};

}  // namespace idbn
