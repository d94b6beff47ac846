/*
 * Copyright 2026 The gpbf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GPBF_ERRORS_HPP
#define GPBF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gpbf {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures (CLI exit code 3).
struct NumericError : Error {
  using Error::Error;
};

struct NotPositiveDefinite : NumericError {
  explicit NotPositiveDefinite(const std::string& msg)
      : NumericError("matrix not positive definite: " + msg) {}
};

struct ConvergenceFailure : NumericError {
  explicit ConvergenceFailure(const std::string& msg)
      : NumericError("eigensolver failed to converge: " + msg) {}
};

struct RankDeficient : NumericError {
  explicit RankDeficient(const std::string& msg)
      : NumericError("rank-deficient design: " + msg) {}
};

// Contract violations on library entry points (CLI exit code 3).
struct InvalidArgument : Error {
  using Error::Error;
};

struct DimensionMismatch : InvalidArgument {
  explicit DimensionMismatch(const std::string& msg)
      : InvalidArgument("dimension mismatch: " + msg) {}
};

struct EmptyInput : InvalidArgument {
  explicit EmptyInput(const std::string& msg)
      : InvalidArgument("empty input: " + msg) {}
};

struct InvalidOrder : InvalidArgument {
  explicit InvalidOrder(const std::string& msg)
      : InvalidArgument("invalid moment order: " + msg) {}
};

struct InsufficientGrid : InvalidArgument {
  explicit InsufficientGrid(const std::string& msg)
      : InvalidArgument("insufficient grid: " + msg) {}
};

struct EmptyGrid : InvalidArgument {
  explicit EmptyGrid(const std::string& msg)
      : InvalidArgument("empty quadrature grid: " + msg) {}
};

struct UnsupportedDimension : InvalidArgument {
  explicit UnsupportedDimension(const std::string& msg)
      : InvalidArgument("unsupported dimension: " + msg) {}
};

// Configuration problems (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

struct ParseError : ConfigError {
  ParseError(const std::string& where, const std::string& msg)
      : ConfigError("parse error at " + where + ": " + msg) {}
};

struct ValidationError : ConfigError {
  ValidationError(const std::string& field, const std::string& constraint)
      : ConfigError("invalid config field '" + field + "': " + constraint),
        field_name(field) {}
  std::string field_name;
};

// Filesystem problems (CLI exit code 4).
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error("i/o error: " + msg) {}
};

}  // namespace gpbf

#endif  // GPBF_ERRORS_HPP
