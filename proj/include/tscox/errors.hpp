// Copyright 2026 The tscox Authors
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

#ifndef TSCOX_ERRORS_HPP
#define TSCOX_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace tscox {

/// Failure categories raised by the library. The CLI maps each onto an exit code.
enum class ErrorKind {
  InvalidArgument,
  Geometry,
  NoContainingUnit,
  DegenerateGeometry,
  SingularCovariance,
  InsufficientBudget,
  NonFiniteIntensity,
  UnboundedCovariate,
  InvalidMark,
  InvalidInitialState,
  NonFiniteLogLik,
  IncomparableModels,
  Parse,
  Domain,
  Config,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Geometry: return "GeometryError";
    case ErrorKind::NoContainingUnit: return "NoContainingUnit";
    case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::SingularCovariance: return "SingularCovariance";
    case ErrorKind::InsufficientBudget: return "InsufficientBudget";
    case ErrorKind::NonFiniteIntensity: return "NonFiniteIntensity";
    case ErrorKind::UnboundedCovariate: return "UnboundedCovariate";
    case ErrorKind::InvalidMark: return "InvalidMark";
    case ErrorKind::InvalidInitialState: return "InvalidInitialState";
    case ErrorKind::NonFiniteLogLik: return "NonFiniteLogLik";
    case ErrorKind::IncomparableModels: return "IncomparableModels";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Io: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace tscox

#endif  // TSCOX_ERRORS_HPP
