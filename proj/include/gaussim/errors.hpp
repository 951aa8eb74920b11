// Copyright 2026 The gaussim Authors
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

#ifndef GAUSSIM_ERRORS_HPP
#define GAUSSIM_ERRORS_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace gaussim {

/// Base class for every runtime failure raised by the simulator.
///
/// The circuit engine stamps the failing instruction index onto the error
/// before rethrowing, so callers get the location without wrapping types.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &message) : std::runtime_error(message), message_(message) {}

  const char *what() const noexcept override { return message_.c_str(); }

  std::optional<std::size_t> instruction() const { return instruction_; }

  void set_instruction(std::size_t index) {
    if (instruction_) {
      return;
    }
    instruction_ = index;
    message_ += " (instruction " + std::to_string(index) + ")";
  }

 private:
  std::string message_;
  std::optional<std::size_t> instruction_;
};

/// A channel failed the complete-positivity test at apply time.
class RejectedChannel : public Error {
 public:
  RejectedChannel(const std::string &message, double min_eigenvalue)
      : Error(message), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

/// Conditioning on a photodetector click. The resulting state is not
/// Gaussian, so the engine refuses; the payload carries the probability of
/// the refused branch.
class NonGaussianOutcome : public Error {
 public:
  NonGaussianOutcome(const std::string &message, double absorption_probability)
      : Error(message), absorption_probability_(absorption_probability) {}
  double absorption_probability() const { return absorption_probability_; }

 private:
  double absorption_probability_;
};

/// Post-selection on an outcome whose log-probability underflows.
class ImpossibleOutcome : public Error {
 public:
  ImpossibleOutcome(const std::string &message, double log_probability)
      : Error(message), log_probability_(log_probability) {}
  double log_probability() const { return log_probability_; }

 private:
  double log_probability_;
};

class DegenerateMeasurement : public Error {
 public:
  using Error::Error;
};

/// Fock-space truncation lost more weight than allowed.
class CutoffTooSmall : public Error {
 public:
  CutoffTooSmall(const std::string &message, double norm_deficit)
      : Error(message), norm_deficit_(norm_deficit) {}
  double norm_deficit() const { return norm_deficit_; }

 private:
  double norm_deficit_;
};

/// Circuit text problems. Syntax and semantic errors are distinct types.
class SourceError : public Error {
 public:
  SourceError(const std::string &message, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class SyntaxError : public SourceError {
 public:
  using SourceError::SourceError;
};

class SemanticError : public SourceError {
 public:
  using SourceError::SourceError;
};

}  // namespace gaussim

#endif
