// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deepnrc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not chain, or a dimension argument is out of range.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not produce a meaningful result
/// (non-convergence, zero-variance input, non-finite values).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Linear CKA is undefined because one side has zero variance after centering.
class UndefinedCkaError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Malformed input file (CSV, binary container, checkpoint).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration. `field()` is the dotted JSON path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Training produced a non-finite loss.
class TrainingDivergedError : public NumericalError {
 public:
  TrainingDivergedError(std::size_t epoch, const std::string& message)
      : NumericalError(message), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace deepnrc
