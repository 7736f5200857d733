#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace jointlmr {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands whose shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameter values (negative threshold, bad config, bad spec).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The SVD did not converge or produced non-finite output.
class NumericalError : public Error {
 public:
  NumericalError(std::size_t rows, std::size_t cols, const std::string& what,
                 std::optional<int> iteration = std::nullopt);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::optional<int> iteration() const { return iteration_; }

  /// Same failure, tagged with the solver iteration it happened in.
  NumericalError at_iteration(int iteration) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::string detail_;
  std::optional<int> iteration_;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// File was readable but its contents are malformed.
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

class BadMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedPayloadError : public FormatError {
 public:
  using FormatError::FormatError;
};

class BadHeaderError : public FormatError {
 public:
  using FormatError::FormatError;
};

class CsvParseError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace jointlmr
