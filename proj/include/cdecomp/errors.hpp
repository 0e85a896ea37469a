#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdecomp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

class SingularSubmatrix : public Error {
 public:
  using Error::Error;
};

class EigenNonConvergence : public Error {
 public:
  using Error::Error;
};

class InfeasibleConstraints : public Error {
 public:
  using Error::Error;
};

class EmptyTruthSupport : public Error {
 public:
  using Error::Error;
};

class NonPositiveDiagonal : public Error {
 public:
  using Error::Error;
};

class MessagePrecisionNonpositive : public Error {
 public:
  using Error::Error;
};

class MalformedCsv : public Error {
 public:
  using Error::Error;
};

/// A CSV cell that does not parse as a number. Coordinates are 1-based
/// (row counts the header line) since they are shown to people.
class NonNumericCell : public Error {
 public:
  NonNumericCell(std::size_t row, std::size_t col, const std::string& cell)
      : Error("non-numeric cell '" + cell + "' at row " + std::to_string(row) +
              ", column " + std::to_string(col)),
        row_(row),
        col_(col) {}

  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

}  // namespace cdecomp
