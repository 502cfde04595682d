#pragma once

#include <stdexcept>
#include <string>

namespace mixcde {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched dimensions between parameters, data, or grids.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite or out-of-domain argument values.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Rank-deficient design matrix; carries the index of the column at which
// the pivoted factorization stopped.
class RankError : public Error {
 public:
  RankError(const std::string& msg, int column) : Error(msg), column(column) {}
  int column;
};

// Malformed persisted file. `record` is the 1-based line (JSONL) or record
// index at which parsing failed, or 0 if unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, long record = 0) : Error(msg), record(record) {}
  long record;
};

// Persisted file has a format version this build does not understand.
class UnsupportedVersionError : public ParseError {
 public:
  using ParseError::ParseError;
};

}  // namespace mixcde
