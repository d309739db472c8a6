#pragma once

#include <stdexcept>

namespace crqkit {

// Base class for all toolkit errors. Subclasses identify which contract was
// violated so the CLI can map them onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument values: tau outside (0,1), empty series, non-finite input.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Rank-deficient design or singular covariance beyond the ridge guard.
class RankError : public Error {
 public:
  using Error::Error;
};

// Fewer observations than free parameters.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// The LP solver exceeded its cycling safeguard.
class SolverError : public Error {
 public:
  using Error::Error;
};

// A requested company-year range is not covered by the panel.
class CoverageError : public Error {
 public:
  using Error::Error;
};

// Header/column mismatch or unknown industry label.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A cell failed to parse; the message carries row/column coordinates.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Duplicate (company, year) keys or inconsistent per-company labels.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Degenerate bootstrap: zero dispersion or too many failed replications.
class InferenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace crqkit
