#pragma once

#include <stdexcept>

namespace emg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed numeric field in an input file; message names the row.
class ParseError final : public Error {
 public:
  using Error::Error;
};

// Row with the wrong field count or shape.
class SchemaError final : public Error {
 public:
  using Error::Error;
};

// Timestamps not strictly increasing.
class OrderingError final : public Error {
 public:
  using Error::Error;
};

// Value outside its documented domain (labels, frequencies, dimensions, ...).
class DomainError final : public Error {
 public:
  using Error::Error;
};

// Signal and label streams cannot be aligned (disjoint or empty time ranges).
class SyncError final : public Error {
 public:
  using Error::Error;
};

// Not enough samples for the requested model order or window.
class InsufficientDataError final : public Error {
 public:
  using Error::Error;
};

// Regression could not produce finite coefficients.
class FitError final : public Error {
 public:
  using Error::Error;
};

// Degenerate training input (fewer than two classes, empty set, ...).
class TrainingError final : public Error {
 public:
  using Error::Error;
};

// Hyperparameter search had no usable cell.
class SearchError final : public Error {
 public:
  using Error::Error;
};

// Experiment plan references data that is not available.
class PlanError final : public Error {
 public:
  using Error::Error;
};

class IoError final : public Error {
 public:
  using Error::Error;
};

}  // namespace emg
