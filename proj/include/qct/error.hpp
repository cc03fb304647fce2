#pragma once

#include <stdexcept>
#include <string>

namespace qct {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Duplicate, unknown or mismatched system labels.
class LabelError : public Error {
 public:
  using Error::Error;
};

/// Matrix shape or system dimension does not match what an operation needs.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition (not a channel, not PSD, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A construction produced an object that breaks a proven invariant.
/// Always indicates a bug (or a basis-convention mismatch), never bad input.
class ConstructionFault : public Error {
 public:
  using Error::Error;
};

/// Phase alignment found no usable reference direction for a column.
class DegeneratePhaseError : public Error {
 public:
  using Error::Error;
};

/// Requested size exceeds the configured desk-scale caps.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

}  // namespace qct
