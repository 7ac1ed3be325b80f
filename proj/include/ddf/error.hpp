#pragma once

#include <stdexcept>
#include <string>

namespace ddf {

/// Base error for all fusion-library failures.
class DdfError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched state dimensions or grid shapes.
class DimensionError : public DdfError {
 public:
  using DdfError::DdfError;
};

/// Numerical precondition violation (non-SPD covariance, degenerate
/// density, absolute-continuity failure, ...).
class NumericalError : public DdfError {
 public:
  using DdfError::DdfError;
};

/// Invalid scenario / topology / message configuration.
class ConfigError : public DdfError {
 public:
  using DdfError::DdfError;
};

}  // namespace ddf
