#pragma once

#include <stdexcept>
#include <string>

namespace geoembed {

/// Vector or matrix shape does not match the space it is used with.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical construction failed (singular covariance, loose John basis, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace geoembed
