#pragma once

#include <stdexcept>
#include <string>

namespace illumkit {

/// Invalid numeric domain, e.g. a non-positive illuminant component or a
/// zero-norm vector.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Mismatched or out-of-range image dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A statistic was requested over zero samples.
class EmptySampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The input carries no usable signal (e.g. an all-black image).
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace illumkit
