#pragma once

#include <stdexcept>
#include <string>

namespace squareice {

// Error taxonomy shared by all modules. Every error is a std::runtime_error or
// std::invalid_argument so callers that don't care can catch the std base.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An instance exceeds a configured exact-computation cap.
class TooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometry or boundary condition outside what an algorithm handles.
class Unsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arrow configuration whose gradient does not lift to a single-valued height.
class WindingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state that valid inputs can never produce.
class InternalCorruption : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace squareice
