#pragma once

#include <stdexcept>
#include <string>

namespace cmdp {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Finite arithmetic exceeded the representable range.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// Malformed model or strategy document.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A request that is inconsistent with the model it refers to.
class ModelError : public Error {
 public:
  using Error::Error;
};

// The explicit unfolding would exceed the configured node budget.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

// A proven iteration bound was exceeded. Always a bug.
class IterationBoundError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cmdp
