#pragma once

#include <stdexcept>
#include <string>

namespace toric_szego {

/// Malformed input text (bad JSON, missing keys, non-integral coordinates).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a geometric or contract invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not reach its requested accuracy.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace toric_szego
