#pragma once

#include <stdexcept>
#include <string>

namespace divcurl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/* shape/argument mismatch (wrong sizes, bad p, bad axis index) */
class DimensionError : public Error {
 public:
  using Error::Error;
};

/* structural constraint violation (n out of [N/2, N], grid cap, bad scales) */
class ConstraintError : public Error {
 public:
  using Error::Error;
};

/* an operation's mathematical hypothesis does not hold for the given input */
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/* ratio experiment hit a vanishing denominator */
class DegenerateTrial : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace divcurl
