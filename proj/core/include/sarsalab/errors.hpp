#pragma once

#include <stdexcept>
#include <string>

namespace sarsalab {

/// Base class for all sarsalab failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or malformed input object.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A Markov chain failed to certify ergodicity (stationary law or mixing fit).
class ErgodicityError : public Error {
 public:
  using Error::Error;
};

/// Feature table is identically zero or otherwise unusable.
class DegenerateFeaturesError : public Error {
 public:
  using Error::Error;
};

/// Requested a Lipschitz certificate for an operator that has none.
class NoCertificateError : public Error {
 public:
  using Error::Error;
};

/// Fixed-point iteration diverged or exhausted its iteration budget.
class NoFixedPointError : public Error {
 public:
  using Error::Error;
};

/// Mean-field matrix is singular: features dependent under the visited measure.
class IndependenceError : public Error {
 public:
  using Error::Error;
};

/// Rate fit cannot be performed on the given curve.
class FitError : public Error {
 public:
  using Error::Error;
};

/// File could not be read, written, or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sarsalab
