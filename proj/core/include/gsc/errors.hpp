#pragma once

#include <stdexcept>
#include <string>

namespace gsc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid scalar argument (non-finite input, t <= 0, bad label, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Vector/matrix shape mismatch between caller and callee.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Operation refused because it would exceed a size or memory guard.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Cholesky failure or otherwise non-SPD operator.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown (CG p'Ap <= 0, diverging objective, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; message carries the source location.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace gsc
