#ifndef RANDSEC_ERROR_HPP_
#define RANDSEC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace randsec {

// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidConfiguration : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

// Input outside the floating range the numerics are defined on.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

// The quadrature does not resolve the weighted inner product (singular Gram
// matrix, empty retained monomial set, ...).
class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

// A probability-zero event was hit (zero polynomial, too many rejected
// samples).
class DegenerateSample : public Error {
 public:
  using Error::Error;
};

class CacheError : public Error {
 public:
  using Error::Error;
};

}  // namespace randsec

#endif  // RANDSEC_ERROR_HPP_
