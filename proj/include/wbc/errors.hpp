#pragma once

#include <stdexcept>
#include <string>

namespace wbc {

// Base class for every error raised by the library. The CLI maps the
// subclasses below onto exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad input supplied by the caller (malformed spec, wrong sizes, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

// Coordinates that do not describe a point of the manifold.
class InvalidPoint : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

class CutLocus : public Error {
public:
  using Error::Error;
};

class NoConvergence : public Error {
public:
  NoConvergence(const std::string& what, int iterations, double residual)
      : Error(what + " (iterations=" + std::to_string(iterations) +
              ", residual=" + std::to_string(residual) + ")"),
        iterations_(iterations), residual_(residual) {}
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

private:
  int iterations_;
  double residual_;
};

class AmbiguousBarycenter : public Error {
public:
  using Error::Error;
};

class SizeLimit : public Error {
public:
  using Error::Error;
};

// A set of zero reference measure was used where nu(X) > 0 is required.
class EmptySet : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

class SingularDenominator : public Error {
public:
  using Error::Error;
};

class Unsupported : public Error {
public:
  using Error::Error;
};

// A k = 0 inequality was requested on a space whose CD(K, N) constant is negative.
class CDViolated : public Error {
public:
  using Error::Error;
};

} // namespace wbc
