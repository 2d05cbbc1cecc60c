#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace recomb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A size or compute budget was exceeded. Carries whatever partial
/// statistics the producer had when it stopped.
class CapacityError : public Error {
 public:
  struct Partial {
    std::size_t leaves = 0;
    std::size_t nodes = 0;
    double time_reached = 0.0;
  };

  explicit CapacityError(const std::string& what) : Error(what) {}
  CapacityError(const std::string& what, Partial partial) : Error(what), partial_(partial) {}

  const Partial& partial() const noexcept { return partial_; }

 private:
  Partial partial_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A Fourier table that does not describe a probability measure.
class InvalidTableError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical invariant (mass conservation, coefficient bound) broke.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace recomb
