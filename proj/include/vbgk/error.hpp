#pragma once

#include <stdexcept>
#include <string>

namespace vbgk {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition on an argument (bad dimension, node count, parameter out of range).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Iteration budget exhausted, NaN detected, singular system.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Id - mu*A could not be inverted at the requested (z, k).
class SingularSystem : public NumericalError {
 public:
  SingularSystem(const std::string& what, double min_singular)
      : NumericalError(what), min_singular_(min_singular) {}
  double min_singular() const { return min_singular_; }

 private:
  double min_singular_;
};

// The scalar symbol h(z, k) vanishes: z is a root of the dispersion relation.
class DispersionRoot : public NumericalError {
 public:
  DispersionRoot(const std::string& what, double abs_h) : NumericalError(what), abs_h_(abs_h) {}
  double abs_h() const { return abs_h_; }

 private:
  double abs_h_;
};

// The time integrator hit a non-finite value.
class SolverAbort : public NumericalError {
 public:
  SolverAbort(const std::string& what, double time) : NumericalError(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace vbgk
