#pragma once

#include <stdexcept>
#include <string>

namespace mhdbl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the time integrator; carries the simulation time of the failure.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double t) : Error(what), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

}  // namespace mhdbl
