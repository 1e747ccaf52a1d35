#pragma once

#include <stdexcept>
#include <string>

namespace decm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Precondition violations on field data (non-finite values, mismatched grids, bad arguments).
class DomainError : public Error {
public:
  using Error::Error;
};

/// An iterative solve did not reach its tolerance. Carries the last residual so the
/// caller can decide whether to retry with another method.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double last_residual, int iterations)
      : Error(what), last_residual_(last_residual), iterations_(iterations) {}

  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

private:
  double last_residual_;
  int iterations_;
};

/// Raised by the time integrator when the state stops being finite.
class SimulationAbort : public Error {
public:
  SimulationAbort(const std::string& what, double time, long step, double norm)
      : Error(what), time_(time), step_(step), norm_(norm) {}

  double time() const noexcept { return time_; }
  long step() const noexcept { return step_; }
  double offending_norm() const noexcept { return norm_; }

private:
  double time_;
  long step_;
  double norm_;
};

}  // namespace decm
