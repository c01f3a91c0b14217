#pragma once

#include <stdexcept>
#include <string>

namespace hflow {

// Base class for every failure the solver machinery signals deliberately.
struct FlowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A matrix that must be positive definite has an eigenvalue at or below the floor.
struct NonPositiveDefinite : FlowError {
  using FlowError::FlowError;
};

// Positivity of the evolving metric was lost mid-run.
struct Blowup : FlowError {
  Blowup(const std::string& msg, double t_, long step_)
      : FlowError(msg), t(t_), step(step_) {}
  double t;
  long step;
};

// The eigenvalue deviation crossed the configured ceiling; the run halts early.
struct ClosenessCeilingExceeded : FlowError {
  ClosenessCeilingExceeded(const std::string& msg, double t_, double eps_)
      : FlowError(msg), t(t_), eps(eps_) {}
  double t;
  double eps;
};

// A tracked marker left the domain of a non-periodic grid.
struct MarkerEscaped : FlowError {
  using FlowError::FlowError;
};

// The finite-differenced Jacobian of the marker map lost invertibility.
struct DegenerateJacobian : FlowError {
  using FlowError::FlowError;
};

// Not enough usable samples for a requested fit.
struct InsufficientData : FlowError {
  using FlowError::FlowError;
};

// Interpolation was asked for a point outside a bounded domain.
struct PositionOutsideDomain : FlowError {
  using FlowError::FlowError;
};

// A configuration file failed validation; the message names the offending key.
struct ConfigError : FlowError {
  using FlowError::FlowError;
};

}  // namespace hflow
