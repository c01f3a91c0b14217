#pragma once

#include "hflow/fields.hpp"

namespace hflow {

// Log conformal factor of a 2d metric e^u * (flat background); the flow
// reduces to the scalar equation du/dt = e^{-u} Lap u.
struct ConformalField {
  ScalarField u;
  double t = 0;
  long step = 0;

  const Grid& grid() const { return u.grid(); }
};

ConformalField make_conformal(const Grid& g);

// e^{-u} times the 5-point Laplacian. Boundary ghosts read u = 0.
double conformal_rhs(const ConformalField& c, const NodeIndex& at);

// Stable step bound safety * dx^2 / (4 e^{sup(-u)}).
double conformal_cfl_dt(const ConformalField& c, double safety);

// Explicit midpoint step; bounded grids keep u = 0 on the boundary ring.
// The sup norm never increases across a step at the stable step size.
ConformalField step_conformal(const ConformalField& c, double dt);

// (1/p) * sum over nodes of (s*u - delta)_+^p * cell area, s = +1 or -1.
double conformal_monotone(const ConformalField& c, int p, double delta,
                          bool negative_part);

}  // namespace hflow
