#pragma once

#include "hflow/fields.hpp"
#include "hflow/flow.hpp"
#include "hflow/geometry.hpp"

namespace hflow {

// One marker per node tracking the coordinate-change ODE driven by the gauge
// vector. Positions are stored unwrapped; periodic identification is applied
// only when interpolating or measuring drift.
struct DiffeoField {
  Grid grid;
  std::vector<double> pos;  // dim doubles per node
  double t = 0;

  double coord(std::size_t f, int a) const { return pos[f * grid.dim() + a]; }
  double& coord(std::size_t f, int a) { return pos[f * grid.dim() + a]; }
};

DiffeoField identity_diffeo(const Grid& g);

// Midpoint advance of every marker across one flow step, evaluating the gauge
// field of `a` at the marker and the time-averaged field at the midpoint.
// Raises MarkerEscaped if a marker leaves a bounded domain.
DiffeoField advect(const DiffeoField& d, const FlowState& a, const FlowState& b);

struct DriftStats {
  double sup_drift = 0;          // sup over markers of |pos - start|
  double sup_drift_outside = 0;  // same, markers starting outside the radius
};

// Drift measured with periodic minimal-image distance on periodic grids.
DriftStats drift_stats(const DiffeoField& d, double radius);

// Smallest finite-differenced Jacobian determinant of the marker map.
double min_jacobian_det(const DiffeoField& d);

// Pulls the metric back through the marker map: first differences of the
// markers give the Jacobian, the metric is interpolated at the marker image.
// Raises DegenerateJacobian when the determinant drops to or below zero.
MetricField pullback(const DiffeoField& d, const MetricField& g);

// Sup over stencil-safe interior nodes of
// |(next - prev)/dt + 2 Ric((next + prev)/2)|_F for consecutive pullbacks.
double rf_residual(const MetricField& prev, const MetricField& next, double dt);

}  // namespace hflow
