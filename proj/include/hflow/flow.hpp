#pragma once

#include <functional>
#include <vector>

#include "hflow/diagnostics.hpp"
#include "hflow/fields.hpp"

namespace hflow {

struct FlowState {
  MetricField g;
  double t = 0;
  long step = 0;

  const Grid& grid() const { return g.grid(); }
};

struct InitialData {
  MetricField g0;
  double epsilon0 = 0;  // closeness of g0, must stay below 1
};

// Validates positivity and records the closeness of the data.
InitialData make_initial_data(MetricField g0);

// Expanded second-order quasilinear form of the background-fixed flow:
// g^{ab} dd_ab g_ij plus five quadratic first-derivative contractions,
// symmetrized in (i,j) to cancel roundoff asymmetry. Agrees with
// rhs_ricci_deturck to second order in the spacing.
SymMatrix hflow_rhs(const MetricField& g, const NodeIndex& at);

// Shared assembly used by hflow_rhs and the step sweep.
// dg is indexed [axis][sym comp], ddg [sym axis pair][sym comp].
SymMatrix hflow_rhs_assemble(const SymMatrix& inv, const double dg[][kMaxSymComp],
                             const double ddg[][kMaxSymComp], int n);

// Explicit stable step bound: safety * dx^2 / (2 n sup lambda_max(g^-1)).
double cfl_dt(const FlowState& s, double safety);

// One explicit midpoint step. Bounded grids keep their boundary ring pinned
// to the background after every stage. Signals NonPositiveDefinite if any
// node loses positivity.
FlowState step(const FlowState& s, double dt);

// Blends the data into the background across a unit-width cosine ramp:
// eta = 1 inside radius-2, eta = 0 outside radius-1, measured from the
// domain center. Requires a DirichletToH grid and a radius that fits.
MetricField cutoff_initial(const MetricField& g0, double radius);

// Value of the cutoff ramp at distance r from the center.
double cutoff_eta(double r, double radius);

struct RunOptions {
  double t_end = 0;
  double safety = 0.25;
  int record_every = 10;
  int m = 6;
  int p = 1;
  double delta = 0;
  double eps_ceiling = 0.5;
};

struct RunResult {
  FlowState final_state;
  std::vector<DiagnosticsRecord> series;
};

using StepObserver = std::function<void(const FlowState& prev, const FlowState& next)>;

// Advances the data to t_end, recomputing the step bound every step and
// recording diagnostics every record_every steps plus the final step.
// Throws Blowup on positivity loss and ClosenessCeilingExceeded when the
// recorded closeness crosses the ceiling.
RunResult run(const InitialData& init, const RunOptions& opt,
              const StepObserver& observer = {});

}  // namespace hflow
