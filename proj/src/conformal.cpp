#include "hflow/conformal.hpp"

#include <cmath>
#include <stdexcept>

#include "hflow/diagnostics.hpp"

namespace hflow {

ConformalField make_conformal(const Grid& g) {
  if (g.dim() != 2)
    throw std::invalid_argument("make_conformal: grid must be two dimensional");
  ConformalField c;
  c.u = ScalarField(g);
  return c;
}

double conformal_rhs(const ConformalField& c, const NodeIndex& at) {
  const Grid& gr = c.grid();
  const double dx = gr.spacing();
  const auto s = c.u.sampler();
  const double lap = (s(shifted(at, 0, 1)) - 2.0 * s(at) + s(shifted(at, 0, -1)) +
                      s(shifted(at, 1, 1)) - 2.0 * s(at) + s(shifted(at, 1, -1))) /
                     (dx * dx);
  return std::exp(-s(at)) * lap;
}

double conformal_cfl_dt(const ConformalField& c, double safety) {
  if (!(safety > 0.0) || safety > 1.0)
    throw std::invalid_argument("conformal_cfl_dt: safety must lie in (0, 1]");
  const Grid& gr = c.grid();
  double sup_coeff = 0;
  for (std::size_t f = 0; f < gr.node_count(); ++f)
    sup_coeff = std::max(sup_coeff, std::exp(-c.u[f]));
  const double dx = gr.spacing();
  return safety * dx * dx / (4.0 * sup_coeff);
}

namespace {

ScalarField rhs_scalar(const ConformalField& c) {
  const Grid& gr = c.grid();
  ScalarField out(gr);
  for (std::size_t f = 0; f < gr.node_count(); ++f) {
    const NodeIndex idx = gr.unflat(f);
    if (gr.boundary() == Boundary::DirichletToH && gr.on_boundary_ring(idx)) continue;
    out[f] = conformal_rhs(c, idx);
  }
  return out;
}

}  // namespace

ConformalField step_conformal(const ConformalField& c, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("step_conformal: dt must be positive");
  const Grid& gr = c.grid();

  const ScalarField k1 = rhs_scalar(c);
  ConformalField mid = c;
  for (std::size_t f = 0; f < gr.node_count(); ++f) mid.u[f] = c.u[f] + 0.5 * dt * k1[f];
  const ScalarField k2 = rhs_scalar(mid);

  ConformalField out = c;
  for (std::size_t f = 0; f < gr.node_count(); ++f) out.u[f] = c.u[f] + dt * k2[f];
  out.t = c.t + dt;
  out.step = c.step + 1;
  return out;
}

double conformal_monotone(const ConformalField& c, int p, double delta,
                          bool negative_part) {
  if (p < 1) throw std::invalid_argument("conformal_monotone: p must be at least 1");
  const Grid& gr = c.grid();
  const double cell = gr.spacing() * gr.spacing();
  const double sign = negative_part ? -1.0 : 1.0;
  double acc = 0;
  for (std::size_t f = 0; f < gr.node_count(); ++f) {
    const double excess = sign * c.u[f] - delta;
    if (excess > 0) acc += ipow(excess, p);
  }
  return acc * cell / p;
}

}  // namespace hflow
