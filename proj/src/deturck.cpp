#include "hflow/deturck.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hflow/errors.hpp"

namespace hflow {

namespace {

// Multilinear interpolation with the position given in lattice units.
// Mirrors hflow::interpolate but avoids the physical/lattice round trip so
// that markers sitting exactly on nodes reproduce nodal values bit-for-bit.
template <class F>
double interp_units(const Grid& g, F&& f, const double* u) {
  NodeIndex base{};
  double w[kMaxDim];
  for (int d = 0; d < g.dim(); ++d) {
    double s = u[d];
    if (g.boundary() == Boundary::DirichletToH) {
      const double hi = static_cast<double>(g.extent(d) - 1);
      const double slack = 1e-12 * (hi > 0 ? hi : 1.0);
      if (s < -slack || s > hi + slack)
        throw PositionOutsideDomain("interp_units: position outside bounded domain");
      if (s < 0) s = 0;
      if (s > hi) s = hi;
      int i0 = static_cast<int>(std::floor(s));
      if (i0 > g.extent(d) - 2) i0 = g.extent(d) - 2;
      base[d] = i0;
      w[d] = s - i0;
    } else {
      base[d] = static_cast<int>(std::floor(s));
      w[d] = s - base[d];
    }
  }
  double acc = 0;
  const int corners = 1 << g.dim();
  for (int c = 0; c < corners; ++c) {
    NodeIndex idx = base;
    double weight = 1;
    for (int d = 0; d < g.dim(); ++d) {
      if (c & (1 << d)) {
        idx[d] += 1;
        weight *= w[d];
      } else {
        weight *= 1.0 - w[d];
      }
    }
    if (weight != 0.0) acc += weight * f(idx);
  }
  return acc;
}

}  // namespace

DiffeoField identity_diffeo(const Grid& g) {
  DiffeoField d;
  d.grid = g;
  d.pos.resize(g.node_count() * static_cast<std::size_t>(g.dim()));
  for (std::size_t f = 0; f < g.node_count(); ++f) {
    const NodeIndex idx = g.unflat(f);
    // Markers live in lattice units; integers mark untouched nodes exactly.
    for (int a = 0; a < g.dim(); ++a) d.coord(f, a) = static_cast<double>(idx[a]);
  }
  return d;
}

DiffeoField advect(const DiffeoField& d, const FlowState& a, const FlowState& b) {
  const Grid& gr = d.grid;
  if (!gr.same_layout(a.grid()) || !gr.same_layout(b.grid()))
    throw std::invalid_argument("advect: grid layout mismatch");
  const double dt = b.t - a.t;
  if (!(dt > 0)) throw std::invalid_argument("advect: states must be dt apart");

  const int n = gr.dim();
  const double inv_dx = 1.0 / gr.spacing();
  const VectorField va = deturck_field(a.g);
  const VectorField vb = deturck_field(b.g);
  VectorField vmid(gr);
  for (std::size_t i = 0; i < vmid.data().size(); ++i)
    vmid.data()[i] = 0.5 * (va.data()[i] + vb.data()[i]);

  DiffeoField out = d;
  out.t = b.t;
  try {
    for (std::size_t f = 0; f < gr.node_count(); ++f) {
      double u0[kMaxDim], um[kMaxDim];
      for (int c = 0; c < n; ++c) u0[c] = d.coord(f, c);
      // Markers run against the gauge field; only then does the pullback
      // cancel the reparametrization terms of the evolution.
      for (int c = 0; c < n; ++c)
        um[c] = u0[c] - 0.5 * dt * interp_units(gr, va.comp_sampler(c), u0) * inv_dx;
      for (int c = 0; c < n; ++c)
        out.coord(f, c) =
            u0[c] - dt * interp_units(gr, vmid.comp_sampler(c), um) * inv_dx;
      if (gr.boundary() == Boundary::DirichletToH) {
        for (int c = 0; c < n; ++c)
          if (out.coord(f, c) < 0 || out.coord(f, c) > gr.extent(c) - 1)
            throw MarkerEscaped("advect: marker left the bounded domain");
      }
    }
  } catch (const PositionOutsideDomain&) {
    throw MarkerEscaped("advect: marker stencil left the bounded domain");
  }
  return out;
}

DriftStats drift_stats(const DiffeoField& d, double radius) {
  const Grid& gr = d.grid;
  const int n = gr.dim();
  const auto center = gr.center();
  DriftStats stats;
  for (std::size_t f = 0; f < gr.node_count(); ++f) {
    const NodeIndex idx = gr.unflat(f);
    double drift_sq = 0;
    double start_sq = 0;
    for (int a = 0; a < n; ++a) {
      double du = d.coord(f, a) - idx[a];
      if (gr.boundary() == Boundary::Periodic) {
        const double period = static_cast<double>(gr.extent(a));
        du -= period * std::round(du / period);
      }
      const double dp = du * gr.spacing();
      drift_sq += dp * dp;
      const double sp = gr.coord(idx, a) - center[a];
      start_sq += sp * sp;
    }
    const double drift = std::sqrt(drift_sq);
    stats.sup_drift = std::max(stats.sup_drift, drift);
    if (start_sq > radius * radius)
      stats.sup_drift_outside = std::max(stats.sup_drift_outside, drift);
  }
  return stats;
}

namespace {

// Displacement sampler in lattice units; ghost nodes of bounded grids carry
// the identity map, periodic neighbors pick up the winding offset.
double displacement_at(const DiffeoField& d, const NodeIndex& idx, int comp) {
  const Grid& gr = d.grid;
  std::size_t f;
  if (gr.resolve(idx, f)) {
    const NodeIndex real = gr.unflat(f);
    return d.coord(f, comp) - real[comp];
  }
  return 0.0;
}

void jacobian_at(const DiffeoField& d, const NodeIndex& idx, double j[][kMaxDim]) {
  const Grid& gr = d.grid;
  const int n = gr.dim();
  // J^s_a = delta + d(disp_s)/d(y_a); displacement is periodic across wraps.
  for (int s = 0; s < n; ++s) {
    const auto samp = [&](const NodeIndex& q) { return displacement_at(d, q, s); };
    for (int a = 0; a < n; ++a) {
      const double der =
          (samp(shifted(idx, a, 1)) - samp(shifted(idx, a, -1))) / 2.0;
      j[s][a] = (s == a ? 1.0 : 0.0) + der;
    }
  }
}

}  // namespace

double min_jacobian_det(const DiffeoField& d) {
  const Grid& gr = d.grid;
  double jm[kMaxDim][kMaxDim];
  double min_det = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < gr.node_count(); ++f) {
    jacobian_at(d, gr.unflat(f), jm);
    min_det = std::min(min_det, dense_det(jm, gr.dim()));
  }
  return min_det;
}

MetricField pullback(const DiffeoField& d, const MetricField& g) {
  const Grid& gr = d.grid;
  if (!gr.same_layout(g.grid()))
    throw std::invalid_argument("pullback: grid layout mismatch");
  const int n = gr.dim();

  MetricField out = MetricField::identity(gr);
  double jm[kMaxDim][kMaxDim];
  for (std::size_t f = 0; f < gr.node_count(); ++f) {
    const NodeIndex idx = gr.unflat(f);
    jacobian_at(d, idx, jm);
    if (dense_det(jm, n) <= 0.0)
      throw DegenerateJacobian("pullback: jacobian determinant not positive");

    double u[kMaxDim];
    for (int c = 0; c < n; ++c) u[c] = d.coord(f, c);
    SymMatrix gi(n);
    for (int s = 0; s < n; ++s)
      for (int k = s; k < n; ++k)
        gi.entry(s, k) = interp_units(gr, g.comp_sampler(s, k), u);

    SymMatrix pb(n);
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        double acc = 0;
        for (int s = 0; s < n; ++s)
          for (int k = 0; k < n; ++k) acc += jm[s][a] * jm[k][b] * gi(s, k);
        pb.entry(a, b) = acc;
      }
    }
    out.set(f, pb);
  }
  return out;
}

double rf_residual(const MetricField& prev, const MetricField& next, double dt) {
  const Grid& gr = prev.grid();
  if (!gr.same_layout(next.grid()))
    throw std::invalid_argument("rf_residual: grid layout mismatch");
  if (!(dt > 0)) throw std::invalid_argument("rf_residual: dt must be positive");
  const int n = gr.dim();

  MetricField mid = prev;
  for (std::size_t i = 0; i < mid.data().size(); ++i)
    mid.data()[i] = 0.5 * (prev.data()[i] + next.data()[i]);

  // The curvature stencil reaches two rings deep, so bounded grids only
  // score nodes whose full stencil stays on real data.
  double sup = 0;
  for (std::size_t f = 0; f < gr.node_count(); ++f) {
    const NodeIndex idx = gr.unflat(f);
    if (!gr.interior(idx, 2)) continue;
    const SymMatrix ric = ricci(mid, idx);
    double frob = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double r = (next.comp(f, sym_index(n, i, j)) -
                          prev.comp(f, sym_index(n, i, j))) /
                             dt +
                         2.0 * ric(i, j);
        frob += r * r;
      }
    sup = std::max(sup, std::sqrt(frob));
  }
  return sup;
}

}  // namespace hflow
