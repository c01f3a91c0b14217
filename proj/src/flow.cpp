#include "hflow/flow.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hflow/errors.hpp"
#include "hflow/geometry.hpp"

namespace hflow {

InitialData make_initial_data(MetricField g0) {
  InitialData init;
  init.epsilon0 = closeness_epsilon(g0);
  if (!(init.epsilon0 < 1.0))
    throw std::invalid_argument("make_initial_data: closeness must stay below 1");
  init.g0 = std::move(g0);
  return init;
}

SymMatrix hflow_rhs_assemble(const SymMatrix& inv, const double dg[][kMaxSymComp],
                             const double ddg[][kMaxSymComp], int n) {
  // Contractions of one raised index; R and W2 carry the derivative axis first.
  //   R[x][y][z]  = dg[x][(y,q)] inv(q,z)
  //   U[c][(k,l)] = inv(c,a) dg[a][(k,l)]
  //   W2[j][q][b] = inv(q,p) R[j][p][b]
  double R[kMaxDim][kMaxDim][kMaxDim];
  double U[kMaxDim][kMaxSymComp];
  double W2[kMaxDim][kMaxDim][kMaxDim];

  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        double s = 0;
        for (int q = 0; q < n; ++q) s += dg[x][sym_index(n, y, q)] * inv(q, z);
        R[x][y][z] = s;
      }

  for (int c = 0; c < n; ++c)
    for (int kl = 0; kl < sym_comp_count(n); ++kl) {
      double s = 0;
      for (int a = 0; a < n; ++a) s += inv(c, a) * dg[a][kl];
      U[c][kl] = s;
    }

  for (int j = 0; j < n; ++j)
    for (int q = 0; q < n; ++q)
      for (int b = 0; b < n; ++b) {
        double s = 0;
        for (int p = 0; p < n; ++p) s += inv(q, p) * R[j][p][b];
        W2[j][q][b] = s;
      }

  double full[kMaxDim][kMaxDim];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double lap = 0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          lap += inv(a, b) * ddg[sym_index(n, a, b)][sym_index(n, i, j)];

      double s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0;
      for (int b = 0; b < n; ++b) {
        for (int p = 0; p < n; ++p) {
          s1 += R[i][p][b] * R[j][b][p];
          s2 += U[b][sym_index(n, j, p)] * U[p][sym_index(n, i, b)];
          s3 += U[b][sym_index(n, j, p)] * R[b][i][p];
          s4 += W2[j][p][b] * dg[b][sym_index(n, i, p)];
          s5 += W2[i][p][b] * dg[b][sym_index(n, j, p)];
        }
      }
      full[i][j] = lap + 0.5 * (s1 + 2.0 * s2 - 2.0 * s3 - 2.0 * s4 - 2.0 * s5);
    }
  }

  SymMatrix out(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) out.entry(i, j) = 0.5 * (full[i][j] + full[j][i]);
  return out;
}

namespace {

// Gathers first and second central differences of every metric component.
void metric_derivatives(const MetricField& g, const NodeIndex& at,
                        double dg[][kMaxSymComp], double ddg[][kMaxSymComp]) {
  const Grid& gr = g.grid();
  const int n = gr.dim();
  const int nc = sym_comp_count(n);
  const double dx = gr.spacing();
  const double inv2dx = 1.0 / (2.0 * dx);
  const double invdx2 = 1.0 / (dx * dx);

  const SymMatrix c0 = g.matrix_at(at);
  SymMatrix plus[kMaxDim], minus[kMaxDim];
  for (int a = 0; a < n; ++a) {
    plus[a] = g.matrix_at(shifted(at, a, 1));
    minus[a] = g.matrix_at(shifted(at, a, -1));
  }

  for (int a = 0; a < n; ++a)
    for (int c = 0; c < nc; ++c)
      dg[a][c] = (plus[a].comp(c) - minus[a].comp(c)) * inv2dx;

  for (int a = 0; a < n; ++a)
    for (int c = 0; c < nc; ++c)
      ddg[sym_index(n, a, a)][c] =
          (plus[a].comp(c) - 2.0 * c0.comp(c) + minus[a].comp(c)) * invdx2;

  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const SymMatrix pp = g.matrix_at(shifted(shifted(at, a, 1), b, 1));
      const SymMatrix pm = g.matrix_at(shifted(shifted(at, a, 1), b, -1));
      const SymMatrix mp = g.matrix_at(shifted(shifted(at, a, -1), b, 1));
      const SymMatrix mm = g.matrix_at(shifted(shifted(at, a, -1), b, -1));
      for (int c = 0; c < nc; ++c)
        ddg[sym_index(n, a, b)][c] =
            (pp.comp(c) - pm.comp(c) - mp.comp(c) + mm.comp(c)) * 0.25 * invdx2;
    }
  }
}

MetricField rhs_field(const MetricField& g) {
  const Grid& gr = g.grid();
  MetricField out = MetricField::identity(gr);
  const int nc = g.comp_count();
  double dg[kMaxDim][kMaxSymComp];
  double ddg[kMaxSymComp][kMaxSymComp];
  for (std::size_t f = 0; f < gr.node_count(); ++f) {
    const NodeIndex idx = gr.unflat(f);
    if (gr.boundary() == Boundary::DirichletToH && gr.on_boundary_ring(idx)) {
      for (int c = 0; c < nc; ++c) out.comp(f, c) = 0.0;
      continue;
    }
    metric_derivatives(g, idx, dg, ddg);
    const SymMatrix inv = inverse_metric(g.matrix(f));
    out.set(f, hflow_rhs_assemble(inv, dg, ddg, gr.dim()));
  }
  return out;
}

void axpy(MetricField& out, const MetricField& base, double a, const MetricField& k) {
  const std::size_t total = base.data().size();
  for (std::size_t i = 0; i < total; ++i)
    out.data()[i] = base.data()[i] + a * k.data()[i];
}

}  // namespace

SymMatrix hflow_rhs(const MetricField& g, const NodeIndex& at) {
  double dg[kMaxDim][kMaxSymComp];
  double ddg[kMaxSymComp][kMaxSymComp];
  metric_derivatives(g, at, dg, ddg);
  const SymMatrix inv = inverse_metric(g.matrix_at(at));
  return hflow_rhs_assemble(inv, dg, ddg, g.grid().dim());
}

double cfl_dt(const FlowState& s, double safety) {
  if (!(safety > 0.0) || safety > 1.0)
    throw std::invalid_argument("cfl_dt: safety must lie in (0, 1]");
  const Grid& gr = s.grid();
  double sup_inv = 0;
  for (std::size_t f = 0; f < gr.node_count(); ++f) {
    const EigenSpectrum e = sym_eigenvalues(s.g.matrix(f));
    if (e.min() <= kPositivityFloor)
      throw NonPositiveDefinite("cfl_dt: metric not positive definite");
    sup_inv = std::max(sup_inv, 1.0 / e.min());
  }
  const double dx = gr.spacing();
  return safety * dx * dx / (2.0 * gr.dim() * sup_inv);
}

FlowState step(const FlowState& s, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("step: dt must be positive");
  const Grid& gr = s.grid();

  const MetricField k1 = rhs_field(s.g);
  MetricField mid = s.g;
  axpy(mid, s.g, 0.5 * dt, k1);
  const MetricField k2 = rhs_field(mid);
  MetricField out = s.g;
  axpy(out, s.g, dt, k2);

  for (std::size_t f = 0; f < gr.node_count(); ++f) {
    const EigenSpectrum e = sym_eigenvalues(out.matrix(f));
    if (e.min() <= kPositivityFloor)
      throw NonPositiveDefinite("step: positivity lost after update");
  }

  FlowState next;
  next.g = std::move(out);
  next.t = s.t + dt;
  next.step = s.step + 1;
  return next;
}

double cutoff_eta(double r, double radius) {
  if (r <= radius - 2.0) return 1.0;
  if (r >= radius - 1.0) return 0.0;
  return 0.5 * (1.0 + std::cos(M_PI * (r - (radius - 2.0))));
}

MetricField cutoff_initial(const MetricField& g0, double radius) {
  const Grid& gr = g0.grid();
  if (gr.boundary() != Boundary::DirichletToH)
    throw std::invalid_argument("cutoff_initial: grid must be DirichletToH");
  if (radius < 2.0)
    throw std::invalid_argument("cutoff_initial: radius too small for the grid");
  double half_min = std::numeric_limits<double>::infinity();
  for (int d = 0; d < gr.dim(); ++d)
    half_min = std::min(half_min, 0.5 * gr.axis_span(d));
  if (radius - 1.0 > half_min + 1e-12)
    throw std::invalid_argument("cutoff_initial: ramp does not fit inside the grid");

  const auto center = gr.center();
  const int n = gr.dim();
  MetricField out = g0;
  for (std::size_t f = 0; f < gr.node_count(); ++f) {
    const NodeIndex idx = gr.unflat(f);
    double r2 = 0;
    for (int d = 0; d < n; ++d) {
      const double dxd = gr.coord(idx, d) - center[d];
      r2 += dxd * dxd;
    }
    const double eta = cutoff_eta(std::sqrt(r2), radius);
    SymMatrix m = g0.matrix(f);
    m *= eta;
    for (int i = 0; i < n; ++i) m.entry(i, i) += 1.0 - eta;
    out.set(f, m);
  }
  return out;
}

RunResult run(const InitialData& init, const RunOptions& opt,
              const StepObserver& observer) {
  if (opt.record_every < 1)
    throw std::invalid_argument("run: record_every must be at least 1");
  if (!(opt.t_end >= 0)) throw std::invalid_argument("run: t_end must be nonnegative");

  RunResult res;
  res.final_state = FlowState{init.g0, 0.0, 0};
  auto record = [&](const FlowState& s) {
    DiagnosticsRecord rec = compute_record(s.g, s.t, opt.m, opt.p, opt.delta);
    if (rec.eps > opt.eps_ceiling)
      throw ClosenessCeilingExceeded("run: closeness ceiling exceeded", s.t, rec.eps);
    res.series.push_back(rec);
  };
  record(res.final_state);

  bool done = opt.t_end <= 0;
  while (!done) {
    double dt = cfl_dt(res.final_state, opt.safety);
    const double remaining = opt.t_end - res.final_state.t;
    if (dt >= remaining) {
      dt = remaining;
      done = true;
    }
    FlowState prev = std::move(res.final_state);
    try {
      res.final_state = step(prev, dt);
    } catch (const NonPositiveDefinite& e) {
      throw Blowup(std::string("run: ") + e.what(), prev.t, prev.step);
    }
    if (observer) observer(prev, res.final_state);
    if (done || res.final_state.step % opt.record_every == 0) record(res.final_state);
  }
  return res;
}

}  // namespace hflow
