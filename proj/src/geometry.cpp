#include "hflow/geometry.hpp"

#include <cmath>

#include "hflow/errors.hpp"

namespace hflow {

SymMatrix inverse_metric(const SymMatrix& g) {
  const int n = g.dim();
  const EigenSpectrum e = sym_eigenvalues(g);
  if (e.min() <= kPositivityFloor)
    throw NonPositiveDefinite("inverse_metric: eigenvalue at or below positivity floor");

  // Gauss-Jordan with partial pivoting; conditioning is benign for
  // near-background metrics, pivoting keeps the general case safe.
  double a[kMaxDim][2 * kMaxDim] = {};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[i][j] = g(i, j);
    a[i][n + i] = 1.0;
  }
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (piv != col)
      for (int k = 0; k < 2 * n; ++k) std::swap(a[col][k], a[piv][k]);
    const double inv_p = 1.0 / a[col][col];
    for (int k = 0; k < 2 * n; ++k) a[col][k] *= inv_p;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (int k = 0; k < 2 * n; ++k) a[r][k] -= f * a[col][k];
    }
  }
  SymMatrix inv(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) inv.entry(i, j) = 0.5 * (a[i][n + j] + a[j][n + i]);
  return inv;
}

Christoffel christoffel(const MetricField& g, const NodeIndex& at) {
  const int n = g.grid().dim();
  const SymMatrix inv = inverse_metric(g.matrix_at(at));
  const double inv2dx = 1.0 / (2.0 * g.grid().spacing());

  // dg[l][(i,j)] = central difference of g_ij along axis l.
  double dg[kMaxDim][kMaxSymComp];
  for (int l = 0; l < n; ++l) {
    const SymMatrix p = g.matrix_at(shifted(at, l, 1));
    const SymMatrix m = g.matrix_at(shifted(at, l, -1));
    for (int c = 0; c < sym_comp_count(n); ++c)
      dg[l][c] = (p.comp(c) - m.comp(c)) * inv2dx;
  }

  Christoffel gam;
  gam.n = n;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double s = 0;
        for (int l = 0; l < n; ++l) {
          s += inv(k, l) * (dg[i][sym_index(n, l, j)] + dg[j][sym_index(n, l, i)] -
                            dg[l][sym_index(n, i, j)]);
        }
        gam.entry(k, i, j) = 0.5 * s;
      }
    }
  }
  return gam;
}

SymMatrix ricci(const MetricField& g, const NodeIndex& at) {
  const int n = g.grid().dim();
  const double inv2dx = 1.0 / (2.0 * g.grid().spacing());
  const Christoffel c0 = christoffel(g, at);

  // Connection on the axis neighbors; the lower-pair trace comes along free.
  Christoffel cp[kMaxDim], cm[kMaxDim];
  for (int a = 0; a < n; ++a) {
    cp[a] = christoffel(g, shifted(at, a, 1));
    cm[a] = christoffel(g, shifted(at, a, -1));
  }

  SymMatrix r(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0;
      for (int k = 0; k < n; ++k) s += (cp[k](k, i, j) - cm[k](k, i, j)) * inv2dx;
      for (int k = 0; k < n; ++k) s -= (cp[i](k, k, j) - cm[i](k, k, j)) * inv2dx;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          s += c0(k, k, l) * c0(l, i, j) - c0(k, i, l) * c0(l, k, j);
      if (i <= j) {
        r.entry(i, j) = s;
      } else {
        r.entry(j, i) = 0.5 * (r(j, i) + s);
      }
    }
  }
  return r;
}

GaugeVector deturck_vector(const MetricField& g, const NodeIndex& at) {
  const int n = g.grid().dim();
  const SymMatrix gc = g.matrix_at(at);
  const SymMatrix inv = inverse_metric(gc);
  const Christoffel c = christoffel(g, at);

  GaugeVector v;
  v.n = n;
  for (int a = 0; a < n; ++a) {
    double s = 0;
    for (int r = 0; r < n; ++r)
      for (int t = 0; t < n; ++t) s += inv(r, t) * c(a, r, t);
    v.up[a] = s;
  }
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int k = 0; k < n; ++k) s += gc(i, k) * v.up[k];
    v.down[i] = s;
  }
  return v;
}

SymMatrix rhs_ricci_deturck(const MetricField& g, const NodeIndex& at) {
  const int n = g.grid().dim();
  const double inv2dx = 1.0 / (2.0 * g.grid().spacing());
  const SymMatrix ric = ricci(g, at);
  const Christoffel c0 = christoffel(g, at);
  const GaugeVector v0 = deturck_vector(g, at);

  // dv[i][j] = central difference of the covariant component V_j along axis i.
  double dv[kMaxDim][kMaxDim];
  for (int i = 0; i < n; ++i) {
    const GaugeVector vp = deturck_vector(g, shifted(at, i, 1));
    const GaugeVector vm = deturck_vector(g, shifted(at, i, -1));
    for (int j = 0; j < n; ++j) dv[i][j] = (vp.down[j] - vm.down[j]) * inv2dx;
  }

  SymMatrix out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double cov_i = dv[i][j];
      double cov_j = dv[j][i];
      for (int k = 0; k < n; ++k) {
        cov_i -= c0(k, i, j) * v0.down[k];
        cov_j -= c0(k, j, i) * v0.down[k];
      }
      out.entry(i, j) = -2.0 * ric(i, j) + cov_i + cov_j;
    }
  }
  return out;
}

VectorField deturck_field(const MetricField& g) {
  VectorField v(g.grid());
  const int n = g.grid().dim();
  for (std::size_t f = 0; f < g.grid().node_count(); ++f) {
    const GaugeVector gv = deturck_vector(g, g.grid().unflat(f));
    for (int a = 0; a < n; ++a) v.comp(f, a) = gv.up[a];
  }
  return v;
}

}  // namespace hflow
