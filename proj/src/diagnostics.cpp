#include "hflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hflow/errors.hpp"
#include "hflow/geometry.hpp"

namespace hflow {

double ipow(double x, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= x;
  return r;
}

PhiPsi phi_psi(const SymMatrix& g, int m) {
  const EigenSpectrum e = sym_eigenvalues(g);
  if (e.min() <= kPositivityFloor)
    throw NonPositiveDefinite("phi_psi: eigenvalue at or below positivity floor");
  PhiPsi r;
  for (int i = 0; i < e.n; ++i) {
    const double lm = ipow(e.lambda[i], m);
    r.phi += 1.0 / lm;
    r.psi += lm;
  }
  return r;
}

namespace {

double phi_from_spectrum(const EigenSpectrum& e, int m) {
  double s = 0;
  for (int i = 0; i < e.n; ++i) {
    const double lm = ipow(e.lambda[i], m);
    const double d = lm - 1.0;
    s += d * d / lm;
  }
  return s;
}

}  // namespace

double phi_deviation(const SymMatrix& g, int m) {
  const EigenSpectrum e = sym_eigenvalues(g);
  if (e.min() <= kPositivityFloor)
    throw NonPositiveDefinite("phi_deviation: eigenvalue at or below positivity floor");
  return phi_from_spectrum(e, m);
}

double closeness_epsilon(const MetricField& g) {
  double eps = 0;
  for (std::size_t f = 0; f < g.grid().node_count(); ++f) {
    const EigenSpectrum e = sym_eigenvalues(g.matrix(f));
    if (e.min() <= kPositivityFloor)
      throw NonPositiveDefinite("closeness_epsilon: metric not positive definite");
    eps = std::max(eps, std::max(e.max(), 1.0 / e.min()) - 1.0);
  }
  return eps;
}

double sup_deviation(const MetricField& g) {
  double dev = 0;
  for (std::size_t f = 0; f < g.grid().node_count(); ++f) {
    const EigenSpectrum e = sym_eigenvalues(g.matrix(f));
    for (int i = 0; i < e.n; ++i) dev = std::max(dev, std::abs(e.lambda[i] - 1.0));
  }
  return dev;
}

double max_phi_deviation(const MetricField& g, int m) {
  double mp = 0;
  for (std::size_t f = 0; f < g.grid().node_count(); ++f)
    mp = std::max(mp, phi_deviation(g.matrix(f), m));
  return mp;
}

double integral_I(const MetricField& g, int m, int p, double delta) {
  const Grid& gr = g.grid();
  double cell = 1.0;
  for (int d = 0; d < gr.dim(); ++d) cell *= gr.spacing();
  double acc = 0;
  for (std::size_t f = 0; f < gr.node_count(); ++f) {
    const double excess = phi_deviation(g.matrix(f), m) - delta;
    if (excess > 0) acc += ipow(excess, p);
  }
  return acc * cell / p;
}

DissipationReport dissipation_check(const MetricField& g, const MetricField& gnext,
                                    double dt_probe, int m, double denom_floor) {
  const Grid& gr = g.grid();
  const int n = gr.dim();

  ScalarField phi(gr);
  for (std::size_t f = 0; f < gr.node_count(); ++f)
    phi[f] = phi_deviation(g.matrix(f), m);

  DissipationReport rep;
  rep.dt_probe = dt_probe;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  const auto phi_s = phi.sampler();
  for (std::size_t f = 0; f < gr.node_count(); ++f) {
    const NodeIndex idx = gr.unflat(f);
    if (!gr.interior(idx, 1)) continue;
    const SymMatrix inv = inverse_metric(g.matrix(f));
    double lap = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) lap += inv(a, b) * diff2(gr, phi_s, a, b, idx);
    const double dphi_dt = (phi_deviation(gnext.matrix(f), m) - phi[f]) / dt_probe;
    const double violation = dphi_dt - lap;
    rep.max_violation = std::max(rep.max_violation, violation);

    double grad_sq = 0;
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          const double d = diff1(gr, g.comp_sampler(i, j), a, idx);
          grad_sq += (i == j ? 1.0 : 2.0) * d * d;
        }
    if (grad_sq > denom_floor) {
      const double margin = -violation / grad_sq;
      if (!rep.min_margin || margin < *rep.min_margin) rep.min_margin = margin;
    }
  }
  return rep;
}

std::array<double, 2> sup_grad_norms(const MetricField& g, int max_order) {
  const Grid& gr = g.grid();
  const int n = gr.dim();
  std::array<double, 2> out{0.0, 0.0};
  for (std::size_t f = 0; f < gr.node_count(); ++f) {
    const NodeIndex idx = gr.unflat(f);
    if (!gr.interior(idx, 1)) continue;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double w = i == j ? 1.0 : 2.0;
        const auto samp = g.comp_sampler(i, j);
        for (int a = 0; a < n; ++a) {
          const double d = diff1(gr, samp, a, idx);
          s1 += w * d * d;
        }
        if (max_order >= 2) {
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
              const double d = diff2(gr, samp, a, b, idx);
              s2 += w * d * d;
            }
        }
      }
    }
    out[0] = std::max(out[0], std::sqrt(s1));
    if (max_order >= 2) out[1] = std::max(out[1], std::sqrt(s2));
  }
  return out;
}

FitResult fit_decay(std::span<const std::pair<double, double>> series, double t_lo,
                    double t_hi, int n, int p) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, v] : series) {
    if (t < t_lo || t > t_hi) continue;
    if (!(v > 1e-12) || !(t > 0)) continue;
    pts.emplace_back(std::log(t), std::log(v));
  }
  if (pts.size() < 8)
    throw InsufficientData("fit_decay: fewer than 8 usable samples in window");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double nn = static_cast<double>(pts.size());
  const double denom = nn * sxx - sx * sx;
  const double slope = (nn * sxy - sx * sy) / denom;
  const double icept = (sy - slope * sx) / nn;

  double rss = 0;
  for (const auto& [x, y] : pts) {
    const double r = y - (icept + slope * x);
    rss += r * r;
  }

  FitResult fit;
  fit.exponent = slope;
  fit.window_lo = t_lo;
  fit.window_hi = t_hi;
  fit.residual_rms = std::sqrt(rss / nn);
  fit.samples = static_cast<int>(pts.size());
  fit.ref_exponent_base = n / (2.0 * (2.0 * p + n));
  fit.ref_exponent_improved = n / (4.0 * p);
  return fit;
}

DiagnosticsRecord compute_record(const MetricField& g, double t, int m, int p,
                                 double delta) {
  const Grid& gr = g.grid();
  DiagnosticsRecord rec;
  rec.t = t;

  double cell = 1.0;
  for (int d = 0; d < gr.dim(); ++d) cell *= gr.spacing();

  // One eigenvalue sweep feeds every spectral quantity of the record.
  double acc = 0;
  for (std::size_t f = 0; f < gr.node_count(); ++f) {
    const EigenSpectrum e = sym_eigenvalues(g.matrix(f));
    if (e.min() <= kPositivityFloor)
      throw NonPositiveDefinite("compute_record: metric not positive definite");
    rec.eps = std::max(rec.eps, std::max(e.max(), 1.0 / e.min()) - 1.0);
    for (int i = 0; i < e.n; ++i)
      rec.sup_dev = std::max(rec.sup_dev, std::abs(e.lambda[i] - 1.0));
    const double phi = phi_from_spectrum(e, m);
    rec.max_phi = std::max(rec.max_phi, phi);
    const double excess = phi - delta;
    if (excess > 0) acc += ipow(excess, p);
  }
  rec.integral_i = acc * cell / p;

  const auto grads = sup_grad_norms(g, 2);
  rec.grad1 = grads[0];
  rec.grad2 = grads[1];
  return rec;
}

}  // namespace hflow
