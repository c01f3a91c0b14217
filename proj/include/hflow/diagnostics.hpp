#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hflow/fields.hpp"
#include "hflow/symmetric.hpp"

namespace hflow {

struct PhiPsi {
  double phi = 0;  // sum of eigenvalues^-m
  double psi = 0;  // sum of eigenvalues^m
};

// Integer power by repeated multiplication; keeps results reproducible
// across libm implementations.
double ipow(double x, int e);

// phi and psi of one nodal metric; requires positive eigenvalues.
PhiPsi phi_psi(const SymMatrix& g, int m);

// Pinching deviation Phi = phi + psi - 2n, evaluated as
// sum_i (lambda_i^m - 1)^2 / lambda_i^m, which is nonnegative exactly and
// vanishes iff every eigenvalue equals one.
double phi_deviation(const SymMatrix& g, int m);

// Smallest eps with (1+eps)^-1 <= lambda <= 1+eps over all nodes:
// max over nodes of max(lambda_max, 1/lambda_min) - 1.
double closeness_epsilon(const MetricField& g);

// Largest |lambda_i - 1| over all nodes.
double sup_deviation(const MetricField& g);

// max over nodes of Phi.
double max_phi_deviation(const MetricField& g, int m);

// I = (1/p) * sum over nodes of (Phi - delta)_+^p * cell volume.
double integral_I(const MetricField& g, int m, int p, double delta);

struct DissipationReport {
  // max over interior nodes of (d/dt) Phi - g^{ab} dd_ab Phi (signed).
  double max_violation = 0;
  // min over nodes with gradient mass above the floor of
  // -violation / sum (dg)^2; absent when no node qualifies.
  std::optional<double> min_margin;
  double dt_probe = 0;
};

// Compares the one-step time difference of Phi against its metric Laplacian.
// gnext must be the metric advanced from g by dt_probe.
DissipationReport dissipation_check(const MetricField& g, const MetricField& gnext,
                                    double dt_probe, int m,
                                    double denom_floor = 1e-12);

// Sup over interior nodes of the Frobenius norm of all k-th partials of g,
// k = 1..max_order (max_order <= 2). Returns {grad1, grad2}.
std::array<double, 2> sup_grad_norms(const MetricField& g, int max_order = 2);

struct FitResult {
  double exponent = 0;
  double window_lo = 0, window_hi = 0;
  double residual_rms = 0;
  int samples = 0;
  double ref_exponent_base = 0;      // n / (2 (2p + n))
  double ref_exponent_improved = 0;  // n / (4p)
};

// Least-squares slope of log(value) against log(t) over the window.
// Uses samples with value > 1e-12; fewer than 8 usable samples raises
// InsufficientData.
FitResult fit_decay(std::span<const std::pair<double, double>> series, double t_lo,
                    double t_hi, int n, int p);

// One row of the recorded time series.
struct DiagnosticsRecord {
  double t = 0;
  double eps = 0;
  double sup_dev = 0;
  double max_phi = 0;
  double integral_i = 0;
  double grad1 = 0;
  double grad2 = 0;
  std::optional<double> sup_drift;
  std::optional<double> rf_residual;
};

DiagnosticsRecord compute_record(const MetricField& g, double t, int m, int p,
                                 double delta);

}  // namespace hflow
