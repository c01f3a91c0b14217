#pragma once

#include "hflow/fields.hpp"
#include "hflow/symmetric.hpp"

namespace hflow {

// Connection coefficients at one node, symmetric in the lower pair.
struct Christoffel {
  int n = 0;
  std::array<double, kMaxDim * kMaxSymComp> v{};

  double operator()(int k, int i, int j) const {
    return v[k * kMaxSymComp + sym_index(n, i, j)];
  }
  double& entry(int k, int i, int j) { return v[k * kMaxSymComp + sym_index(n, i, j)]; }
};

// Gauge vector of the background-fixed flow at one node, both index positions.
struct GaugeVector {
  int n = 0;
  std::array<double, kMaxDim> up{};    // V^a
  std::array<double, kMaxDim> down{};  // V_i = g_ik V^k
};

// Inverse of a positive definite symmetric matrix. Signals NonPositiveDefinite
// when any eigenvalue is at or below the positivity floor.
SymMatrix inverse_metric(const SymMatrix& g);

// Levi-Civita connection of the nodal metric, first derivatives by central
// differences. Reads one ring of neighbors.
Christoffel christoffel(const MetricField& g, const NodeIndex& at);

// Ricci tensor from the connection field, differenced over a local patch.
// Reads two rings of neighbors; result is symmetrized.
SymMatrix ricci(const MetricField& g, const NodeIndex& at);

// V^a = g^{rs} Gamma^a_rs. Vanishes identically on conformally flat 2d data.
GaugeVector deturck_vector(const MetricField& g, const NodeIndex& at);

// -2 Ric + symmetrized covariant gradient of the gauge vector. Serves as the
// independent cross-check for the expanded evolution operator.
SymMatrix rhs_ricci_deturck(const MetricField& g, const NodeIndex& at);

// Contravariant gauge vector evaluated at every node.
VectorField deturck_field(const MetricField& g);

}  // namespace hflow
