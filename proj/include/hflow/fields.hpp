#pragma once

#include <vector>

#include "hflow/grid.hpp"
#include "hflow/symmetric.hpp"

namespace hflow {

// Nodal scalar field. Ghost nodes of bounded grids read a fixed value
// (zero by default, matching a field that vanishes on the background).
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0, double ghost = 0.0)
      : grid_(g), v_(g.node_count(), fill), ghost_(ghost) {}

  const Grid& grid() const { return grid_; }

  double operator[](std::size_t f) const { return v_[f]; }
  double& operator[](std::size_t f) { return v_[f]; }

  double at(const NodeIndex& idx) const {
    std::size_t f;
    return grid_.resolve(idx, f) ? v_[f] : ghost_;
  }

  auto sampler() const {
    return [this](const NodeIndex& idx) { return at(idx); };
  }

  const std::vector<double>& data() const { return v_; }
  std::vector<double>& data() { return v_; }

 private:
  Grid grid_;
  std::vector<double> v_;
  double ghost_ = 0.0;
};

// Nodal vector field (dim components per node). Ghost value is zero.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(const Grid& g)
      : grid_(g), v_(g.node_count() * static_cast<std::size_t>(g.dim()), 0.0) {}

  const Grid& grid() const { return grid_; }

  double comp(std::size_t f, int a) const { return v_[f * grid_.dim() + a]; }
  double& comp(std::size_t f, int a) { return v_[f * grid_.dim() + a]; }

  double comp_at(const NodeIndex& idx, int a) const {
    std::size_t f;
    return grid_.resolve(idx, f) ? v_[f * grid_.dim() + a] : 0.0;
  }

  auto comp_sampler(int a) const {
    return [this, a](const NodeIndex& idx) { return comp_at(idx, a); };
  }

  const std::vector<double>& data() const { return v_; }
  std::vector<double>& data() { return v_; }

 private:
  Grid grid_;
  std::vector<double> v_;
};

// Nodal symmetric-matrix field holding the evolving metric, packed
// n(n+1)/2 components per node. Ghost nodes read the flat background metric.
class MetricField {
 public:
  MetricField() = default;

  static MetricField identity(const Grid& g) {
    MetricField m;
    m.grid_ = g;
    m.ncomp_ = sym_comp_count(g.dim());
    m.v_.assign(g.node_count() * static_cast<std::size_t>(m.ncomp_), 0.0);
    const SymMatrix id = SymMatrix::identity(g.dim());
    for (std::size_t f = 0; f < g.node_count(); ++f) m.set(f, id);
    return m;
  }

  const Grid& grid() const { return grid_; }
  int comp_count() const { return ncomp_; }

  double comp(std::size_t f, int c) const { return v_[f * ncomp_ + c]; }
  double& comp(std::size_t f, int c) { return v_[f * ncomp_ + c]; }

  double comp(std::size_t f, int a, int b) const {
    return v_[f * ncomp_ + sym_index(grid_.dim(), a, b)];
  }

  SymMatrix matrix(std::size_t f) const {
    SymMatrix m(grid_.dim());
    for (int c = 0; c < ncomp_; ++c) m.comp(c) = v_[f * ncomp_ + c];
    return m;
  }

  void set(std::size_t f, const SymMatrix& m) {
    for (int c = 0; c < ncomp_; ++c) v_[f * ncomp_ + c] = m.comp(c);
  }

  SymMatrix matrix_at(const NodeIndex& idx) const {
    std::size_t f;
    if (grid_.resolve(idx, f)) return matrix(f);
    return SymMatrix::identity(grid_.dim());
  }

  double comp_at(const NodeIndex& idx, int a, int b) const {
    std::size_t f;
    if (grid_.resolve(idx, f)) return v_[f * ncomp_ + sym_index(grid_.dim(), a, b)];
    return a == b ? 1.0 : 0.0;
  }

  auto comp_sampler(int a, int b) const {
    const int c = sym_index(grid_.dim(), a, b);
    const double ghost = a == b ? 1.0 : 0.0;
    return [this, c, ghost](const NodeIndex& idx) {
      std::size_t f;
      return grid_.resolve(idx, f) ? v_[f * ncomp_ + c] : ghost;
    };
  }

  const std::vector<double>& data() const { return v_; }
  std::vector<double>& data() { return v_; }

 private:
  Grid grid_;
  int ncomp_ = 0;
  std::vector<double> v_;
};

}  // namespace hflow
