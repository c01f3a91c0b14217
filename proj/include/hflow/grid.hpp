#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

#include "hflow/errors.hpp"
#include "hflow/symmetric.hpp"

namespace hflow {

enum class Boundary { Periodic, DirichletToH };

// Multi-index of a lattice node; entries beyond the grid dimension stay zero.
// Out-of-range entries address ghost nodes, resolved per boundary mode.
using NodeIndex = std::array<int, kMaxDim>;

inline NodeIndex shifted(NodeIndex idx, int axis, int delta) {
  idx[axis] += delta;
  return idx;
}

// Uniform structured lattice over a box, 2 to 4 axes, at least 8 nodes per axis.
// Periodic axes identify node N with node 0; DirichletToH grids carry an
// implicit ghost layer whose field values are fixed by the flat background.
class Grid {
 public:
  Grid() = default;
  Grid(int dim, std::span<const int> shape, double spacing, Boundary boundary,
       std::span<const double> origin = {});

  int dim() const { return dim_; }
  int extent(int axis) const { return shape_[axis]; }
  double spacing() const { return dx_; }
  Boundary boundary() const { return boundary_; }
  double origin(int axis) const { return origin_[axis]; }
  std::size_t node_count() const { return count_; }

  std::size_t flat(const NodeIndex& idx) const {
    std::size_t f = 0;
    for (int d = 0; d < dim_; ++d) f += static_cast<std::size_t>(idx[d]) * stride_[d];
    return f;
  }

  NodeIndex unflat(std::size_t f) const {
    NodeIndex idx{};
    for (int d = 0; d < dim_; ++d) {
      idx[d] = static_cast<int>(f / stride_[d]);
      f %= stride_[d];
    }
    return idx;
  }

  double coord(const NodeIndex& idx, int axis) const {
    return origin_[axis] + idx[axis] * dx_;
  }

  // Physical period of a periodic axis.
  double axis_length(int axis) const { return shape_[axis] * dx_; }

  // Length of the node-spanned box along an axis.
  double axis_span(int axis) const { return (shape_[axis] - 1) * dx_; }

  std::array<double, kMaxDim> center() const {
    std::array<double, kMaxDim> c{};
    for (int d = 0; d < dim_; ++d) c[d] = origin_[d] + 0.5 * axis_span(d);
    return c;
  }

  // Resolves a possibly out-of-range index. Returns false when the index
  // addresses a ghost node of a DirichletToH grid.
  bool resolve(const NodeIndex& idx, std::size_t& flat_out) const {
    std::size_t f = 0;
    for (int d = 0; d < dim_; ++d) {
      int i = idx[d];
      if (i < 0 || i >= shape_[d]) {
        if (boundary_ == Boundary::DirichletToH) return false;
        i %= shape_[d];
        if (i < 0) i += shape_[d];
      }
      f += static_cast<std::size_t>(i) * stride_[d];
    }
    flat_out = f;
    return true;
  }

  bool in_range(const NodeIndex& idx) const {
    for (int d = 0; d < dim_; ++d)
      if (idx[d] < 0 || idx[d] >= shape_[d]) return false;
    return true;
  }

  // Outermost real node layer; pinned to the background on DirichletToH grids.
  bool on_boundary_ring(const NodeIndex& idx) const {
    for (int d = 0; d < dim_; ++d)
      if (idx[d] == 0 || idx[d] == shape_[d] - 1) return true;
    return false;
  }

  // True when every node within `depth` of idx is a real node.
  bool interior(const NodeIndex& idx, int depth) const {
    if (boundary_ == Boundary::Periodic) return true;
    for (int d = 0; d < dim_; ++d)
      if (idx[d] < depth || idx[d] >= shape_[d] - depth) return false;
    return true;
  }

  bool same_layout(const Grid& o) const {
    if (dim_ != o.dim_ || dx_ != o.dx_ || boundary_ != o.boundary_) return false;
    for (int d = 0; d < dim_; ++d)
      if (shape_[d] != o.shape_[d] || origin_[d] != o.origin_[d]) return false;
    return true;
  }

 private:
  int dim_ = 0;
  std::array<int, kMaxDim> shape_{};
  double dx_ = 0;
  Boundary boundary_ = Boundary::Periodic;
  std::array<double, kMaxDim> origin_{};
  std::size_t count_ = 0;
  std::array<std::size_t, kMaxDim> stride_{};
};

Grid make_grid(int dim, std::span<const int> shape, double spacing, Boundary boundary,
               std::span<const double> origin = {});

// Second-order central first derivative of a nodal sampler along one axis.
// The sampler must accept out-of-range indices and supply its own ghost rule.
template <class F>
double diff1(const Grid& g, F&& f, int axis, const NodeIndex& at) {
  if (axis < 0 || axis >= g.dim()) throw std::out_of_range("diff1: axis out of range");
  return (f(shifted(at, axis, 1)) - f(shifted(at, axis, -1))) / (2.0 * g.spacing());
}

// Second-order second derivative: 3-point on axis, 4-corner cross stencil.
template <class F>
double diff2(const Grid& g, F&& f, int axis_a, int axis_b, const NodeIndex& at) {
  if (axis_a < 0 || axis_a >= g.dim() || axis_b < 0 || axis_b >= g.dim())
    throw std::out_of_range("diff2: axis out of range");
  const double dx = g.spacing();
  if (axis_a == axis_b) {
    return (f(shifted(at, axis_a, 1)) - 2.0 * f(at) + f(shifted(at, axis_a, -1))) /
           (dx * dx);
  }
  const double pp = f(shifted(shifted(at, axis_a, 1), axis_b, 1));
  const double pm = f(shifted(shifted(at, axis_a, 1), axis_b, -1));
  const double mp = f(shifted(shifted(at, axis_a, -1), axis_b, 1));
  const double mm = f(shifted(shifted(at, axis_a, -1), axis_b, -1));
  return (pp - pm - mp + mm) / (4.0 * dx * dx);
}

// Multilinear interpolation of a nodal sampler at a physical position.
// Weights are a convex combination of the 2^dim cell corners. On bounded
// grids, positions outside the node-spanned box raise PositionOutsideDomain.
template <class F>
double interpolate(const Grid& g, F&& f, std::span<const double> pos) {
  NodeIndex base{};
  double w[kMaxDim];
  const double dx = g.spacing();
  for (int d = 0; d < g.dim(); ++d) {
    const double s = (pos[d] - g.origin(d)) / dx;
    if (g.boundary() == Boundary::DirichletToH) {
      const double hi = static_cast<double>(g.extent(d) - 1);
      const double slack = 1e-12 * (hi > 0 ? hi : 1.0);
      if (s < -slack || s > hi + slack)
        throw PositionOutsideDomain("interpolate: position outside bounded domain");
      double sc = s < 0 ? 0 : (s > hi ? hi : s);
      int i0 = static_cast<int>(std::floor(sc));
      if (i0 > g.extent(d) - 2) i0 = g.extent(d) - 2;
      base[d] = i0;
      w[d] = sc - i0;
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

}  // namespace hflow
