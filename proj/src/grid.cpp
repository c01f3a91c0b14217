#include "hflow/grid.hpp"

#include <string>

namespace hflow {

Grid::Grid(int dim, std::span<const int> shape, double spacing, Boundary boundary,
           std::span<const double> origin)
    : dim_(dim), dx_(spacing), boundary_(boundary) {
  if (dim < 2 || dim > kMaxDim)
    throw std::invalid_argument("grid: dim must be between 2 and 4");
  if (static_cast<int>(shape.size()) != dim)
    throw std::invalid_argument("grid: shape size must match dim");
  if (!(spacing > 0)) throw std::invalid_argument("grid: spacing must be positive");
  count_ = 1;
  for (int d = 0; d < dim; ++d) {
    if (shape[d] < 8)
      throw std::invalid_argument("grid: need at least 8 nodes per axis, axis " +
                                  std::to_string(d));
    shape_[d] = shape[d];
    count_ *= static_cast<std::size_t>(shape[d]);
  }
  if (!origin.empty()) {
    if (static_cast<int>(origin.size()) != dim)
      throw std::invalid_argument("grid: origin size must match dim");
    for (int d = 0; d < dim; ++d) origin_[d] = origin[d];
  }
  // Row-major strides, last axis fastest.
  stride_[dim - 1] = 1;
  for (int d = dim - 2; d >= 0; --d)
    stride_[d] = stride_[d + 1] * static_cast<std::size_t>(shape_[d + 1]);
}

Grid make_grid(int dim, std::span<const int> shape, double spacing, Boundary boundary,
               std::span<const double> origin) {
  return Grid(dim, shape, spacing, boundary, origin);
}

}  // namespace hflow
