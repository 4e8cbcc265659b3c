#pragma once

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlabel {

// Regular d-dimensional pixel lattice. Pixels are enumerated in lexicographic
// order of their coordinates (x_1,...,x_d), last coordinate fastest, so for a
// 2D grid {height,width} the linear index is y*width + x (raster order).
struct Grid {
  std::vector<int> dims;

  Grid() = default;
  explicit Grid(std::vector<int> d) : dims(std::move(d)) {
    if (dims.empty()) throw std::invalid_argument("Grid: needs at least one axis");
    for (int m : dims)
      if (m < 1) throw std::invalid_argument("Grid: axis lengths must be positive");
  }
  static Grid square2d(int side) { return Grid({side, side}); }

  int dim() const { return static_cast<int>(dims.size()); }

  int size() const {
    long long n = 1;
    for (int m : dims) n *= m;
    if (n > (1LL << 30)) throw std::invalid_argument("Grid: too many pixels");
    return static_cast<int>(n);
  }

  // Product of axis lengths after `axis`; step between neighbors along it.
  int stride(int axis) const {
    int s = 1;
    for (int a = axis + 1; a < dim(); ++a) s *= dims[a];
    return s;
  }

  int coord(int pixel, int axis) const { return (pixel / stride(axis)) % dims[axis]; }

  bool operator==(const Grid& o) const { return dims == o.dims; }
  bool operator!=(const Grid& o) const { return !(*this == o); }

  std::string to_string() const {
    std::string s;
    for (size_t i = 0; i < dims.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(dims[i]);
    }
    return s;
  }
};

}  // namespace mlabel
