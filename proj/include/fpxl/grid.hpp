#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace fpxl {

// Spatial point; for N = 1 only the first coordinate is used.
using Point = std::array<double, 2>;

// Axis-aligned box domain in dimension N (1 or 2).
struct Box {
  int N = 1;
  Point lo{0.0, 0.0};
  Point hi{1.0, 1.0};

  double diameter() const;
  bool contains(const Point& x) const;
  // Euclidean distance from x to the closed box (0 inside).
  double distance(const Point& x) const;
};

// Uniform cell-centered grid over the domain plus an exterior collar of
// cells realizing the truncated nonlocal Dirichlet condition u = 0 on the
// complement. Interior nodes come first in `nodes`, collar nodes after.
struct Grid {
  int N = 1;
  double h = 0.0;
  Box domain;
  double collar_width = 1.0;  // in units of the domain diameter
  std::vector<Point> nodes;
  int n_interior = 0;

  double cell_volume() const { return std::pow(h, N); }
  std::size_t n_total() const { return nodes.size(); }
  int n_collar() const { return static_cast<int>(nodes.size()) - n_interior; }
  double collar_width_abs() const { return collar_width * domain.diameter(); }
};

// Nodal values on interior nodes; implicitly 0 on the collar and beyond.
using GridFunction = std::vector<double>;

Grid build_grid(const Box& domain, int n_per_axis, double collar_width);

double distance(const Point& x, const Point& y, int N);

}  // namespace fpxl
