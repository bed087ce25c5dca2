#include "fpxl/grid.hpp"

#include <algorithm>
#include <cmath>

#include "fpxl/errors.hpp"

namespace fpxl {

double Box::diameter() const {
  double d2 = 0.0;
  for (int k = 0; k < N; ++k) {
    const double e = hi[k] - lo[k];
    d2 += e * e;
  }
  return std::sqrt(d2);
}

bool Box::contains(const Point& x) const {
  for (int k = 0; k < N; ++k) {
    if (x[k] <= lo[k] || x[k] >= hi[k]) return false;
  }
  return true;
}

double Box::distance(const Point& x) const {
  double d2 = 0.0;
  for (int k = 0; k < N; ++k) {
    const double below = lo[k] - x[k];
    const double above = x[k] - hi[k];
    const double gap = std::max({below, above, 0.0});
    d2 += gap * gap;
  }
  return std::sqrt(d2);
}

double distance(const Point& x, const Point& y, int N) {
  double d2 = 0.0;
  for (int k = 0; k < N; ++k) {
    const double e = x[k] - y[k];
    d2 += e * e;
  }
  return std::sqrt(d2);
}

Grid build_grid(const Box& domain, int n_per_axis, double collar_width) {
  if (domain.N != 1 && domain.N != 2) {
    throw UsageError("build_grid: dimension must be 1 or 2");
  }
  for (int k = 0; k < domain.N; ++k) {
    if (!(domain.hi[k] > domain.lo[k])) {
      throw UsageError("build_grid: degenerate domain box");
    }
  }
  if (n_per_axis < 4) {
    throw UsageError("build_grid: n_per_axis must be at least 4");
  }
  if (!(collar_width > 0.0)) {
    throw UsageError("build_grid: collar_width must be positive");
  }
  const double extent0 = domain.hi[0] - domain.lo[0];
  if (domain.N == 2) {
    const double extent1 = domain.hi[1] - domain.lo[1];
    if (std::abs(extent0 - extent1) > 1e-12 * std::max(extent0, extent1)) {
      throw UsageError("build_grid: 2D domain must be square (uniform h)");
    }
  }

  Grid g;
  g.N = domain.N;
  g.domain = domain;
  g.collar_width = collar_width;
  g.h = extent0 / n_per_axis;

  const double w_abs = collar_width * domain.diameter();
  // Number of extra cell layers needed so that every exterior cell whose
  // center lies within w_abs of the box is present.
  const int layers = static_cast<int>(std::ceil(w_abs / g.h)) + 1;

  std::vector<Point> interior;
  std::vector<Point> collar;
  const int lo_idx = -layers;
  const int hi_idx = n_per_axis + layers;

  auto center = [&](int i, int axis) {
    return domain.lo[axis] + (i + 0.5) * g.h;
  };

  if (domain.N == 1) {
    for (int i = lo_idx; i < hi_idx; ++i) {
      Point x{center(i, 0), 0.0};
      if (i >= 0 && i < n_per_axis) {
        interior.push_back(x);
      } else if (domain.distance(x) <= w_abs) {
        collar.push_back(x);
      }
    }
  } else {
    for (int i = lo_idx; i < hi_idx; ++i) {
      for (int j = lo_idx; j < hi_idx; ++j) {
        Point x{center(i, 0), center(j, 1)};
        const bool inside =
            i >= 0 && i < n_per_axis && j >= 0 && j < n_per_axis;
        if (inside) {
          interior.push_back(x);
        } else if (domain.distance(x) <= w_abs) {
          collar.push_back(x);
        }
      }
    }
  }

  g.n_interior = static_cast<int>(interior.size());
  g.nodes = std::move(interior);
  g.nodes.insert(g.nodes.end(), collar.begin(), collar.end());
  return g;
}

}  // namespace fpxl
