#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fpxl/errors.hpp"
#include "fpxl/kernel.hpp"
#include "fpxl/rng.hpp"

using namespace fpxl;

namespace {

Box interval01() {
  Box b;
  b.N = 1;
  b.lo = {0.0, 0.0};
  b.hi = {1.0, 1.0};
  return b;
}

Box square01() {
  Box b;
  b.N = 2;
  b.lo = {0.0, 0.0};
  b.hi = {1.0, 1.0};
  return b;
}

GridFunction smooth_sample(const Grid& g) {
  GridFunction u(g.n_interior);
  for (int i = 0; i < g.n_interior; ++i) {
    u[i] = std::sin(M_PI * g.nodes[i][0]);
  }
  return u;
}

}  // namespace

TEST_CASE("1D grid: interior and collar node counts") {
  const Grid g = build_grid(interval01(), 8, 1.0);
  CHECK(g.n_interior == 8);
  CHECK(g.n_collar() == 16);
  CHECK(g.h == doctest::Approx(0.125));
  CHECK(g.nodes[0][0] == doctest::Approx(0.0625));
  for (int i = 0; i < g.n_interior; ++i) CHECK(g.domain.contains(g.nodes[i]));
  for (std::size_t i = g.n_interior; i < g.n_total(); ++i) {
    CHECK(!g.domain.contains(g.nodes[i]));
  }
}

TEST_CASE("2D grid: n^2 cell centers inside") {
  const Grid g = build_grid(square01(), 4, 0.5);
  CHECK(g.n_interior == 16);
  CHECK(g.cell_volume() == doctest::Approx(0.0625));
  for (std::size_t i = g.n_interior; i < g.n_total(); ++i) {
    CHECK(g.domain.distance(g.nodes[i]) <= g.collar_width_abs());
  }
}

TEST_CASE("grid construction rejects bad sizes") {
  CHECK_THROWS_AS(build_grid(interval01(), 2, 1.0), UsageError);
  CHECK_THROWS_AS(build_grid(interval01(), 8, 0.0), UsageError);
}

TEST_CASE("neighbor pair weight for s=0.5, p=2 in 1D is exactly 1") {
  // w = h^2 / h^{1 + 0.5*2} = 1 for nodes at distance h.
  const Grid g = build_grid(interval01(), 8, 1.0);
  const auto cache = build_pair_cache(g, ScalarField::constant(2.0), 0.5);
  for (const auto& e : cache.pairs) {
    if (std::abs(e.d - g.h) < 1e-14) {
      CHECK(e.w == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(e.w > 0.0);
    CHECK(e.i != e.j);
  }
}

TEST_CASE("constant p gives a single kinetic bucket") {
  const Grid g = build_grid(interval01(), 8, 1.0);
  const auto cache = build_pair_cache(g, ScalarField::constant(2.0), 0.4);
  CHECK(cache.bucket_count() == 1);
}

TEST_CASE("collar-collar pairs are absent and totals are bounded") {
  const Grid g = build_grid(interval01(), 8, 1.0);
  const auto cache = build_pair_cache(g, ScalarField::constant(2.0), 0.4);
  const auto n_total = g.n_total();
  CHECK(cache.pairs.size() <= n_total * (n_total - 1) / 2);
  for (const auto& e : cache.pairs) {
    CHECK(e.i < g.n_interior);  // i < j, so one endpoint interior
  }
}

TEST_CASE("symmetric variable p is consistent under argument swap") {
  const auto p = ScalarField::of_pair([](const Point& x, const Point& y) {
    return 2.0 + 0.2 * std::cos(x[0] + y[0]);
  });
  const Grid g = build_grid(interval01(), 8, 1.0);
  const auto cache = build_pair_cache(g, p, 0.4, 1e-3);
  for (const auto& e : cache.pairs) {
    CHECK(e.p ==
          p.at_pair(g.nodes[e.j], g.nodes[e.i]));  // swapped arguments
  }
}

TEST_CASE("modular examples: zero function and a two-node hand sum") {
  const Grid g = build_grid(interval01(), 8, 1.0);
  const auto cache = build_pair_cache(g, ScalarField::constant(2.0), 0.4);
  CHECK(modular_rho_x0(cache, GridFunction(8, 0.0)) == 0.0);

  // A toy cache: one pair with w = 1, p = 2 and u = (1, 0) gives 2*1*1.
  PairKernelCache toy;
  toy.n_interior = 2;
  toy.pairs.push_back({0, 1, 2.0, 1.0, 1.0, 0});
  toy.bucket_exponents = {2.0};
  toy.p_inf = toy.p_sup = 2.0;
  CHECK(modular_rho_x0(toy, GridFunction{1.0, 0.0}) == doctest::Approx(2.0));
}

TEST_CASE("modular is p-homogeneous and even for constant p") {
  const Grid g = build_grid(interval01(), 12, 1.0);
  const auto cache = build_pair_cache(g, ScalarField::constant(2.5), 0.4);
  Rng rng(7);
  GridFunction u(g.n_interior);
  for (auto& x : u) x = rng.uniform(-1.0, 1.0);
  const double rho = modular_rho_x0(cache, u);

  GridFunction tu = u, neg = u;
  for (auto& x : tu) x *= 1.7;
  for (auto& x : neg) x = -x;
  CHECK(modular_rho_x0(cache, tu) ==
        doctest::Approx(std::pow(1.7, 2.5) * rho).epsilon(1e-13));
  CHECK(modular_rho_x0(cache, neg) == doctest::Approx(rho).epsilon(1e-15));
}

TEST_CASE("modular refinement forms a Cauchy-like sequence") {
  // For a fixed smooth function the discrete modulars at n = 32, 64, 128
  // have shrinking successive differences.
  double vals[3];
  const int ns[3] = {32, 64, 128};
  for (int k = 0; k < 3; ++k) {
    const Grid g = build_grid(interval01(), ns[k], 1.0);
    const auto cache = build_pair_cache(g, ScalarField::constant(2.0), 0.4);
    vals[k] = modular_rho_x0(cache, smooth_sample(g));
  }
  const double d1 = std::abs(vals[1] - vals[0]);
  const double d2 = std::abs(vals[2] - vals[1]);
  CHECK(d2 < d1);
}

TEST_CASE("doubling the collar changes the modular by less than the tail bound") {
  const Grid g1 = build_grid(interval01(), 16, 1.0);
  const Grid g2 = build_grid(interval01(), 16, 2.0);
  const auto c1 = build_pair_cache(g1, ScalarField::constant(2.0), 0.4);
  const auto c2 = build_pair_cache(g2, ScalarField::constant(2.0), 0.4);
  const GridFunction u = smooth_sample(g1);
  const double r1 = modular_rho_x0(c1, u);
  const double r2 = modular_rho_x0(c2, u);
  CHECK(r2 >= r1);  // more pairs, non-negative terms
  CHECK(r2 - r1 <= collar_tail_bound(g1, c1, u));
}

TEST_CASE("pair dump has the documented columns") {
  const Grid g = build_grid(interval01(), 4, 0.5);
  const auto cache = build_pair_cache(g, ScalarField::constant(2.0), 0.4);
  std::ostringstream os;
  dump_pairs_csv(os, cache);
  CHECK(os.str().rfind("i,j,d_ij,p_ij,w_ij\n", 0) == 0);
}
