#include <doctest.h>

#include <cmath>

#include "fpxl/errors.hpp"
#include "fpxl/fields.hpp"
#include "fpxl/problem.hpp"
#include "fpxl/rng.hpp"

using namespace fpxl;

namespace {

Box unit_interval() {
  Box b;
  b.N = 1;
  b.lo = {0.0, 0.0};
  b.hi = {1.0, 1.0};
  return b;
}

ProblemData desk_data(double lambda = 0.01, double mu = 0.01) {
  ProblemData d;
  d.N = 1;
  d.s = 0.4;
  d.domain = unit_interval();
  d.p = ScalarField::constant(2.0);
  d.q = ScalarField::constant(1.5);
  d.alpha = ScalarField::constant(1.5);
  d.beta = ScalarField::constant(1.5);
  d.a = ScalarField::constant(1.0);
  d.b = ScalarField::constant(1.0);
  d.c = ScalarField::constant(1.0);
  d.lambda = lambda;
  d.mu = mu;
  return d;
}

std::vector<Point> uniform_samples(int m) {
  std::vector<Point> pts;
  for (int k = 0; k <= m; ++k) {
    pts.push_back(Point{static_cast<double>(k) / m, 0.0});
  }
  return pts;
}

}  // namespace

TEST_CASE("exponent_bounds of a constant field") {
  const auto f = ScalarField::constant(2.0);
  const auto b = exponent_bounds(f, uniform_samples(7));
  CHECK(b.inf == 2.0);
  CHECK(b.sup == 2.0);
  CHECK(f.cached_inf() == 2.0);
  CHECK(f.cached_sup() == 2.0);
}

TEST_CASE("exponent_bounds matches a dense scan for a smooth profile") {
  const auto f = ScalarField::of_point(
      [](const Point& x) { return 2.0 + 0.5 * std::sin(M_PI * x[0]); });
  // Dense-scan oracle.
  double lo = 1e300, hi = -1e300;
  const int dense = 1000000;
  for (int k = 0; k <= dense; ++k) {
    const double v = 2.0 + 0.5 * std::sin(M_PI * k / dense);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const auto b = exponent_bounds(f, uniform_samples(512));
  CHECK(std::abs(b.inf - lo) < 1e-3);
  CHECK(std::abs(b.sup - hi) < 1e-3);
}

TEST_CASE("exponent_bounds rejects an empty sample set") {
  const auto f = ScalarField::of_point([](const Point& x) { return x[0]; });
  CHECK_THROWS_AS(exponent_bounds(f, {}), UsageError);
}

TEST_CASE("bounds are monotone under sample refinement") {
  const auto f = ScalarField::of_point(
      [](const Point& x) { return 2.0 + 0.3 * std::cos(5.0 * x[0]); });
  const auto coarse = exponent_bounds(f, uniform_samples(16));
  const auto fine = exponent_bounds(f, uniform_samples(256));
  CHECK(fine.inf <= coarse.inf);
  CHECK(fine.sup >= coarse.sup);
}

TEST_CASE("critical_exponent follows the N p / (N - s p) formula") {
  const auto p = ScalarField::constant(2.0);
  CHECK(critical_exponent(p, 0.4, 1, Point{0.5, 0.0}) ==
        doctest::Approx(10.0).epsilon(1e-14));

  // The s -> 0 limit degenerates to p(x,x) itself.
  const auto p3 = ScalarField::constant(3.0);
  CHECK(critical_exponent(p3, 1e-14, 2, Point{0.5, 0.5}) ==
        doctest::Approx(3.0).epsilon(1e-10));

  // s p = N sits on the boundary of validity.
  CHECK_THROWS_AS(critical_exponent(p, 0.5, 1, Point{0.5, 0.0}),
                  HypothesisError);
}

TEST_CASE("check_assumptions passes on the constant desk instance") {
  const auto data = desk_data();
  const Grid g = build_grid(data.domain, 8, 1.0);
  const auto rep = check_assumptions(data, g);
  CHECK(rep.all_pass());
  CHECK(!rep.caveat.empty());
}

TEST_CASE("check_assumptions flags q+ >= p-") {
  auto data = desk_data();
  data.q = ScalarField::constant(2.5);
  const Grid g = build_grid(data.domain, 8, 1.0);
  const auto rep = check_assumptions(data, g);
  CHECK(!rep.all_pass());
  const auto* chain = rep.find("exponent-chain 1<q-<=q+<p-<=p+<(a+b)-<=(a+b)+<p*s-");
  REQUIRE(chain != nullptr);
  CHECK(!chain->pass);
}

TEST_CASE("check_assumptions flags a field outside C+") {
  auto data = desk_data();
  data.q = ScalarField::of_point(
      [](const Point& x) { return 0.8 + 0.1 * x[0]; });  // dips below 1
  const Grid g = build_grid(data.domain, 8, 1.0);
  const auto rep = check_assumptions(data, g);
  const auto* c = rep.find("q-in-C+");
  REQUIRE(c != nullptr);
  CHECK(!c->pass);
}

TEST_CASE("check_assumptions flags an unbounded tabulated weight") {
  auto data = desk_data();
  std::vector<double> tab(8, 1.0);
  tab[3] = std::numeric_limits<double>::infinity();
  data.c = ScalarField::tabulated(tab);
  const Grid g = build_grid(data.domain, 8, 1.0);
  const auto rep = check_assumptions(data, g);
  const auto* c = rep.find("c-in-L^inf");
  REQUIRE(c != nullptr);
  CHECK(!c->pass);
}

TEST_CASE("for constants the gap inequality holds iff p < alpha+beta") {
  Rng rng(11);
  const Grid g = build_grid(unit_interval(), 8, 1.0);
  for (int k = 0; k < 40; ++k) {
    const double q = rng.uniform(1.05, 1.6);
    const double p = rng.uniform(q + 0.05, q + 1.0);
    const double half = rng.uniform(0.4 * p, 1.8 * p);
    auto data = desk_data();
    data.q = ScalarField::constant(q);
    data.p = ScalarField::constant(p);
    data.alpha = ScalarField::constant(half);
    data.beta = ScalarField::constant(half);
    const auto rep = check_assumptions(data, g);
    const auto* a2 = rep.find("exponent-gap-inequality");
    REQUIRE(a2 != nullptr);
    CHECK(a2->pass == (p < 2.0 * half));
  }
}

TEST_CASE("pair symmetry check is exact for symmetric profiles") {
  auto data = desk_data();
  data.p = ScalarField::of_pair([](const Point& x, const Point& y) {
    return 2.0 + 0.2 * std::sin(M_PI * (x[0] + y[0]));
  });
  const Grid g = build_grid(data.domain, 8, 1.0);
  const auto rep = check_assumptions(data, g);
  const auto* sym = rep.find("p-symmetric");
  REQUIRE(sym != nullptr);
  CHECK(sym->pass);
}

TEST_CASE("tabulated fields must match the grid size") {
  auto data = desk_data();
  data.a = ScalarField::tabulated(std::vector<double>(5, 1.0));
  DiscretizationOptions disc;
  disc.n_per_axis = 8;
  CHECK_THROWS_AS(make_problem(data, disc), UsageError);
}
