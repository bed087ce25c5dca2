#include <doctest.h>

#include <cmath>

#include "fpxl/errors.hpp"
#include "fpxl/rng.hpp"
#include "fpxl/vxspace.hpp"

using namespace fpxl;

namespace {

Box interval01() {
  Box b;
  b.N = 1;
  b.lo = {0.0, 0.0};
  b.hi = {1.0, 1.0};
  return b;
}

std::vector<double> gamma_linear(const Grid& g) {
  std::vector<double> gam(g.n_interior);
  for (int i = 0; i < g.n_interior; ++i) gam[i] = 2.0 + g.nodes[i][0];
  return gam;
}

GridFunction random_fn(const Grid& g, Rng& rng, double spread = 1.5) {
  GridFunction u(g.n_interior);
  for (auto& x : u) x = rng.uniform(-1.0, 1.0);
  const double f = std::exp(rng.uniform(-spread, spread));
  for (auto& x : u) x *= f;
  return u;
}

}  // namespace

TEST_CASE("Lebesgue modular examples") {
  const Grid g = build_grid(interval01(), 16, 1.0);
  const std::vector<double> two(g.n_interior, 2.0);
  CHECK(modular_lebesgue(g, GridFunction(g.n_interior, 0.0), two) == 0.0);
  // u = 2 on a measure-1 domain with gamma = 2.
  CHECK(modular_lebesgue(g, GridFunction(g.n_interior, 2.0), two) ==
        doctest::Approx(4.0).epsilon(1e-13));
  // |1|^gamma = 1 regardless of the exponent field.
  CHECK(modular_lebesgue(g, GridFunction(g.n_interior, 1.0),
                         gamma_linear(g)) == doctest::Approx(1.0));
}

TEST_CASE("Luxemburg norm examples") {
  const Grid g = build_grid(interval01(), 16, 1.0);
  const auto m2 = ModularEvaluator::lebesgue(
      g.cell_volume(), std::vector<double>(g.n_interior, 2.0));
  CHECK(luxemburg_norm(m2, GridFunction(g.n_interior, 0.0)).value == 0.0);
  // Constant exponent 2 reduces to the L2 norm: ||2||_2 = 2 on (0,1).
  CHECK(luxemburg_norm(m2, GridFunction(g.n_interior, 2.0)).value ==
        doctest::Approx(2.0).epsilon(1e-12));

  // Defining property: the scaled modular sits at 1.
  const auto mv =
      ModularEvaluator::lebesgue(g.cell_volume(), gamma_linear(g));
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const GridFunction u = random_fn(g, rng);
    const auto r = luxemburg_norm(mv, u);
    CHECK(std::abs(mv.scaled(u, r.value) - 1.0) <= 1e-10);
  }
}

TEST_CASE("Luxemburg norm is absolutely 1-homogeneous") {
  const Grid g = build_grid(interval01(), 16, 1.0);
  const auto mv =
      ModularEvaluator::lebesgue(g.cell_volume(), gamma_linear(g));
  const auto cache = build_pair_cache(g, ScalarField::constant(2.0), 0.4);
  const auto mx = ModularEvaluator::seminorm_x0(cache);
  Rng rng(17);
  for (int k = 0; k < 10; ++k) {
    const GridFunction u = random_fn(g, rng);
    const double t = rng.uniform(-3.0, 3.0);
    GridFunction tu = u;
    for (auto& x : tu) x *= t;
    for (const auto* m : {&mv, &mx}) {
      const double nu = luxemburg_norm(*m, u).value;
      const double ntu = luxemburg_norm(*m, tu).value;
      CHECK(ntu == doctest::Approx(std::abs(t) * nu).epsilon(1e-8));
    }
  }
}

TEST_CASE("norm-modular trichotomy and sandwich on random functions") {
  const Grid g = build_grid(interval01(), 16, 1.0);
  const auto mv =
      ModularEvaluator::lebesgue(g.cell_volume(), gamma_linear(g));
  const auto cache = build_pair_cache(g, ScalarField::constant(2.0), 0.4);
  const auto mx = ModularEvaluator::seminorm_x0(cache);
  Rng rng(23);
  int above = 0, below = 0;
  for (int k = 0; k < 100; ++k) {
    const GridFunction u = random_fn(g, rng);
    for (const auto* m : {&mv, &mx}) {
      const auto rep = check_norm_modular_relations(*m, u);
      CHECK(rep.trichotomy_ok);
      CHECK(rep.sandwich_ok);
      (rep.norm > 1.0 ? above : below) += 1;
    }
  }
  CHECK(above > 0);  // both regimes exercised
  CHECK(below > 0);
}

TEST_CASE("scaling to modular 1 forces norm 1") {
  const Grid g = build_grid(interval01(), 16, 1.0);
  const auto mv =
      ModularEvaluator::lebesgue(g.cell_volume(), gamma_linear(g));
  Rng rng(29);
  GridFunction u = random_fn(g, rng);
  // Scale u so that the modular equals 1 (Luxemburg fixed point).
  const double eta = luxemburg_norm(mv, u).value;
  for (auto& x : u) x /= eta;
  CHECK(mv(u) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(luxemburg_norm(mv, u).value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("constant exponent collapses the sandwich to an identity") {
  const Grid g = build_grid(interval01(), 16, 1.0);
  const auto m3 = ModularEvaluator::lebesgue(
      g.cell_volume(), std::vector<double>(g.n_interior, 3.0));
  Rng rng(31);
  const GridFunction u = random_fn(g, rng);
  const double nm = luxemburg_norm(m3, u).value;
  CHECK(m3(u) == doctest::Approx(std::pow(nm, 3.0)).epsilon(1e-10));
}

TEST_CASE("power_norm_bound examples and inequality") {
  const Grid g = build_grid(interval01(), 16, 1.0);
  const std::vector<double> nu2(g.n_interior, 2.0);
  Rng rng(37);

  // u = 0 gives (0, 0).
  {
    const std::vector<double> nu1(g.n_interior, 1.5);
    const auto [lhs, rhs] =
        power_norm_bound(g, GridFunction(g.n_interior, 0.0), nu1, nu2);
    CHECK(lhs == 0.0);
    CHECK(rhs == 0.0);
  }
  // nu1 = 1: lhs = ||u||, rhs = 2||u||.
  {
    const std::vector<double> nu1(g.n_interior, 1.0);
    const GridFunction u = random_fn(g, rng);
    const auto [lhs, rhs] = power_norm_bound(g, u, nu1, nu2);
    CHECK(rhs == doctest::Approx(2.0 * lhs).epsilon(1e-9));
  }
  // Variable nu1: the bound holds on random samples.
  {
    std::vector<double> nu1(g.n_interior);
    for (int i = 0; i < g.n_interior; ++i) nu1[i] = 1.2 + 0.5 * g.nodes[i][0];
    for (int k = 0; k < 25; ++k) {
      const GridFunction u = random_fn(g, rng);
      const auto [lhs, rhs] = power_norm_bound(g, u, nu1, nu2);
      CHECK(lhs <= rhs * (1.0 + 1e-9));
    }
  }
  // Pointwise precondition nu1*nu2 >= 1.
  {
    const std::vector<double> small(g.n_interior, 0.3);
    const std::vector<double> one(g.n_interior, 1.0);
    CHECK_THROWS_AS(
        power_norm_bound(g, GridFunction(g.n_interior, 1.0), small, one),
        HypothesisError);
  }
}

TEST_CASE("Holder inequality for conjugate exponent fields") {
  const Grid g = build_grid(interval01(), 16, 1.0);
  std::vector<double> gam(g.n_interior), conj(g.n_interior);
  for (int i = 0; i < g.n_interior; ++i) {
    gam[i] = 2.0 + g.nodes[i][0];          // in (2, 3)
    conj[i] = gam[i] / (gam[i] - 1.0);     // pointwise conjugate
  }
  const auto mg = ModularEvaluator::lebesgue(g.cell_volume(), gam);
  const auto mc = ModularEvaluator::lebesgue(g.cell_volume(), conj);
  const double g_inf = mg.exponent_inf();
  const double c_inf = mc.exponent_inf();

  Rng rng(41);
  for (int k = 0; k < 50; ++k) {
    const GridFunction u = random_fn(g, rng);
    const GridFunction v = random_fn(g, rng);
    double integral = 0.0;
    for (int i = 0; i < g.n_interior; ++i) integral += u[i] * v[i];
    integral *= g.cell_volume();
    const double bound = (1.0 / g_inf + 1.0 / c_inf) *
                         luxemburg_norm(mg, u).value *
                         luxemburg_norm(mc, v).value;
    CHECK(std::abs(integral) <= bound * (1.0 + 1e-9));
  }
}

TEST_CASE("embedding estimate: monotone in trials, bounded by candidates") {
  const Grid g = build_grid(interval01(), 32, 1.0);
  const auto cache = build_pair_cache(g, ScalarField::constant(2.0), 0.4);
  const std::vector<double> r(g.n_interior, 3.0);
  const std::vector<double> pstar(g.n_interior, 10.0);

  const auto e8 = estimate_embedding_constant(g, cache, r, pstar, 8, 0, 10);
  const auto e16 = estimate_embedding_constant(g, cache, r, pstar, 16, 0, 10);
  CHECK(e16.C_hat >= e8.C_hat);  // candidate substreams nest

  const auto e1 = estimate_embedding_constant(g, cache, r, pstar, 1, 0, 0);
  CHECK(e8.C_hat >= e1.C_hat);
  CHECK(e1.C_hat > 0.0);
}

TEST_CASE("embedding estimate stabilizes under refinement") {
  const std::uint64_t seed = 0;
  double c_hat[2];
  const int ns[2] = {64, 128};
  for (int k = 0; k < 2; ++k) {
    const Grid g = build_grid(interval01(), ns[k], 1.0);
    const auto cache = build_pair_cache(g, ScalarField::constant(2.0), 0.4);
    const std::vector<double> r(g.n_interior, 3.0);
    const std::vector<double> pstar(g.n_interior, 10.0);
    c_hat[k] =
        estimate_embedding_constant(g, cache, r, pstar, 16, seed, 25).C_hat;
  }
  CHECK(std::abs(c_hat[1] - c_hat[0]) / c_hat[0] < 0.05);
}

TEST_CASE("embedding estimate enforces r < p*_s") {
  const Grid g = build_grid(interval01(), 8, 1.0);
  const auto cache = build_pair_cache(g, ScalarField::constant(2.0), 0.4);
  const std::vector<double> r(g.n_interior, 11.0);
  const std::vector<double> pstar(g.n_interior, 10.0);
  CHECK_THROWS_AS(estimate_embedding_constant(g, cache, r, pstar, 4, 0, 5),
                  HypothesisError);
}
