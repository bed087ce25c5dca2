#include <doctest.h>

#include <cmath>

#include "fpxl/errors.hpp"
#include "fpxl/math.hpp"
#include "fpxl/solver.hpp"

using namespace fpxl;

namespace {

ProblemData desk_data(double lambda, double mu, double c_weight = 1.0) {
  ProblemData d;
  d.N = 1;
  d.s = 0.4;
  d.domain.N = 1;
  d.domain.lo = {0.0, 0.0};
  d.domain.hi = {1.0, 1.0};
  d.p = ScalarField::constant(2.0);
  d.q = ScalarField::constant(1.5);
  d.alpha = ScalarField::constant(1.5);
  d.beta = ScalarField::constant(1.5);
  d.a = ScalarField::constant(1.0);
  d.b = ScalarField::constant(1.0);
  d.c = ScalarField::constant(c_weight);
  d.lambda = lambda;
  d.mu = mu;
  return d;
}

Problem desk_problem(int n, double lambda, double mu, double c_weight = 1.0) {
  DiscretizationOptions disc;
  disc.n_per_axis = n;
  return make_problem(desk_data(lambda, mu, c_weight), disc);
}

ThresholdSet thresholds_of(const Problem& prob, int trials = 16) {
  const auto emb = estimate_embedding_constant(
      *prob.grid, *prob.cache, prob.tab->r, prob.tab->pstar, trials, 0, 25);
  return compute_constants(prob, emb);
}

}  // namespace

TEST_CASE("constants follow the displayed formulas for the desk exponents") {
  const Problem prob = desk_problem(16, 0.01, 0.01);
  const ThresholdSet th = thresholds_of(prob);

  // K1 = 2(||a|| + ||b||) max{C^q-, C^q+}, C1 = 4 K1; a = b = 1 on a
  // measure-1 domain in L^{q*} with q* = 2, so both norms are 1.
  CHECK(th.a_norm_qstar == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(th.b_norm_qstar == doctest::Approx(1.0).epsilon(1e-10));
  const double Ch = th.C_hat;
  CHECK(th.C1 == doctest::Approx(16.0 * std::pow(Ch, 1.5)).epsilon(1e-12));
  CHECK(th.C2 == doctest::Approx(4.0 * std::pow(Ch, 3.0) + 1.0).epsilon(1e-12));

  // delta = (1/C1) (1/1.5) (0.5 / (1.5 C2))^{0.5}.
  const double expected =
      (1.0 / th.C1) * (1.0 / 1.5) * std::sqrt(0.5 / (1.5 * th.C2));
  CHECK(th.delta == doctest::Approx(expected).epsilon(1e-12));
  CHECK(th.delta0 == doctest::Approx(th.delta * 1.5 / 2.0).epsilon(1e-14));
  CHECK(th.estimated);
  CHECK(th.K_lower > 0.0);  // lambda + mu below (q-/p+) delta here
}

TEST_CASE("doubling the c weight strictly decreases delta") {
  const Problem p1 = desk_problem(12, 0.005, 0.005, 1.0);
  const Problem p2 = desk_problem(12, 0.005, 0.005, 2.0);
  const ThresholdSet t1 = thresholds_of(p1);
  const ThresholdSet t2 = thresholds_of(p2);
  CHECK(t2.c_sup == doctest::Approx(2.0));
  CHECK(t2.C2 > t1.C2);
  CHECK(t2.delta < t1.delta);
}

TEST_CASE("degenerate weights are a hypothesis error for the constants") {
  auto data = desk_data(0.01, 0.01);
  data.a = ScalarField::constant(0.0);
  data.b = ScalarField::constant(0.0);
  DiscretizationOptions disc;
  disc.n_per_axis = 8;
  const Problem prob = make_problem(data, disc);
  const auto emb = estimate_embedding_constant(
      *prob.grid, *prob.cache, prob.tab->r, prob.tab->pstar, 4, 0, 5);
  CHECK_THROWS_AS(compute_constants(prob, emb), HypothesisError);
}

TEST_CASE("nonnegativize: idempotence, invariance of Q and R, P decrease") {
  const Problem prob = desk_problem(12, 0.01, 0.01);
  Rng rng(3);
  StatePair s;
  s.u.resize(prob.n_interior());
  s.v.resize(prob.n_interior());
  for (auto& x : s.u) x = rng.sign() * rng.uniform(0.0, 1.0);
  for (auto& x : s.v) x = rng.sign() * rng.uniform(0.0, 1.0);

  const StatePair abs1 = nonnegativize(s);
  const StatePair abs2 = nonnegativize(abs1);
  CHECK(abs1.u == abs2.u);
  CHECK(abs1.v == abs2.v);

  CHECK(Q_func(prob, abs1) == doctest::Approx(Q_func(prob, s)).epsilon(1e-14));
  CHECK(R_func(prob, abs1) == doctest::Approx(R_func(prob, s)).epsilon(1e-14));

  // Pairwise triangle inequality makes the kinetic part non-increasing.
  CHECK(P_func(*prob.cache, abs1) <= P_func(*prob.cache, s) * (1.0 + 1e-14));

  StatePair flipped{s.u, s.v};
  for (auto& x : flipped.u) x = -x;
  for (auto& x : flipped.v) x = -x;
  const StatePair abs3 = nonnegativize(flipped);
  CHECK(abs3.u == abs1.u);
  CHECK(abs3.v == abs1.v);
}

TEST_CASE("branch minimization reaches the documented energy signs") {
  const Problem prob0 = desk_problem(16, 1.0, 1.0);
  const ThresholdSet th = thresholds_of(prob0);
  const Problem prob =
      prob0.with_parameters(th.delta0 / 4.0, th.delta0 / 4.0);

  SolverOptions opts;
  opts.max_iters = 600;
  const StatePair init{GridFunction(prob.n_interior(), 1.0),
                       GridFunction(prob.n_interior(), 1.0)};

  const NehariPoint plus = minimize_on_branch(prob, Branch::plus, init, opts);
  CHECK(plus.J < 0.0);
  CHECK(std::abs(plus.P - plus.Q - plus.R) <= 1e-8 * std::max(1.0, plus.P));
  CHECK(plus.phi_dd1 > 0.0);

  const NehariPoint minus =
      minimize_on_branch(prob, Branch::minus, init, opts);
  CHECK(minus.J > 0.0);
  CHECK(std::abs(minus.P - minus.Q - minus.R) <=
        1e-8 * std::max(1.0, minus.P));
  CHECK(minus.phi_dd1 < 0.0);

  // Accepted energies decrease monotonically.
  for (const auto* h : {&plus.history, &minus.history}) {
    for (std::size_t k = 1; k < h->size(); ++k) {
      CHECK((*h)[k] <= (*h)[k - 1]);
    }
  }
}

TEST_CASE("a converged point is a fixed point of the minimizer") {
  const Problem prob0 = desk_problem(12, 1.0, 1.0);
  const ThresholdSet th = thresholds_of(prob0);
  const Problem prob =
      prob0.with_parameters(th.delta0 / 4.0, th.delta0 / 4.0);
  SolverOptions opts;
  const StatePair init{GridFunction(prob.n_interior(), 1.0),
                       GridFunction(prob.n_interior(), 1.0)};
  const NehariPoint first =
      minimize_on_branch(prob, Branch::minus, init, opts);
  REQUIRE(first.converged);
  const NehariPoint again =
      minimize_on_branch(prob, Branch::minus, first.pair, opts);
  CHECK(again.J == doctest::Approx(first.J).epsilon(1e-9));
  CHECK(again.converged);
}

TEST_CASE("solve_two_solutions rejects mu = 0") {
  const Problem prob = desk_problem(8, 0.01, 0.0);
  SolverOptions opts;
  CHECK_THROWS_AS(solve_two_solutions(prob, opts), HypothesisError);
}

TEST_CASE("parameters above the threshold are flagged") {
  const Problem prob0 = desk_problem(8, 1.0, 1.0);
  const ThresholdSet th = thresholds_of(prob0, 8);
  const Problem prob = prob0.with_parameters(5.0 * th.delta, 5.0 * th.delta);
  SolverOptions opts;
  opts.multistart = 1;
  opts.max_iters = 200;
  opts.verify_samples = 0;
  const SolveReport rep = solve_two_solutions(prob, opts);
  CHECK(!rep.threshold_ok);
}

TEST_CASE("two distinct solutions on the desk instance") {
  const Problem prob0 = desk_problem(16, 1.0, 1.0);
  const ThresholdSet th = thresholds_of(prob0);
  const Problem prob =
      prob0.with_parameters(th.delta0 / 4.0, th.delta0 / 4.0);

  SolverOptions opts;
  opts.multistart = 3;
  opts.max_iters = 600;
  opts.verify_samples = 20;
  const SolveReport rep = solve_two_solutions(prob, opts);

  REQUIRE(rep.plus.solved);
  REQUIRE(rep.minus.solved);
  CHECK(rep.threshold_ok);
  CHECK(rep.theta_plus < 0.0);
  CHECK(rep.theta_minus > 0.0);
  CHECK(rep.theta_order_ok);
  CHECK(rep.distinct);
  CHECK(rep.l2_distance > 0.0);
  CHECK(rep.plus.classification == NehariClass::plus);
  CHECK(rep.minus.classification == NehariClass::minus);
  CHECK(rep.plus.min_nodal >= 0.0);
  CHECK(rep.minus.min_nodal >= 0.0);
  CHECK(rep.minus.norm_u > 1e-6);
  CHECK(rep.minus.norm_v > 1e-6);
  CHECK(rep.theta_minus > rep.thresholds.K_lower);
  CHECK(rep.lemma.all_pass());
  // Semi-trivial pair energies are reported as diagnostics.
  CHECK(std::isfinite(rep.semi_trivial_J_u));
  CHECK(std::isfinite(rep.semi_trivial_J_v));
}

TEST_CASE("two solutions on a small 2D instance") {
  ProblemData data = desk_data(1.0, 1.0);
  data.N = 2;
  data.domain.N = 2;
  DiscretizationOptions disc;
  disc.n_per_axis = 4;
  disc.collar_width = 0.5;
  Problem prob = make_problem(data, disc);

  const auto rep0 = check_assumptions(data, *prob.grid);
  CHECK(rep0.all_pass());

  const auto emb = estimate_embedding_constant(
      *prob.grid, *prob.cache, prob.tab->r, prob.tab->pstar, 8, 0, 10);
  const ThresholdSet th = compute_constants(prob, emb);
  prob = prob.with_parameters(th.delta0 / 4.0, th.delta0 / 4.0);

  SolverOptions opts;
  opts.multistart = 2;
  opts.max_iters = 300;
  opts.verify_samples = 0;
  opts.embed_trials = 8;
  const SolveReport rep = solve_two_solutions(prob, opts, &emb);
  REQUIRE(rep.plus.solved);
  REQUIRE(rep.minus.solved);
  CHECK(rep.theta_plus < 0.0);
  CHECK(rep.theta_minus > 0.0);
  CHECK(rep.distinct);
}

TEST_CASE("lemma suite reports clean results on the desk instance") {
  const Problem prob0 = desk_problem(12, 1.0, 1.0);
  const ThresholdSet th0 = thresholds_of(prob0);
  const Problem prob =
      prob0.with_parameters(th0.delta0 / 4.0, th0.delta0 / 4.0);
  const ThresholdSet th = thresholds_of(prob);
  const LemmaReport rep = verify_lemma_suite(prob, th, 40, 5);
  CHECK(rep.all_pass());
  const auto* manifold =
      rep.find("manifold identity |P-Q-R| <= 1e-8 max(1,P)");
  REQUIRE(manifold != nullptr);
  CHECK(manifold->tested > 0);
  const auto* nzero = rep.find("N0 empty at sampled projections");
  REQUIRE(nzero != nullptr);
  CHECK(nzero->tested > 0);
}
