#include "fpxl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fpxl/errors.hpp"
#include "fpxl/math.hpp"

namespace fpxl {

ThresholdSet compute_constants(const Problem& prob,
                               const EmbeddingEstimate& embedding) {
  const auto& t = *prob.tab;
  const double qm = t.qb.inf, qp = t.qb.sup;
  const double pm = t.pb.inf, pp = t.pb.sup;
  const double rm = t.rb.inf, rp = t.rb.sup;

  if (!(rm - pp > 0.0 && rm - qm > 0.0 && pm - qp > 0.0 && rp - qp > 0.0)) {
    throw HypothesisError(
        "compute_constants: exponent gaps are degenerate");
  }

  ThresholdSet th;
  th.C_hat = embedding.C_hat;
  th.c_sup = t.c_sup;
  const auto mq = ModularEvaluator::lebesgue(t.volume,
                                             std::vector<double>(t.qstar));
  th.a_norm_qstar = luxemburg_norm(mq, t.a).value;
  th.b_norm_qstar = luxemburg_norm(mq, t.b).value;

  const double Ch = th.C_hat;
  const double K1 = 2.0 * (th.a_norm_qstar + th.b_norm_qstar) *
                    std::max(std::pow(Ch, qm), std::pow(Ch, qp));
  th.C1 = 4.0 * K1;
  const double K2 =
      th.c_sup * std::max(std::pow(Ch, rm), std::pow(Ch, rp));
  th.C2 = 4.0 * K2 + 1.0;

  if (!(th.C1 > 0.0)) {
    throw HypothesisError(
        "compute_constants: C1 degenerates (a and b vanish identically)");
  }

  const double theta = (pm - qp) / (th.C2 * (rp - qp));
  th.delta = (1.0 / th.C1) * ((rm - pp) / (rm - qm)) *
             std::pow(theta, (pp - qm) / (rm - pp));
  th.delta0 = (qm / pp) * th.delta;

  const double lam_mu = prob.lambda() + prob.mu();
  const double d1 =
      std::pow(theta, qm / (rm - pp)) *
      ((1.0 / pp - 1.0 / rm) * std::pow(theta, (pp - qm) / (rm - pp)) -
       (1.0 / qm - 1.0 / rm) * th.C1 * lam_mu);
  const double d2 = std::pow(theta, (qp - qm) / (rm - pp)) * d1;
  th.K_lower = std::min(d1, d2);
  th.estimated = true;
  return th;
}

StatePair nonnegativize(const StatePair& s) {
  StatePair out = s;
  for (double& x : out.u) x = std::abs(x);
  for (double& x : out.v) x = std::abs(x);
  return out;
}

namespace {

double pair_dot(const StatePair& a, const StatePair& b) {
  return dot(a.u, b.u) + dot(a.v, b.v);
}

bool is_zero(const StatePair& s) {
  for (double x : s.u) {
    if (x != 0.0) return false;
  }
  for (double x : s.v) {
    if (x != 0.0) return false;
  }
  return true;
}

GridFunction bump_component(const Grid& grid, Rng& rng, bool signed_mix) {
  GridFunction u(grid.n_interior, 0.0);
  const int n_bumps = 1 + static_cast<int>(rng.integer() % 2);
  for (int b = 0; b < n_bumps; ++b) {
    Point c{0, 0}, w{1, 1};
    for (int k = 0; k < grid.N; ++k) {
      const double extent = grid.domain.hi[k] - grid.domain.lo[k];
      c[k] = grid.domain.lo[k] + extent * rng.uniform(0.15, 0.85);
      w[k] = extent * rng.uniform(0.08, 0.3);
    }
    const double amp =
        rng.uniform(0.4, 1.6) * (signed_mix ? rng.sign() : 1.0);
    for (int i = 0; i < grid.n_interior; ++i) {
      double e = 0.0;
      for (int k = 0; k < grid.N; ++k) {
        const double z = (grid.nodes[i][k] - c[k]) / w[k];
        e += z * z;
      }
      u[i] += amp * std::exp(-e);
    }
  }
  return u;
}

}  // namespace

StatePair random_bump_pair(const Grid& grid, Rng& rng, bool signed_mix) {
  StatePair s;
  s.u = bump_component(grid, rng, signed_mix);
  s.v = bump_component(grid, rng, signed_mix);
  return s;
}

NehariPoint minimize_on_branch(const Problem& prob, Branch branch,
                               const StatePair& init,
                               const SolverOptions& opts) {
  Projection pr = project(prob, init, branch);
  StatePair x = pr.point;
  double Jx = pr.energy;

  NehariPoint out;
  out.branch = branch;
  out.history.push_back(Jx);

  auto [gu, gv] = grad_J(prob, x);
  StatePair g{std::move(gu), std::move(gv)};
  double gnorm2 = pair_dot(g, g);

  // Gradient magnitude scale of the initial point: energy terms divided
  // by the point's Euclidean size. Dimensionally consistent across the
  // tiny N+ points and the O(1) N- points alike.
  {
    const EnergyBreakdown e0 = energy_J(prob, x);
    const double xlen = std::sqrt(pair_dot(x, x));
    out.grad_scale = (e0.P + e0.Q + e0.R) / std::max(xlen, 1e-300);
  }

  auto residual = [&]() {
    // Gradient minus its component along the ray direction.
    const double gx = pair_dot(g, x);
    const double xx = pair_dot(x, x);
    const double r2 = std::max(0.0, gnorm2 - gx * gx / xx);
    return std::sqrt(r2);
  };

  double resid = residual();
  double sigma_start = opts.sigma0;
  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    if (resid <= opts.tol_grad * out.grad_scale) {
      out.converged = true;
      break;
    }
    double sigma = sigma_start;
    bool accepted = false;
    bool branch_blocked = false;
    StatePair trial;
    while (sigma >= 1e-18 * sigma_start) {
      trial.u = x.u;
      trial.v = x.v;
      axpy(-sigma, g.u, trial.u);
      axpy(-sigma, g.v, trial.v);
      if (is_zero(trial)) {
        sigma *= 0.5;
        continue;
      }
      try {
        Projection step = project(prob, trial, branch);
        branch_blocked = false;
        if (step.energy <= Jx - opts.armijo_c * sigma * gnorm2) {
          x = std::move(step.point);
          Jx = step.energy;
          accepted = true;
          break;
        }
      } catch (const BranchUnavailableError&) {
        // Branch vanished along the path; retreat toward the current
        // iterate, which is still on the branch.
        branch_blocked = true;
      }
      sigma *= 0.5;
    }
    if (!accepted) {
      if (branch_blocked && resid > opts.tol_grad * out.grad_scale) {
        throw NumericalError(
            "minimize_on_branch: branch root unavailable arbitrarily close "
            "to the current iterate");
      }
      break;  // step collapse
    }
    sigma_start = std::min(opts.sigma0, 4.0 * sigma);
    out.history.push_back(Jx);
    std::tie(g.u, g.v) = grad_J(prob, x);
    gnorm2 = pair_dot(g, g);
    resid = residual();
  }
  if (!out.converged) out.converged = resid <= opts.tol_grad * out.grad_scale;

  const EnergyBreakdown e = energy_J(prob, x);
  out.pair = std::move(x);
  out.J = e.J;
  out.P = e.P;
  out.Q = e.Q;
  out.R = e.R;
  out.grad_residual = resid;
  out.iterations = iter;
  const FiberingCurve c = build_fibering(prob, out.pair);
  out.phi_dd1 = fibering_eval(c, 1.0, 2);
  return out;
}

bool LemmaReport::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass()) return false;
  }
  return true;
}

const CheckStat* LemmaReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

LemmaReport verify_lemma_suite(const Problem& prob, const ThresholdSet& th,
                               int samples, std::uint64_t seed) {
  const auto& t = *prob.tab;
  const double qm = t.qb.inf, qp = t.qb.sup;
  const double pm = t.pb.inf, pp = t.pb.sup;
  const double rm = t.rb.inf, rp = t.rb.sup;
  const double lam_mu = prob.lambda() + prob.mu();
  const double tol = 1e-9;

  const bool below_delta = lam_mu < th.delta;
  const bool below_qp_delta = lam_mu < (qm / pp) * th.delta;

  auto named = [](const char* name) {
    CheckStat c;
    c.name = name;
    return c;
  };
  CheckStat p_lower = named("P lower bound vs norm power");
  CheckStat p_upper = named("P upper bound vs norm power");
  CheckStat q_bound = named("Q <= C1(lambda+mu) max norm^q");
  CheckStat r_bound = named("R <= C2 max norm^(alpha+beta)");
  CheckStat plus_q = named("N+ implies Q > 0");
  CheckStat plus_j = named("N+ implies J < 0");
  CheckStat minus_r = named("N- implies R > 0");
  CheckStat minus_j = named("N- implies J > 0");
  CheckStat minus_k = named("theta- above K_lower");
  CheckStat nzero = named("N0 empty at sampled projections");
  CheckStat manifold = named("manifold identity |P-Q-R| <= 1e-8 max(1,P)");
  CheckStat coercive = named("coercivity lower bound on N");
  if (!below_delta) {
    plus_j.note = nzero.note = "skipped: lambda+mu >= delta estimate";
  }
  if (!below_qp_delta) {
    minus_j.note = minus_k.note = "skipped: lambda+mu >= (q-/p+) delta";
  }

  const auto mx = ModularEvaluator::seminorm_x0(*prob.cache);

  auto observe = [](CheckStat& c, double slack, double tolerance) {
    ++c.tested;
    c.worst_slack = std::min(c.worst_slack, slack);
    if (slack < -tolerance) ++c.violations;
  };

  for (int k = 0; k < samples; ++k) {
    Rng rng(Rng::substream(seed, static_cast<std::uint64_t>(k)));
    StatePair dir = random_bump_pair(*prob.grid, rng, /*signed_mix=*/true);
    // Spread the norms across both sides of 1.
    const double f = std::exp(rng.uniform(-1.5, 1.5));
    scale(dir.u, f);
    scale(dir.v, f);
    if (is_zero(dir)) continue;

    const double P = P_func(*prob.cache, dir);
    const double Q = Q_func(prob, dir);
    const double R = R_func(prob, dir);
    const double nu = luxemburg_norm(mx, dir.u).value;
    const double nv = luxemburg_norm(mx, dir.v).value;
    const double nrm = std::max(nu, nv);

    if (std::abs(nrm - 1.0) > tol) {
      const double lo_e = nrm > 1.0 ? pm : pp;
      const double hi_e = nrm > 1.0 ? pp : pm;
      observe(p_lower, P - std::pow(nrm, lo_e), tol * std::max(1.0, P));
      observe(p_upper, 2.0 * std::pow(nrm, hi_e) - P, tol * std::max(1.0, P));
    }
    const double qcap =
        th.C1 * lam_mu * std::max(std::pow(nrm, qm), std::pow(nrm, qp));
    observe(q_bound, qcap - Q, tol * std::max(1.0, qcap));
    const double rcap = th.C2 * std::max(std::pow(nrm, rm), std::pow(nrm, rp));
    observe(r_bound, rcap - R, tol * std::max(1.0, rcap));

    auto inspect_point = [&](const Projection& proj, Branch branch) {
      const EnergyBreakdown e = energy_J(prob, proj.point);
      observe(manifold,
              1e-8 * std::max(1.0, e.P) - std::abs(e.P - e.Q - e.R), 0.0);
      const FiberingCurve pc = build_fibering(prob, proj.point);
      const double dd = fibering_eval(pc, 1.0, 2);
      double dd_scale = 0.0;
      for (const auto& b : pc.kinetic) dd_scale += b.coef * b.e;
      for (const auto& b : pc.concave) dd_scale += b.coef * b.e;
      for (const auto& b : pc.convex) dd_scale += b.coef * b.e;
      if (below_delta) {
        observe(nzero, std::abs(dd) - 1e-8 * dd_scale, 0.0);
      }
      if (branch == Branch::plus) {
        observe(plus_q, e.Q, 0.0);
        if (below_delta) observe(plus_j, -e.J, 0.0);
      } else {
        observe(minus_r, e.R, 0.0);
        if (below_qp_delta) {
          observe(minus_j, e.J, 0.0);
          observe(minus_k, e.J - th.K_lower, tol);
        }
      }
      // Coercivity bound holds on the manifold for norms above 1.
      const double nnu = luxemburg_norm(mx, proj.point.u).value;
      const double nnv = luxemburg_norm(mx, proj.point.v).value;
      const double pn = std::max(nnu, nnv);
      if (pn > 1.0 + tol) {
        const double bound =
            (1.0 / pp - 1.0 / rm) * std::pow(pn, pm) -
            th.C1 * lam_mu * (1.0 / qm - 1.0 / rm) * std::pow(pn, qp);
        observe(coercive, e.J - bound, tol * std::max(1.0, std::abs(e.J)));
      }
    };

    try {
      inspect_point(project(prob, dir, Branch::plus), Branch::plus);
    } catch (const BranchUnavailableError&) {
    }
    try {
      inspect_point(project(prob, dir, Branch::minus), Branch::minus);
    } catch (const BranchUnavailableError&) {
    }
  }

  LemmaReport rep;
  rep.checks = {p_lower, p_upper, q_bound, r_bound,  plus_q,   plus_j,
                minus_r, minus_j, minus_k, nzero,    manifold, coercive};
  return rep;
}

namespace {

BranchResult solve_branch(const Problem& prob, Branch branch,
                          const SolverOptions& opts) {
  BranchResult res;
  std::vector<StatePair> inits;
  inits.push_back(
      {GridFunction(prob.n_interior(), 1.0), GridFunction(prob.n_interior(), 1.0)});
  const int want = std::max(0, opts.multistart);
  int draw = 0;
  while (static_cast<int>(inits.size()) < want + 1 && draw < 4 * (want + 4)) {
    Rng rng(Rng::substream(opts.seed ^ 0x5eed5eedull,
                           static_cast<std::uint64_t>(draw++)));
    StatePair s = random_bump_pair(*prob.grid, rng, /*signed_mix=*/false);
    if (is_zero(s)) continue;
    // The plus branch needs Q > 0 on the direction (only t- exists when
    // Q = 0); resample degenerate draws.
    if (branch == Branch::plus && !(Q_func(prob, s) > 0.0)) continue;
    inits.push_back(std::move(s));
  }

  bool have = false;
  NehariPoint best;
  std::string last_failure = "no admissible start";
  for (const auto& init : inits) {
    ++res.starts_used;
    try {
      NehariPoint pt = minimize_on_branch(prob, branch, init, opts);
      if (!have || pt.J < best.J) {
        best = std::move(pt);
        have = true;
      }
    } catch (const std::exception& e) {
      last_failure = e.what();
    }
  }
  if (!have) {
    res.failure = last_failure;
    return res;
  }

  // Non-negativization before the final polish, then re-polish until the
  // point is nodally non-negative (generically immediate).
  for (int round = 0; round < 5; ++round) {
    double min_nodal = 0.0;
    for (double x : best.pair.u) min_nodal = std::min(min_nodal, x);
    for (double x : best.pair.v) min_nodal = std::min(min_nodal, x);
    if (min_nodal >= 0.0 && round > 0) break;
    try {
      const StatePair nn = nonnegativize(best.pair);
      NehariPoint polished = minimize_on_branch(prob, branch, nn, opts);
      best = std::move(polished);
    } catch (const std::exception& e) {
      res.failure = std::string("polish failed: ") + e.what();
      break;
    }
  }

  res.solved = true;
  res.point = std::move(best);
  const auto mx = ModularEvaluator::seminorm_x0(*prob.cache);
  res.norm_u = luxemburg_norm(mx, res.point.pair.u).value;
  res.norm_v = luxemburg_norm(mx, res.point.pair.v).value;
  res.min_nodal = std::numeric_limits<double>::infinity();
  for (double x : res.point.pair.u) res.min_nodal = std::min(res.min_nodal, x);
  for (double x : res.point.pair.v) res.min_nodal = std::min(res.min_nodal, x);
  res.classification = classify_nehari(prob, res.point.pair);
  return res;
}

}  // namespace

SolveReport solve_two_solutions(const Problem& prob, const SolverOptions& opts,
                                const EmbeddingEstimate* embedding) {
  if (!(prob.lambda() > 0.0 && prob.mu() > 0.0)) {
    throw HypothesisError(
        "solve_two_solutions: lambda and mu must be positive");
  }

  SolveReport rep;
  EmbeddingEstimate emb;
  if (embedding) {
    emb = *embedding;
  } else {
    emb = estimate_embedding_constant(*prob.grid, *prob.cache, prob.tab->r,
                                      prob.tab->pstar, opts.embed_trials,
                                      opts.seed, opts.embed_ascent_steps);
  }
  rep.thresholds = compute_constants(prob, emb);
  rep.threshold_ok = prob.lambda() + prob.mu() < rep.thresholds.delta0;

  rep.plus = solve_branch(prob, Branch::plus, opts);
  rep.minus = solve_branch(prob, Branch::minus, opts);

  if (rep.plus.solved) rep.theta_plus = rep.plus.point.J;
  if (rep.minus.solved) rep.theta_minus = rep.minus.point.J;
  rep.theta_order_ok = rep.plus.solved && rep.minus.solved &&
                       rep.theta_plus < 0.0 && rep.theta_minus > 0.0;

  if (rep.plus.solved && rep.minus.solved) {
    double d2 = 0.0;
    for (int i = 0; i < prob.n_interior(); ++i) {
      const double du = rep.plus.point.pair.u[i] - rep.minus.point.pair.u[i];
      const double dv = rep.plus.point.pair.v[i] - rep.minus.point.pair.v[i];
      d2 += du * du + dv * dv;
    }
    rep.l2_distance = std::sqrt(prob.volume() * d2);
    rep.distinct = rep.plus.classification == NehariClass::plus &&
                   rep.minus.classification == NehariClass::minus &&
                   rep.l2_distance > 0.0;
  }

  if (rep.minus.solved) {
    const int n = prob.n_interior();
    StatePair semi_u{rep.minus.point.pair.u, GridFunction(n, 0.0)};
    StatePair semi_v{GridFunction(n, 0.0), rep.minus.point.pair.v};
    rep.semi_trivial_J_u = energy_J(prob, semi_u).J;
    rep.semi_trivial_J_v = energy_J(prob, semi_v).J;
  }

  rep.lemma = verify_lemma_suite(prob, rep.thresholds, opts.verify_samples,
                                 opts.seed);
  return rep;
}

}  // namespace fpxl
