#include "fpxl/vxspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fpxl/errors.hpp"
#include "fpxl/math.hpp"
#include "fpxl/rng.hpp"

namespace fpxl {

double modular_lebesgue(const Grid& grid, const GridFunction& u,
                        const std::vector<double>& gamma_nodes) {
  double sum = 0.0;
  for (int i = 0; i < grid.n_interior; ++i) {
    sum += pow_abs(u[i], gamma_nodes[i]);
  }
  return grid.cell_volume() * sum;
}

ModularEvaluator ModularEvaluator::lebesgue(double cell_volume,
                                            std::vector<double> gamma_nodes) {
  ModularEvaluator m;
  m.is_lebesgue_ = true;
  m.volume_ = cell_volume;
  m.gamma_ = std::move(gamma_nodes);
  return m;
}

ModularEvaluator ModularEvaluator::seminorm_x0(const PairKernelCache& cache) {
  ModularEvaluator m;
  m.is_lebesgue_ = false;
  m.cache_ = &cache;
  return m;
}

double ModularEvaluator::scaled(const GridFunction& u, double eta) const {
  if (is_lebesgue_) {
    double sum = 0.0;
    for (std::size_t i = 0; i < gamma_.size(); ++i) {
      sum += pow_abs(u[i] / eta, gamma_[i]);
    }
    return volume_ * sum;
  }
  const auto n = cache_->n_interior;
  double sum = 0.0;
  for (const auto& e : cache_->pairs) {
    const double ui = u[e.i];
    const double uj = e.j < n ? u[e.j] : 0.0;
    sum += e.w * pow_abs((ui - uj) / eta, e.p);
  }
  return 2.0 * sum;
}

void ModularEvaluator::gradient(const GridFunction& u, GridFunction& out) const {
  if (is_lebesgue_) {
    out.assign(gamma_.size(), 0.0);
    for (std::size_t i = 0; i < gamma_.size(); ++i) {
      out[i] = volume_ * gamma_[i] * pow_signed(u[i], gamma_[i] - 1.0);
    }
    return;
  }
  modular_rho_x0_gradient(*cache_, u, out);
}

double ModularEvaluator::exponent_inf() const {
  if (is_lebesgue_) {
    return *std::min_element(gamma_.begin(), gamma_.end());
  }
  return cache_->p_inf;
}

double ModularEvaluator::exponent_sup() const {
  if (is_lebesgue_) {
    return *std::max_element(gamma_.begin(), gamma_.end());
  }
  return cache_->p_sup;
}

NormResult luxemburg_norm(const ModularEvaluator& m, const GridFunction& u,
                          double tol, int max_iters) {
  if (!(tol > 0.0)) throw UsageError("luxemburg_norm: tol must be positive");
  NormResult r;
  bool zero = true;
  for (double v : u) {
    if (v != 0.0) {
      zero = false;
      break;
    }
  }
  if (zero) return r;

  // Constant exponent: the norm is modular^{1/gamma} in closed form.
  const double g_inf = m.exponent_inf();
  if (g_inf == m.exponent_sup()) {
    const double rho = m(u);
    if (rho == 0.0) return r;
    r.value = std::pow(rho, 1.0 / g_inf);
    r.lo = r.hi = r.value;
    return r;
  }

  // Exponential bracketing from eta = 1: modular(u/eta) is continuous and
  // strictly decreasing, diverging as eta -> 0+ and vanishing at infinity.
  double lo = 1.0, hi = 1.0;
  double m1 = m.scaled(u, 1.0);
  if (std::abs(m1 - 1.0) <= tol) {
    r.value = 1.0;
    r.lo = r.hi = 1.0;
    r.residual = std::abs(m1 - 1.0);
    return r;
  }
  int guard = 0;
  if (m1 > 1.0) {
    while (m.scaled(u, hi) > 1.0) {
      hi *= 2.0;
      if (++guard > 1100) {
        throw NumericalError("luxemburg_norm: bracketing overflow (hi)");
      }
    }
    lo = hi / 2.0;
  } else {
    while (m.scaled(u, lo) < 1.0) {
      lo /= 2.0;
      if (++guard > 1100) {
        throw NumericalError("luxemburg_norm: bracketing underflow (lo)");
      }
    }
    hi = lo * 2.0;
  }

  double mid = 0.5 * (lo + hi);
  double val = m.scaled(u, mid);
  int it = 0;
  while (std::abs(val - 1.0) > tol && it < max_iters) {
    if (val > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    mid = 0.5 * (lo + hi);
    val = m.scaled(u, mid);
    ++it;
  }
  r.value = mid;
  r.iterations = it;
  r.lo = lo;
  r.hi = hi;
  r.residual = std::abs(val - 1.0);
  if (r.residual > tol) {
    std::ostringstream os;
    os << "luxemburg_norm: no convergence, bracket [" << lo << ", " << hi
       << "], residual " << r.residual;
    throw NumericalError(os.str());
  }
  return r;
}

RelationReport check_norm_modular_relations(const ModularEvaluator& m,
                                            const GridFunction& u,
                                            double tol) {
  RelationReport rep;
  rep.modular = m(u);
  rep.norm = luxemburg_norm(m, u).value;
  const double gm = m.exponent_inf();
  const double gp = m.exponent_sup();
  const double rho = rep.modular;
  const double nm = rep.norm;

  const bool unit_band = std::abs(nm - 1.0) <= tol;
  rep.trichotomy_ok =
      (rho > 1.0 + tol ? nm > 1.0 - tol : true) &&
      (rho < 1.0 - tol ? nm < 1.0 + tol : true) &&
      (std::abs(rho - 1.0) <= tol ? std::abs(nm - 1.0) <= tol : true);

  const double allow = tol * std::max(1.0, rho);
  if (unit_band) {
    rep.slack_lower = rep.slack_upper = 0.0;
    rep.sandwich_ok = std::abs(rho - 1.0) <= (gp + 1.0) * tol;
  } else if (nm > 1.0) {
    rep.slack_lower = rho - std::pow(nm, gm);
    rep.slack_upper = std::pow(nm, gp) - rho;
    rep.sandwich_ok = rep.slack_lower >= -allow && rep.slack_upper >= -allow;
  } else {
    rep.slack_lower = rho - std::pow(nm, gp);
    rep.slack_upper = std::pow(nm, gm) - rho;
    rep.sandwich_ok = rep.slack_lower >= -allow && rep.slack_upper >= -allow;
  }
  return rep;
}

std::pair<double, double> power_norm_bound(
    const Grid& grid, const GridFunction& u,
    const std::vector<double>& nu1_nodes,
    const std::vector<double>& nu2_nodes) {
  const int n = grid.n_interior;
  double nu1_inf = std::numeric_limits<double>::infinity();
  double nu1_sup = 0.0;
  for (int i = 0; i < n; ++i) {
    if (nu1_nodes[i] < 0.0) {
      throw HypothesisError("power_norm_bound: nu1 must be non-negative");
    }
    if (nu1_nodes[i] * nu2_nodes[i] < 1.0) {
      throw HypothesisError("power_norm_bound: nu1*nu2 >= 1 violated");
    }
    nu1_inf = std::min(nu1_inf, nu1_nodes[i]);
    nu1_sup = std::max(nu1_sup, nu1_nodes[i]);
  }
  if (!(nu1_sup > 0.0)) {
    throw HypothesisError("power_norm_bound: nu1 must not vanish identically");
  }

  GridFunction w(n);
  std::vector<double> prod(n);
  for (int i = 0; i < n; ++i) {
    w[i] = pow_abs(u[i], nu1_nodes[i]);
    prod[i] = nu1_nodes[i] * nu2_nodes[i];
  }
  const auto m2 = ModularEvaluator::lebesgue(grid.cell_volume(),
                                             std::vector<double>(nu2_nodes));
  const auto m12 = ModularEvaluator::lebesgue(grid.cell_volume(), prod);
  const double lhs = luxemburg_norm(m2, w).value;
  const double base = luxemburg_norm(m12, u).value;
  const double rhs = std::pow(base, nu1_inf) + std::pow(base, nu1_sup);
  return {lhs, rhs};
}

namespace {

GridFunction random_bump(const Grid& grid, Rng& rng) {
  GridFunction u(grid.n_interior, 0.0);
  const Box& box = grid.domain;
  Point c{0, 0}, w{1, 1};
  for (int k = 0; k < grid.N; ++k) {
    const double extent = box.hi[k] - box.lo[k];
    c[k] = box.lo[k] + extent * rng.uniform(0.15, 0.85);
    w[k] = extent * rng.uniform(0.08, 0.35);
  }
  const double amp = rng.uniform(0.5, 2.0);
  for (int i = 0; i < grid.n_interior; ++i) {
    double e = 0.0;
    for (int k = 0; k < grid.N; ++k) {
      const double z = (grid.nodes[i][k] - c[k]) / w[k];
      e += z * z;
    }
    u[i] = amp * std::exp(-e);
  }
  return u;
}

// Gradient of the Luxemburg norm eta(u): by implicit differentiation of
// modular(u/eta) = 1, d eta/du = rho'(z) / <z, rho'(z)> at z = u/eta.
void norm_gradient(const ModularEvaluator& m, const GridFunction& u,
                   double eta, GridFunction& out) {
  GridFunction z(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) z[i] = u[i] / eta;
  m.gradient(z, out);
  const double den = dot(z, out);
  for (double& g : out) g /= den;
}

}  // namespace

EmbeddingEstimate estimate_embedding_constant(
    const Grid& grid, const PairKernelCache& cache,
    const std::vector<double>& r_nodes, const std::vector<double>& pstar_nodes,
    int trials, std::uint64_t seed, int ascent_steps) {
  for (int i = 0; i < grid.n_interior; ++i) {
    if (!(r_nodes[i] < pstar_nodes[i])) {
      throw HypothesisError(
          "estimate_embedding_constant: r(x) < p*_s(x) violated at a node");
    }
  }
  const auto mr = ModularEvaluator::lebesgue(grid.cell_volume(),
                                             std::vector<double>(r_nodes));
  const auto mx = ModularEvaluator::seminorm_x0(cache);

  auto ratio_of = [&](const GridFunction& u) -> double {
    const double den = luxemburg_norm(mx, u).value;
    if (den == 0.0) return -1.0;
    return luxemburg_norm(mr, u).value / den;
  };

  EmbeddingEstimate est;
  est.trials = trials;
  int skipped = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(Rng::substream(seed, static_cast<std::uint64_t>(t)));
    GridFunction u = random_bump(grid, rng);
    double ratio = ratio_of(u);
    if (ratio < 0.0) {
      ++skipped;
      continue;
    }

    // Normalized projected ascent on ||u||_{L^r} / ||u||_{X0}.
    double sigma = 0.5;
    GridFunction gn, gd, trial(u.size());
    for (int step = 0; step < ascent_steps; ++step) {
      const double num = luxemburg_norm(mr, u).value;
      const double den = luxemburg_norm(mx, u).value;
      norm_gradient(mr, u, num, gn);
      norm_gradient(mx, u, den, gd);
      // grad of num/den
      for (std::size_t i = 0; i < u.size(); ++i) {
        gn[i] = (gn[i] - ratio * gd[i]) / den;
      }
      bool moved = false;
      while (sigma > 1e-14) {
        for (std::size_t i = 0; i < u.size(); ++i) {
          trial[i] = u[i] + sigma * gn[i];
        }
        const double tn = luxemburg_norm(mx, trial).value;
        if (tn > 0.0) {
          for (double& v : trial) v /= tn;
          const double tr = ratio_of(trial);
          if (tr > ratio) {
            u = trial;
            ratio = tr;
            sigma *= 1.5;
            moved = true;
            break;
          }
        }
        sigma *= 0.5;
      }
      if (!moved) break;
    }

    if (ratio > est.C_hat) {
      est.C_hat = ratio;
      est.best_candidate = u;
      est.best_trial = t;
    }
  }
  if (skipped == trials) {
    throw NumericalError(
        "estimate_embedding_constant: all candidates had zero norm");
  }
  return est;
}

}  // namespace fpxl
