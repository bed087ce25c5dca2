#include "fpxl/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "fpxl/errors.hpp"
#include "fpxl/math.hpp"

namespace fpxl {

PairKernelCache build_pair_cache(const Grid& grid, const ScalarField& p,
                                 double s, double eps_bucket) {
  if (!(s > 0.0 && s < 1.0)) {
    throw UsageError("build_pair_cache: s must lie in (0,1)");
  }
  if (!p.pair_capable()) {
    throw UsageError("build_pair_cache: p must be a pair (or constant) field");
  }
  if (eps_bucket < 0.0) {
    throw UsageError("build_pair_cache: eps_bucket must be >= 0");
  }

  PairKernelCache cache;
  cache.s = s;
  cache.eps_bucket = eps_bucket;
  cache.n_interior = grid.n_interior;
  cache.N = grid.N;
  cache.cell_volume = grid.cell_volume();

  const auto n_total = static_cast<std::int32_t>(grid.n_total());
  const double vol2 = cache.cell_volume * cache.cell_volume;  // h^{2N}
  cache.p_inf = std::numeric_limits<double>::infinity();
  cache.p_sup = -cache.p_inf;

  // Pairs with both endpoints in the collar are absent: the integrand
  // vanishes there for Dirichlet functions.
  for (std::int32_t i = 0; i < grid.n_interior; ++i) {
    for (std::int32_t j = i + 1; j < n_total; ++j) {
      PairEntry e;
      e.i = i;
      e.j = j;
      e.p = p.at_pair(grid.nodes[i], grid.nodes[j]);
      e.d = distance(grid.nodes[i], grid.nodes[j], grid.N);
      e.w = vol2 / std::pow(e.d, grid.N + s * e.p);
      cache.p_inf = std::min(cache.p_inf, e.p);
      cache.p_sup = std::max(cache.p_sup, e.p);
      cache.pairs.push_back(e);
    }
  }

  // Assign exponent buckets.
  if (eps_bucket == 0.0) {
    std::map<double, std::int32_t> idx;
    for (auto& e : cache.pairs) {
      auto [it, fresh] = idx.try_emplace(e.p, 0);
      if (fresh) {
        it->second = static_cast<std::int32_t>(cache.bucket_exponents.size());
        cache.bucket_exponents.push_back(e.p);
      }
      e.bucket = it->second;
    }
  } else {
    std::map<std::int64_t, std::int32_t> idx;
    for (auto& e : cache.pairs) {
      const auto k =
          static_cast<std::int64_t>(std::floor((e.p - cache.p_inf) / eps_bucket));
      auto [it, fresh] = idx.try_emplace(k, 0);
      if (fresh) {
        it->second = static_cast<std::int32_t>(cache.bucket_exponents.size());
        cache.bucket_exponents.push_back(cache.p_inf + (k + 0.5) * eps_bucket);
      }
      e.bucket = it->second;
    }
  }
  return cache;
}

double modular_rho_x0(const PairKernelCache& cache, const GridFunction& u) {
  const auto n = static_cast<std::int32_t>(cache.n_interior);
  double sum = 0.0;
  for (const auto& e : cache.pairs) {
    const double ui = u[e.i];
    const double uj = e.j < n ? u[e.j] : 0.0;
    sum += e.w * pow_abs(ui - uj, e.p);
  }
  return 2.0 * sum;
}

void modular_rho_x0_gradient(const PairKernelCache& cache,
                             const GridFunction& u, GridFunction& out) {
  const auto n = static_cast<std::int32_t>(cache.n_interior);
  out.assign(n, 0.0);
  for (const auto& e : cache.pairs) {
    const double ui = u[e.i];
    const double uj = e.j < n ? u[e.j] : 0.0;
    const double g = 2.0 * e.w * e.p * pow_signed(ui - uj, e.p - 1.0);
    out[e.i] += g;
    if (e.j < n) out[e.j] -= g;
  }
}

double collar_tail_bound(const Grid& grid, const PairKernelCache& cache,
                         const GridFunction& u) {
  const double W = grid.collar_width_abs();
  const double s = cache.s;
  const double pm = cache.p_inf;
  const double pp = cache.p_sup;
  const double sigma = grid.N == 1 ? 2.0 : 2.0 * M_PI;

  // Radial integral of r^{-1-sp} over (W, inf), split at r = 1 so the
  // worst exponent is used on each side.
  double radial = 0.0;
  if (W >= 1.0) {
    radial = std::pow(W, -s * pm) / (s * pm);
  } else {
    radial = (std::pow(W, -s * pp) - 1.0) / (s * pp) + 1.0 / (s * pm);
  }

  double mass = 0.0;
  for (int i = 0; i < grid.n_interior; ++i) {
    mass += std::max(pow_abs(u[i], pm), pow_abs(u[i], pp));
  }
  // Factor 2 for ordered-pair integration, matching modular_rho_x0.
  return 2.0 * grid.cell_volume() * mass * sigma * radial;
}

void dump_pairs_csv(std::ostream& os, const PairKernelCache& cache) {
  os << "i,j,d_ij,p_ij,w_ij\n";
  char buf[160];
  for (const auto& e : cache.pairs) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g\n", e.i, e.j, e.d,
                  e.p, e.w);
    os << buf;
  }
}

}  // namespace fpxl
