#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fpxl/fields.hpp"
#include "fpxl/grid.hpp"

namespace fpxl {

// One unordered node pair (i < j) with at least one interior endpoint.
struct PairEntry {
  std::int32_t i = 0;
  std::int32_t j = 0;
  double p = 0.0;       // p(x_i, x_j)
  double d = 0.0;       // |x_i - x_j|
  double w = 0.0;       // h^{2N} / d^{N + s p}
  std::int32_t bucket = 0;
};

// Precomputed pairwise kernel data; the workhorse of all nonlocal sums.
// Immutable after build.
struct PairKernelCache {
  double s = 0.0;
  double eps_bucket = 0.0;
  int n_interior = 0;
  int N = 1;
  double cell_volume = 0.0;
  std::vector<PairEntry> pairs;
  std::vector<double> bucket_exponents;
  double p_inf = 0.0;  // over cache pairs
  double p_sup = 0.0;

  int bucket_count() const {
    return static_cast<int>(bucket_exponents.size());
  }
};

// Builds the cache over all unordered pairs with an interior endpoint.
// eps_bucket = 0 gives one bucket per distinct exponent (exact mode);
// eps_bucket > 0 merges exponents into intervals of that width, each
// represented by its midpoint.
PairKernelCache build_pair_cache(const Grid& grid, const ScalarField& p,
                                 double s, double eps_bucket = 0.0);

// Discrete modular rho_{X0}(u) = 2 sum_pairs w_ij |u_i - u_j|^{p_ij};
// the factor 2 restores ordered-pair integration. Collar values are 0.
double modular_rho_x0(const PairKernelCache& cache, const GridFunction& u);

// d/du of the modular (carries the exponent factor p_ij).
void modular_rho_x0_gradient(const PairKernelCache& cache,
                             const GridFunction& u, GridFunction& out);

// Upper bound on the part of rho_{X0}(u) lost to truncating the exterior
// at the collar width: per interior node the tail integrand is bounded by
// max(|u|^{p-}, |u|^{p+}) times the radial integral of r^{-1-s p} outside
// the collar.
double collar_tail_bound(const Grid& grid, const PairKernelCache& cache,
                         const GridFunction& u);

// Debug dump, one row per pair: i, j, d_ij, p_ij, w_ij.
void dump_pairs_csv(std::ostream& os, const PairKernelCache& cache);

}  // namespace fpxl
