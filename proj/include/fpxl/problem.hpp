#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fpxl/fields.hpp"
#include "fpxl/grid.hpp"
#include "fpxl/kernel.hpp"

namespace fpxl {

// Bucketing of a nodal exponent array (used by the fibering curve for the
// concave and convex terms).
struct NodeBuckets {
  std::vector<std::int32_t> index;  // per interior node
  std::vector<double> exponent;     // per bucket
  int count() const { return static_cast<int>(exponent.size()); }
};

NodeBuckets bucket_nodes(const std::vector<double>& values, double eps_bucket);

// Immutable per-grid tables of all exponent/weight fields and their
// sampled bounds. Built once, shared read-only afterwards.
struct NodeTables {
  std::vector<double> q, alpha, beta, r;  // r = alpha + beta
  std::vector<double> qstar;              // (alpha+beta)/(alpha+beta-q)
  std::vector<double> a, b, c;
  std::vector<double> pbar, pstar;

  FieldBounds qb, alphab, betab, rb, pb;  // pb over cache pairs + diagonal
  double pstar_inf = 0.0;
  double c_sup = 0.0;
  double volume = 0.0;  // h^N

  NodeBuckets concave;  // q exponents
  NodeBuckets convex;   // alpha+beta exponents
};

struct DiscretizationOptions {
  int n_per_axis = 64;
  double collar_width = 1.0;
  // < 0 selects the default policy: exact buckets (0) for n <= 128 per
  // axis, 1e-3 merging beyond.
  double bucket_eps = -1.0;
  int oversample = 4;
};

// A compiled problem instance: grid, kernel cache and node tables are
// shared immutable state, so copies (e.g. per sweep cell with different
// lambda, mu) are cheap.
struct Problem {
  ProblemData data;
  std::shared_ptr<const Grid> grid;
  std::shared_ptr<const PairKernelCache> cache;
  std::shared_ptr<const NodeTables> tab;
  double bucket_eps = 0.0;

  double lambda() const { return data.lambda; }
  double mu() const { return data.mu; }
  int n_interior() const { return grid->n_interior; }
  double volume() const { return tab->volume; }

  Problem with_parameters(double lambda, double mu) const;
};

Problem make_problem(const ProblemData& data, const DiscretizationOptions& d);

}  // namespace fpxl
