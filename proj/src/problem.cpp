#include "fpxl/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "fpxl/errors.hpp"

namespace fpxl {

NodeBuckets bucket_nodes(const std::vector<double>& values,
                         double eps_bucket) {
  NodeBuckets nb;
  nb.index.resize(values.size());
  if (values.empty()) return nb;
  if (eps_bucket == 0.0) {
    std::map<double, std::int32_t> idx;
    for (std::size_t i = 0; i < values.size(); ++i) {
      auto [it, fresh] = idx.try_emplace(values[i], 0);
      if (fresh) {
        it->second = static_cast<std::int32_t>(nb.exponent.size());
        nb.exponent.push_back(values[i]);
      }
      nb.index[i] = it->second;
    }
  } else {
    const double lo = *std::min_element(values.begin(), values.end());
    std::map<std::int64_t, std::int32_t> idx;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto k =
          static_cast<std::int64_t>(std::floor((values[i] - lo) / eps_bucket));
      auto [it, fresh] = idx.try_emplace(k, 0);
      if (fresh) {
        it->second = static_cast<std::int32_t>(nb.exponent.size());
        nb.exponent.push_back(lo + (k + 0.5) * eps_bucket);
      }
      nb.index[i] = it->second;
    }
  }
  return nb;
}

namespace {

std::vector<double> node_values(const ScalarField& f, const Grid& grid) {
  const int n = grid.n_interior;
  std::vector<double> out(n);
  if (f.kind() == FieldKind::tabulated) {
    if (static_cast<int>(f.table().size()) != n) {
      throw UsageError("tabulated field size does not match interior nodes");
    }
    out = f.table();
  } else {
    for (int i = 0; i < n; ++i) out[i] = f.at(grid.nodes[i]);
  }
  return out;
}

FieldBounds bounds_of(const std::vector<double>& v) {
  FieldBounds b;
  b.inf = *std::min_element(v.begin(), v.end());
  b.sup = *std::max_element(v.begin(), v.end());
  return b;
}

}  // namespace

Problem make_problem(const ProblemData& data, const DiscretizationOptions& d) {
  if (data.N != data.domain.N) {
    throw UsageError("make_problem: N does not match the domain dimension");
  }
  double eps = d.bucket_eps;
  if (eps < 0.0) eps = d.n_per_axis <= 128 ? 0.0 : 1e-3;

  Problem prob;
  prob.data = data;
  prob.bucket_eps = eps;
  prob.grid = std::make_shared<Grid>(
      build_grid(data.domain, d.n_per_axis, d.collar_width));
  prob.cache = std::make_shared<PairKernelCache>(
      build_pair_cache(*prob.grid, data.p, data.s, eps));

  const Grid& grid = *prob.grid;
  auto tab = std::make_shared<NodeTables>();
  tab->volume = grid.cell_volume();
  tab->q = node_values(data.q, grid);
  tab->alpha = node_values(data.alpha, grid);
  tab->beta = node_values(data.beta, grid);
  tab->a = node_values(data.a, grid);
  tab->b = node_values(data.b, grid);
  tab->c = node_values(data.c, grid);

  const int n = grid.n_interior;
  tab->r.resize(n);
  tab->qstar.resize(n);
  tab->pbar.resize(n);
  tab->pstar.resize(n);
  for (int i = 0; i < n; ++i) {
    tab->r[i] = tab->alpha[i] + tab->beta[i];
    const double den = tab->r[i] - tab->q[i];
    tab->qstar[i] = den > 0.0 ? tab->r[i] / den
                              : std::numeric_limits<double>::infinity();
    tab->pbar[i] = data.p.at_pair(grid.nodes[i], grid.nodes[i]);
    tab->pstar[i] = data.s * tab->pbar[i] < data.N
                        ? data.N * tab->pbar[i] / (data.N - data.s * tab->pbar[i])
                        : std::numeric_limits<double>::infinity();
  }

  // Bounds: oversampled closure for point fields where possible, tables
  // otherwise; p over the cache pairs plus the diagonal.
  const auto pts = closure_samples(grid, d.oversample);
  auto safe_bounds = [&](const ScalarField& f,
                         const std::vector<double>& fallback) {
    if (f.kind() == FieldKind::tabulated) return bounds_of(fallback);
    return exponent_bounds(f, pts);
  };
  tab->qb = safe_bounds(data.q, tab->q);
  tab->alphab = safe_bounds(data.alpha, tab->alpha);
  tab->betab = safe_bounds(data.beta, tab->beta);
  tab->rb = {tab->alphab.inf + tab->betab.inf, tab->alphab.sup + tab->betab.sup};
  tab->pb = {prob.cache->p_inf, prob.cache->p_sup};
  for (int i = 0; i < n; ++i) {
    tab->pb.inf = std::min(tab->pb.inf, tab->pbar[i]);
    tab->pb.sup = std::max(tab->pb.sup, tab->pbar[i]);
  }
  tab->pstar_inf = *std::min_element(tab->pstar.begin(), tab->pstar.end());
  if (data.c.kind() == FieldKind::tabulated) {
    tab->c_sup = 0.0;
    for (double v : tab->c) tab->c_sup = std::max(tab->c_sup, std::abs(v));
  } else {
    tab->c_sup = 0.0;
    for (const auto& x : pts) {
      tab->c_sup = std::max(tab->c_sup, std::abs(data.c.at(x)));
    }
  }

  tab->concave = bucket_nodes(tab->q, eps);
  tab->convex = bucket_nodes(tab->r, eps);
  prob.tab = std::move(tab);
  return prob;
}

Problem Problem::with_parameters(double lambda, double mu) const {
  Problem p = *this;
  p.data.lambda = lambda;
  p.data.mu = mu;
  return p;
}

}  // namespace fpxl
