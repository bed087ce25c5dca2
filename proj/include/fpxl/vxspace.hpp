#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fpxl/grid.hpp"
#include "fpxl/kernel.hpp"

namespace fpxl {

// Discrete Lebesgue modular with a variable exponent:
// h^N sum_i |u_i|^{gamma(x_i)}.
double modular_lebesgue(const Grid& grid, const GridFunction& u,
                        const std::vector<double>& gamma_nodes);

// Handle pairing a modular kind (variable-exponent Lebesgue, or the X0
// seminorm modular through a pair cache) with its data. Evaluations are
// pure; safe to share across threads.
class ModularEvaluator {
 public:
  static ModularEvaluator lebesgue(double cell_volume,
                                   std::vector<double> gamma_nodes);
  static ModularEvaluator seminorm_x0(const PairKernelCache& cache);

  double operator()(const GridFunction& u) const { return scaled(u, 1.0); }
  // modular(u / eta); strictly decreasing in eta for u != 0.
  double scaled(const GridFunction& u, double eta) const;
  // d modular / du (carries the exponent factor).
  void gradient(const GridFunction& u, GridFunction& out) const;

  double exponent_inf() const;
  double exponent_sup() const;

 private:
  ModularEvaluator() = default;
  bool is_lebesgue_ = true;
  double volume_ = 0.0;
  std::vector<double> gamma_;
  const PairKernelCache* cache_ = nullptr;  // non-owning
};

struct NormResult {
  double value = 0.0;
  int iterations = 0;
  double lo = 0.0;
  double hi = 0.0;
  double residual = 0.0;  // |modular(u/value) - 1|
};

// Luxemburg norm inf{eta > 0 : modular(u/eta) <= 1}, resolved by
// exponential bracketing from eta = 1 followed by bisection on the
// modular residual.
NormResult luxemburg_norm(const ModularEvaluator& m, const GridFunction& u,
                          double tol = 1e-10, int max_iters = 200);

struct RelationReport {
  double norm = 0.0;
  double modular = 0.0;
  bool trichotomy_ok = false;
  bool sandwich_ok = false;
  double slack_lower = 0.0;  // modular - norm^{exponent on the lower side}
  double slack_upper = 0.0;  // norm^{exponent on the upper side} - modular
};

// Verifies the norm-modular trichotomy and the power sandwich for the
// given function at tolerance tol.
RelationReport check_norm_modular_relations(const ModularEvaluator& m,
                                            const GridFunction& u,
                                            double tol = 1e-9);

// Both sides of the power-norm inequality
// || |u|^{nu1(.)} ||_{L^{nu2}} <= ||u||_{L^{nu1 nu2}}^{nu1-} +
// ||u||_{L^{nu1 nu2}}^{nu1+}, evaluated discretely.
std::pair<double, double> power_norm_bound(const Grid& grid,
                                           const GridFunction& u,
                                           const std::vector<double>& nu1_nodes,
                                           const std::vector<double>& nu2_nodes);

struct EmbeddingEstimate {
  double C_hat = 0.0;
  GridFunction best_candidate;
  int best_trial = -1;  // -1 = ascent-refined
  int trials = 0;
};

// Lower estimate of the best constant in ||u||_{L^{r(x)}} <= C ||u||_{X0},
// from random smooth bump candidates plus normalized projected ascent on
// the Rayleigh-type ratio. Deterministic given the seed.
EmbeddingEstimate estimate_embedding_constant(
    const Grid& grid, const PairKernelCache& cache,
    const std::vector<double>& r_nodes, const std::vector<double>& pstar_nodes,
    int trials, std::uint64_t seed, int ascent_steps = 50);

}  // namespace fpxl
