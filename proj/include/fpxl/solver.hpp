#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fpxl/fibering.hpp"
#include "fpxl/rng.hpp"
#include "fpxl/vxspace.hpp"

namespace fpxl {

// Explicit constants and thresholds of the quantitative lemmas. All of
// them inherit the "estimated" status of the embedding constant C_hat.
struct ThresholdSet {
  double C1 = 0.0;
  double C2 = 0.0;
  double delta = 0.0;
  double delta0 = 0.0;   // (q-/p+) * delta
  double K_lower = 0.0;  // min{d1, d2}, depends on lambda + mu
  bool estimated = true;
  double a_norm_qstar = 0.0;
  double b_norm_qstar = 0.0;
  double c_sup = 0.0;
  double C_hat = 0.0;
};

ThresholdSet compute_constants(const Problem& prob,
                               const EmbeddingEstimate& embedding);

struct SolverOptions {
  double tol_grad = 1e-6;
  int max_iters = 2000;
  int multistart = 8;
  std::uint64_t seed = 0;
  double armijo_c = 1e-4;
  double sigma0 = 1.0;
  int embed_trials = 64;
  int embed_ascent_steps = 50;
  int verify_samples = 50;
};

struct NehariPoint {
  StatePair pair;
  Branch branch = Branch::minus;
  double J = 0.0;
  double P = 0.0, Q = 0.0, R = 0.0;
  double grad_residual = 0.0;
  // Stopping scale: (P+Q+R)/|x|_2 at the initial projected point; the
  // convergence certificate is grad_residual <= tol_grad * grad_scale.
  double grad_scale = 0.0;
  double phi_dd1 = 0.0;  // phi''(1) at the point
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // accepted energies
};

// Projected descent on a Nehari branch: gradient step, re-projection to
// the branch root, Armijo acceptance. Small projected-gradient residual
// certifies an approximate critical point of J itself (Lagrange lemma).
NehariPoint minimize_on_branch(const Problem& prob, Branch branch,
                               const StatePair& init,
                               const SolverOptions& opts);

// Componentwise absolute value; never increases the energy.
StatePair nonnegativize(const StatePair& s);

struct CheckStat {
  std::string name;
  int tested = 0;
  int violations = 0;
  // Smallest margin seen; >= 0 means the inequality held with room.
  double worst_slack = std::numeric_limits<double>::infinity();
  std::string note;
  bool pass() const { return violations == 0; }
};

struct LemmaReport {
  std::vector<CheckStat> checks;
  bool all_pass() const;
  const CheckStat* find(const std::string& name) const;
};

// Empirical verification of the quantitative lemmas on random sampled
// directions and their branch projections. Failures are data, not errors.
LemmaReport verify_lemma_suite(const Problem& prob, const ThresholdSet& th,
                               int samples, std::uint64_t seed);

struct BranchResult {
  bool solved = false;
  NehariPoint point;
  std::string failure;
  double norm_u = 0.0;  // X0 norms of the components
  double norm_v = 0.0;
  double min_nodal = 0.0;
  NehariClass classification = NehariClass::not_on_manifold;
  int starts_used = 0;
};

struct SolveReport {
  BranchResult plus, minus;
  double theta_plus = std::numeric_limits<double>::quiet_NaN();
  double theta_minus = std::numeric_limits<double>::quiet_NaN();
  ThresholdSet thresholds;
  bool threshold_ok = false;  // lambda + mu < delta0
  bool theta_order_ok = false;
  bool distinct = false;
  double l2_distance = 0.0;
  // Energies of the semi-trivial pairs (u,0) and (0,v) built from the
  // minus solution, reported alongside theta- > 0.
  double semi_trivial_J_u = 0.0;
  double semi_trivial_J_v = 0.0;
  LemmaReport lemma;
};

// Minimizes J on both branches from multistart inits, applies the
// non-negativization step before the final polish, and assembles the
// two-solution report. A precomputed embedding estimate (valid for the
// same grid and cache) avoids re-estimating per call.
SolveReport solve_two_solutions(const Problem& prob, const SolverOptions& opts,
                                const EmbeddingEstimate* embedding = nullptr);

// Random smooth bump pair used by multistart and the verification suite.
StatePair random_bump_pair(const Grid& grid, Rng& rng, bool signed_mix);

}  // namespace fpxl
