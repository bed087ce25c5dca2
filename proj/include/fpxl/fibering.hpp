#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fpxl/energy.hpp"
#include "fpxl/problem.hpp"

namespace fpxl {

// One exponent bucket of the fibering representation. `coef` carries the
// raw coefficient (used by phi' and phi''), `coef_weighted` the 1/exponent
// weighted one (used by phi itself). In exact mode coef_weighted equals
// coef / e.
struct FiberingBucket {
  double e = 0.0;
  double coef = 0.0;
  double coef_weighted = 0.0;
};

// Exponent-bucketed representation of phi_{u,v}(t) = J(tu, tv):
//   phi(t)   = sum A~ t^e  - sum B~ t^q  - sum D~ t^r
//   phi'(t)  = sum A t^{e-1} - sum B t^{q-1} - sum D t^{r-1}
//   phi''(t) = sum A(e-1) t^{e-2} - sum B(q-1) t^{q-2} - sum D(r-1) t^{r-2}
// with A from the kinetic pairs, B from the concave term, D from the
// convex coupling. All coefficients are non-negative and the exponent
// ranges are ordered q < p < r, mirroring the standing hypotheses.
struct FiberingCurve {
  std::vector<FiberingBucket> kinetic;  // A buckets, exponents p
  std::vector<FiberingBucket> concave;  // B buckets, exponents q
  std::vector<FiberingBucket> convex;   // D buckets, exponents alpha+beta
  double eps_bucket = 0.0;

  double total_kinetic() const;  // = P(u,v)
  double total_concave() const;  // = Q(u,v)
  double total_convex() const;   // = R(u,v)
};

// eps_bucket < 0 selects the problem's bucket policy. Throws UsageError
// for the zero pair.
FiberingCurve build_fibering(const Problem& prob, const StatePair& s,
                             double eps_bucket = -1.0);

// order 0, 1 or 2 for phi, phi', phi''. t must be positive.
double fibering_eval(const FiberingCurve& c, double t, int order);

// Upper bound on |phi_bucketed(t) - phi_exact(t)|: every merged exponent
// is within eps_bucket/2 of its bucket value, so each t^e term errs by a
// factor of at most exp(eps/2 |log t|) - 1. Zero in exact mode and at
// t = 1.
double fibering_eval_error_bound(const FiberingCurve& c, double t);

struct FiberingRoots {
  std::optional<double> t_plus;   // local-min root, phi''(t+) > 0
  std::optional<double> t_minus;  // local-max root, phi''(t-) < 0
  std::optional<double> t_star;   // zero of phi between the roots
  double t_max_f = 0.0;           // argmax of f1 - f3
  double phi_dd_plus = 0.0;
  double phi_dd_minus = 0.0;
  double resid_plus = 0.0;   // |phi'(t+)|
  double resid_minus = 0.0;  // |phi'(t-)|
  int iterations = 0;
  std::string note;  // set for degenerate / no-root outcomes
};

// Root structure of phi': with Q = 0 only the ray maximum t- exists; with
// Q > 0 either both roots t+ < t- exist or the direction is in the
// no-root regime (lambda + mu too large for this direction).
FiberingRoots find_roots(const FiberingCurve& c, double tol = 1e-12);

enum class Branch { plus, minus };

enum class NehariClass { plus, minus, zero_within_tol, not_on_manifold };

NehariClass classify_nehari(const Problem& prob, const StatePair& s,
                            double tol = 1e-8);

struct Projection {
  StatePair point;
  double t = 0.0;
  double energy = 0.0;  // phi(t) = J(point)
  double phi_dd = 0.0;  // phi''(t)
  FiberingRoots roots;
};

// Scales the direction onto the requested branch of the Nehari set.
// Throws BranchUnavailableError when the branch root does not exist.
Projection project(const Problem& prob, const StatePair& s, Branch branch);

const char* to_string(Branch b);
const char* to_string(NehariClass c);

}  // namespace fpxl
