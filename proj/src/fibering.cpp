#include "fpxl/fibering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "fpxl/errors.hpp"
#include "fpxl/math.hpp"

namespace fpxl {

namespace {

double total(const std::vector<FiberingBucket>& bs) {
  double s = 0.0;
  for (const auto& b : bs) s += b.coef;
  return s;
}

void compress(std::vector<FiberingBucket>& bs) {
  bs.erase(std::remove_if(bs.begin(), bs.end(),
                          [](const FiberingBucket& b) {
                            return b.coef == 0.0 && b.coef_weighted == 0.0;
                          }),
           bs.end());
  std::sort(bs.begin(), bs.end(),
            [](const FiberingBucket& x, const FiberingBucket& y) {
              return x.e < y.e;
            });
}

}  // namespace

double FiberingCurve::total_kinetic() const { return total(kinetic); }
double FiberingCurve::total_concave() const { return total(concave); }
double FiberingCurve::total_convex() const { return total(convex); }

FiberingCurve build_fibering(const Problem& prob, const StatePair& s,
                             double eps_bucket) {
  const auto& cache = *prob.cache;
  const auto& tab = *prob.tab;
  const int n = prob.n_interior();

  bool zero = true;
  for (int i = 0; i < n && zero; ++i) {
    zero = s.u[i] == 0.0 && s.v[i] == 0.0;
  }
  if (zero) throw UsageError("build_fibering: zero pair has no fibering map");

  FiberingCurve c;
  c.eps_bucket = eps_bucket < 0.0 ? prob.bucket_eps : eps_bucket;
  const bool cached_buckets = eps_bucket < 0.0 || eps_bucket == prob.bucket_eps;

  // Kinetic buckets from the pair cache. Coefficient powers always use the
  // exact per-pair exponent; only the t-exponent is bucketed.
  if (cached_buckets) {
    c.kinetic.resize(cache.bucket_exponents.size());
    for (std::size_t k = 0; k < cache.bucket_exponents.size(); ++k) {
      c.kinetic[k].e = cache.bucket_exponents[k];
    }
    for (const auto& pe : cache.pairs) {
      const double du = s.u[pe.i] - (pe.j < n ? s.u[pe.j] : 0.0);
      const double dv = s.v[pe.i] - (pe.j < n ? s.v[pe.j] : 0.0);
      const double m = 2.0 * pe.w * (pow_abs(du, pe.p) + pow_abs(dv, pe.p));
      c.kinetic[pe.bucket].coef += m;
      c.kinetic[pe.bucket].coef_weighted += m / pe.p;
    }
  } else {
    std::map<double, FiberingBucket> acc;
    const double eps = c.eps_bucket;
    for (const auto& pe : cache.pairs) {
      const double du = s.u[pe.i] - (pe.j < n ? s.u[pe.j] : 0.0);
      const double dv = s.v[pe.i] - (pe.j < n ? s.v[pe.j] : 0.0);
      const double m = 2.0 * pe.w * (pow_abs(du, pe.p) + pow_abs(dv, pe.p));
      const double key =
          eps == 0.0 ? pe.p
                     : cache.p_inf +
                           (std::floor((pe.p - cache.p_inf) / eps) + 0.5) * eps;
      auto& b = acc[key];
      b.e = key;
      b.coef += m;
      b.coef_weighted += m / pe.p;
    }
    for (auto& [e, b] : acc) c.kinetic.push_back(b);
  }

  auto accumulate_nodes = [&](const NodeBuckets& nb,
                              const std::vector<double>& exact_e,
                              auto&& term) -> std::vector<FiberingBucket> {
    std::vector<FiberingBucket> out;
    if (cached_buckets) {
      out.resize(nb.exponent.size());
      for (std::size_t k = 0; k < nb.exponent.size(); ++k) {
        out[k].e = nb.exponent[k];
      }
      for (int i = 0; i < n; ++i) {
        const double m = term(i);
        out[nb.index[i]].coef += m;
        out[nb.index[i]].coef_weighted += m / exact_e[i];
      }
    } else {
      std::map<double, FiberingBucket> acc;
      const double eps = c.eps_bucket;
      const double lo = *std::min_element(exact_e.begin(), exact_e.end());
      for (int i = 0; i < n; ++i) {
        const double m = term(i);
        if (m == 0.0) continue;
        const double key =
            eps == 0.0
                ? exact_e[i]
                : lo + (std::floor((exact_e[i] - lo) / eps) + 0.5) * eps;
        auto& b = acc[key];
        b.e = key;
        b.coef += m;
        b.coef_weighted += m / exact_e[i];
      }
      for (auto& [e, b] : acc) out.push_back(b);
    }
    return out;
  };

  const double vol = tab.volume;
  c.concave = accumulate_nodes(tab.concave, tab.q, [&](int i) {
    return vol * (prob.lambda() * tab.a[i] * pow_abs(s.u[i], tab.q[i]) +
                  prob.mu() * tab.b[i] * pow_abs(s.v[i], tab.q[i]));
  });
  c.convex = accumulate_nodes(tab.convex, tab.r, [&](int i) {
    return vol * tab.c[i] * pow_abs(s.u[i], tab.alpha[i]) *
           pow_abs(s.v[i], tab.beta[i]);
  });

  compress(c.kinetic);
  compress(c.concave);
  compress(c.convex);

  // Exponent ordering of the standing hypotheses; a violation means the
  // instance is outside the admissible regime.
  if (!c.concave.empty() && !c.kinetic.empty() &&
      c.concave.back().e >= c.kinetic.front().e) {
    throw HypothesisError("build_fibering: concave exponents reach p-");
  }
  if (!c.convex.empty() && !c.kinetic.empty() &&
      c.kinetic.back().e >= c.convex.front().e) {
    throw HypothesisError("build_fibering: kinetic exponents reach (a+b)-");
  }
  return c;
}

double fibering_eval(const FiberingCurve& c, double t, int order) {
  if (!(t > 0.0)) throw UsageError("fibering_eval: t must be positive");
  auto term = [&](const std::vector<FiberingBucket>& bs) {
    double s = 0.0;
    switch (order) {
      case 0:
        for (const auto& b : bs) s += b.coef_weighted * std::pow(t, b.e);
        break;
      case 1:
        for (const auto& b : bs) s += b.coef * std::pow(t, b.e - 1.0);
        break;
      case 2:
        for (const auto& b : bs) {
          s += b.coef * (b.e - 1.0) * std::pow(t, b.e - 2.0);
        }
        break;
      default:
        throw UsageError("fibering_eval: order must be 0, 1 or 2");
    }
    return s;
  };
  return term(c.kinetic) - term(c.concave) - term(c.convex);
}

double fibering_eval_error_bound(const FiberingCurve& c, double t) {
  if (!(t > 0.0)) throw UsageError("fibering_eval_error_bound: t must be > 0");
  if (c.eps_bucket == 0.0) return 0.0;
  double mag = 0.0;
  for (const auto* bs : {&c.kinetic, &c.concave, &c.convex}) {
    for (const auto& b : *bs) mag += b.coef_weighted * std::pow(t, b.e);
  }
  return mag * std::expm1(0.5 * c.eps_bucket * std::abs(std::log(t)));
}

namespace {

// Magnitude scale of phi'(t): sum of the absolute term values.
double dphi_scale(const FiberingCurve& c, double t) {
  double s = 0.0;
  for (const auto& b : c.kinetic) s += b.coef * std::pow(t, b.e - 1.0);
  for (const auto& b : c.concave) s += b.coef * std::pow(t, b.e - 1.0);
  for (const auto& b : c.convex) s += b.coef * std::pow(t, b.e - 1.0);
  return s;
}

// Bracketed bisection on phi' followed by safeguarded Newton polish.
double refine_root(const FiberingCurve& c, double lo, double hi, double tol,
                   int& iters) {
  double flo = fibering_eval(c, lo, 1);
  double t = 0.5 * (lo + hi);
  for (int k = 0; k < 200; ++k) {
    ++iters;
    t = 0.5 * (lo + hi);
    const double f = fibering_eval(c, t, 1);
    if ((f > 0.0) == (flo > 0.0)) {
      lo = t;
      flo = f;
    } else {
      hi = t;
    }
    if (hi - lo <= tol * std::max(1.0, std::abs(hi))) break;
  }
  // Newton polish; bisection already resolved the bracket, Newton alone
  // could escape it, so steps outside [lo, hi] are rejected.
  for (int k = 0; k < 5; ++k) {
    const double f = fibering_eval(c, t, 1);
    const double df = fibering_eval(c, t, 2);
    if (df == 0.0) break;
    const double tn = t - f / df;
    if (!(tn > lo && tn < hi)) break;
    t = tn;
    ++iters;
  }
  return t;
}

}  // namespace

FiberingRoots find_roots(const FiberingCurve& c, double tol) {
  FiberingRoots out;
  const double B = c.total_concave();
  const double D = c.total_convex();
  const double A = c.total_kinetic();
  if (!(A > 0.0)) {
    throw UsageError("find_roots: curve has no kinetic part");
  }

  auto dphi = [&](double t) { return fibering_eval(c, t, 1); };

  // argmax of f1 - f3: unique root of its derivative, which is positive
  // for small t and negative for large t.
  auto locate_t_max = [&]() -> double {
    auto gp = [&](double t) {
      double s = 0.0;
      for (const auto& b : c.kinetic) s += b.coef * b.e * std::pow(t, b.e - 1.0);
      for (const auto& b : c.convex) s -= b.coef * b.e * std::pow(t, b.e - 1.0);
      return s;
    };
    double lo = 1.0, hi = 1.0;
    int guard = 0;
    if (gp(1.0) > 0.0) {
      while (gp(hi) > 0.0 && ++guard < 1200) hi *= 2.0;
      lo = hi / 2.0;
    } else {
      while (gp(lo) <= 0.0 && ++guard < 1200) lo /= 2.0;
      hi = lo * 2.0;
    }
    for (int k = 0; k < 120; ++k) {
      const double mid = 0.5 * (lo + hi);
      (gp(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };

  auto grow_until_negative = [&](double from) -> double {
    double b = std::max(from, 1e-30);
    int guard = 0;
    while (dphi(b) >= 0.0) {
      b *= 2.0;
      if (++guard > 60 && b > std::ldexp(1.0, 60)) {
        throw NumericalError("find_roots: phi' never turns negative");
      }
    }
    return b;
  };

  auto check_and_store = [&](double root, bool is_minus) {
    const double dd = fibering_eval(c, root, 2);
    const double resid = std::abs(dphi(root));
    const double scale = dphi_scale(c, root);
    if (!(std::isfinite(root) && std::isfinite(dd)) ||
        resid > 1e-6 * std::max(1.0, scale)) {
      std::ostringstream os;
      os << "find_roots: residual " << resid << " above tolerance at t = "
         << root;
      throw NumericalError(os.str());
    }
    if (is_minus) {
      if (dd < 0.0) {
        out.t_minus = root;
        out.phi_dd_minus = dd;
        out.resid_minus = resid;
      } else {
        out.note = "near-degenerate root: phi''(t-) sign check failed";
      }
    } else {
      if (dd > 0.0) {
        out.t_plus = root;
        out.phi_dd_plus = dd;
        out.resid_plus = resid;
      } else {
        out.note = "near-degenerate root: phi''(t+) sign check failed";
      }
    }
  };

  if (B == 0.0 && D == 0.0) {
    out.t_max_f = std::numeric_limits<double>::infinity();
    out.note = "degenerate direction: Q = 0 and R = 0, phi is increasing";
    return out;
  }

  if (B == 0.0) {
    // Q = 0: unique ray maximum t-. phi' is positive up to the argmax of
    // f1 - f3 (a float edge can put the located point just past it).
    out.t_max_f = locate_t_max();
    double lo = out.t_max_f;
    int guard = 0;
    while (dphi(lo) < 0.0 && ++guard < 1200) lo /= 2.0;
    if (guard >= 1200) {
      throw NumericalError("find_roots: lost the positive phi' region");
    }
    const double hi = grow_until_negative(lo);
    check_and_store(refine_root(c, lo, hi, tol, out.iterations), true);
    return out;
  }

  if (D == 0.0) {
    // R = 0: phi' < 0 near zero and grows without bound, single minimum.
    out.t_max_f = std::numeric_limits<double>::infinity();
    double hi = 1.0;
    int guard = 0;
    while (dphi(hi) <= 0.0 && ++guard < 1200) hi *= 2.0;
    double lo = hi / 2.0;
    while (dphi(lo) > 0.0 && ++guard < 2400) lo /= 2.0;
    check_and_store(refine_root(c, lo, hi, tol, out.iterations), false);
    out.note = "convex part vanishes: only the t+ root exists";
    return out;
  }

  // General Q > 0, R > 0 case. phi' is negative near 0 and at infinity,
  // positive exactly on (t+, t-) when the roots exist; the positive window
  // sits at or below the argmax of f1 - f3.
  out.t_max_f = locate_t_max();
  double t_mid = 0.0, best = -std::numeric_limits<double>::infinity();
  const int kScan = 512;
  const double lo_scan = out.t_max_f * 1e-10;
  const double ratio = std::pow(out.t_max_f / lo_scan, 1.0 / (kScan - 1));
  double tcur = lo_scan;
  int best_idx = -1;
  std::vector<double> ts(kScan);
  for (int k = 0; k < kScan; ++k) {
    ts[k] = tcur;
    const double v = dphi(tcur);
    if (v > best) {
      best = v;
      t_mid = tcur;
      best_idx = k;
    }
    tcur *= ratio;
  }
  // Golden-section refinement of the scan maximum.
  {
    double a = ts[std::max(0, best_idx - 1)];
    double b = ts[std::min(kScan - 1, best_idx + 1)];
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = dphi(x1), f2 = dphi(x2);
    for (int k = 0; k < 80; ++k) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = dphi(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = dphi(x1);
      }
    }
    const double xm = 0.5 * (a + b);
    if (dphi(xm) > best) {
      best = dphi(xm);
      t_mid = xm;
    }
  }

  if (!(best > 0.0)) {
    out.note = "no-root regime (lambda+mu too large for this direction)";
    return out;
  }

  // t+ in (0, t_mid): shrink the left end until phi' < 0.
  double lo = t_mid;
  int guard = 0;
  while (dphi(lo) > 0.0 && ++guard < 2400) lo /= 2.0;
  check_and_store(refine_root(c, lo, t_mid, tol, out.iterations), false);

  // t- in (t_mid, T_hi).
  const double hi = grow_until_negative(t_mid);
  check_and_store(refine_root(c, t_mid, hi, tol, out.iterations), true);

  // Zero of phi strictly between the critical points, when the energy
  // signs straddle it.
  if (out.t_plus && out.t_minus) {
    const double phi_p = fibering_eval(c, *out.t_plus, 0);
    const double phi_m = fibering_eval(c, *out.t_minus, 0);
    if (phi_p < 0.0 && phi_m > 0.0) {
      double a = *out.t_plus, b = *out.t_minus;
      for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (a + b);
        (fibering_eval(c, mid, 0) < 0.0 ? a : b) = mid;
        if (b - a <= tol * std::max(1.0, b)) break;
      }
      out.t_star = 0.5 * (a + b);
    }
  }
  return out;
}

NehariClass classify_nehari(const Problem& prob, const StatePair& s,
                            double tol) {
  bool zero = true;
  for (std::size_t i = 0; i < s.u.size() && zero; ++i) {
    zero = s.u[i] == 0.0 && s.v[i] == 0.0;
  }
  if (zero) return NehariClass::not_on_manifold;

  // Both tolerance bands are relative to the point's own term magnitudes;
  // an absolute band would swamp small-norm Nehari points entirely.
  const FiberingCurve c = build_fibering(prob, s);
  const double d1 = fibering_eval(c, 1.0, 1);
  const double scale1 =
      c.total_kinetic() + c.total_concave() + c.total_convex();
  if (std::abs(d1) > tol * scale1) {
    return NehariClass::not_on_manifold;
  }
  const double d2 = fibering_eval(c, 1.0, 2);
  double scale2 = 0.0;
  for (const auto& b : c.kinetic) scale2 += b.coef * b.e;
  for (const auto& b : c.concave) scale2 += b.coef * b.e;
  for (const auto& b : c.convex) scale2 += b.coef * b.e;
  if (std::abs(d2) <= tol * scale2) {
    return NehariClass::zero_within_tol;
  }
  return d2 > 0.0 ? NehariClass::plus : NehariClass::minus;
}

Projection project(const Problem& prob, const StatePair& s, Branch branch) {
  const FiberingCurve c = build_fibering(prob, s);
  const FiberingRoots roots = find_roots(c);
  const auto& root = branch == Branch::plus ? roots.t_plus : roots.t_minus;
  if (!root) {
    std::ostringstream os;
    os << "project: branch " << to_string(branch)
       << " unavailable for this direction";
    if (!roots.note.empty()) os << " (" << roots.note << ")";
    throw BranchUnavailableError(os.str());
  }
  Projection p;
  p.t = *root;
  p.energy = fibering_eval(c, p.t, 0);
  p.phi_dd = branch == Branch::plus ? roots.phi_dd_plus : roots.phi_dd_minus;
  p.roots = roots;
  p.point.u = s.u;
  p.point.v = s.v;
  scale(p.point.u, p.t);
  scale(p.point.v, p.t);
  return p;
}

const char* to_string(Branch b) {
  return b == Branch::plus ? "plus" : "minus";
}

const char* to_string(NehariClass c) {
  switch (c) {
    case NehariClass::plus:
      return "plus";
    case NehariClass::minus:
      return "minus";
    case NehariClass::zero_within_tol:
      return "zero-within-tol";
    default:
      return "not-on-manifold";
  }
}

}  // namespace fpxl
