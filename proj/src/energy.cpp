#include "fpxl/energy.hpp"

#include "fpxl/math.hpp"

namespace fpxl {

double P_func(const PairKernelCache& cache, const StatePair& s) {
  return modular_rho_x0(cache, s.u) + modular_rho_x0(cache, s.v);
}

double Q_func(const Problem& prob, const StatePair& s) {
  const auto& t = *prob.tab;
  double sum = 0.0;
  for (int i = 0; i < prob.n_interior(); ++i) {
    sum += prob.lambda() * t.a[i] * pow_abs(s.u[i], t.q[i]) +
           prob.mu() * t.b[i] * pow_abs(s.v[i], t.q[i]);
  }
  return t.volume * sum;
}

double R_func(const Problem& prob, const StatePair& s) {
  const auto& t = *prob.tab;
  double sum = 0.0;
  for (int i = 0; i < prob.n_interior(); ++i) {
    if (t.c[i] == 0.0) continue;
    sum += t.c[i] * pow_abs(s.u[i], t.alpha[i]) * pow_abs(s.v[i], t.beta[i]);
  }
  return t.volume * sum;
}

EnergyBreakdown energy_J(const Problem& prob, const StatePair& s) {
  const auto& cache = *prob.cache;
  const auto& t = *prob.tab;
  const int n = prob.n_interior();

  EnergyBreakdown e;
  double kin_w = 0.0;  // 1/p-weighted kinetic sum
  for (const auto& pe : cache.pairs) {
    const double du = s.u[pe.i] - (pe.j < n ? s.u[pe.j] : 0.0);
    const double dv = s.v[pe.i] - (pe.j < n ? s.v[pe.j] : 0.0);
    const double m = pow_abs(du, pe.p) + pow_abs(dv, pe.p);
    e.P += 2.0 * pe.w * m;
    kin_w += 2.0 * pe.w / pe.p * m;
  }

  double q_w = 0.0, r_w = 0.0;
  for (int i = 0; i < n; ++i) {
    const double qi_term = prob.lambda() * t.a[i] * pow_abs(s.u[i], t.q[i]) +
                           prob.mu() * t.b[i] * pow_abs(s.v[i], t.q[i]);
    e.Q += qi_term;
    q_w += qi_term / t.q[i];
    if (t.c[i] != 0.0) {
      const double ri_term =
          t.c[i] * pow_abs(s.u[i], t.alpha[i]) * pow_abs(s.v[i], t.beta[i]);
      e.R += ri_term;
      r_w += ri_term / t.r[i];
    }
  }
  e.Q *= t.volume;
  e.R *= t.volume;
  e.J = kin_w - t.volume * (q_w + r_w);
  return e;
}

std::pair<GridFunction, GridFunction> grad_J(const Problem& prob,
                                             const StatePair& s) {
  const auto& cache = *prob.cache;
  const auto& t = *prob.tab;
  const int n = prob.n_interior();

  GridFunction gu(n, 0.0), gv(n, 0.0);
  for (const auto& pe : cache.pairs) {
    const double du = s.u[pe.i] - (pe.j < n ? s.u[pe.j] : 0.0);
    const double dv = s.v[pe.i] - (pe.j < n ? s.v[pe.j] : 0.0);
    const double ku = 2.0 * pe.w * pow_signed(du, pe.p - 1.0);
    const double kv = 2.0 * pe.w * pow_signed(dv, pe.p - 1.0);
    gu[pe.i] += ku;
    gv[pe.i] += kv;
    if (pe.j < n) {
      gu[pe.j] -= ku;
      gv[pe.j] -= kv;
    }
  }
  for (int i = 0; i < n; ++i) {
    const double au = pow_abs(s.u[i], t.alpha[i]);
    const double bv = pow_abs(s.v[i], t.beta[i]);
    gu[i] -= t.volume *
             (prob.lambda() * t.a[i] * pow_signed(s.u[i], t.q[i] - 1.0) +
              t.c[i] * (t.alpha[i] / t.r[i]) *
                  pow_signed(s.u[i], t.alpha[i] - 1.0) * bv);
    gv[i] -= t.volume *
             (prob.mu() * t.b[i] * pow_signed(s.v[i], t.q[i] - 1.0) +
              t.c[i] * (t.beta[i] / t.r[i]) *
                  pow_signed(s.v[i], t.beta[i] - 1.0) * au);
  }
  return {std::move(gu), std::move(gv)};
}

}  // namespace fpxl
