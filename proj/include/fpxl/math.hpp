#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace fpxl {

// |x|^e with a guarded underflow cutoff; exponents in this project are
// always positive, so |0|^e = 0.
inline double pow_abs(double x, double e) {
  const double ax = std::abs(x);
  if (ax < 1e-300) return 0.0;
  return std::pow(ax, e);
}

// sign(x)·|x|^e, i.e. |x|^{e-1}·x for e-1 the stored exponent. Used for
// terms of the form |x|^{p-2}x with the convention |0|^{p-2}·0 = 0.
inline double pow_signed(double x, double e) {
  const double ax = std::abs(x);
  if (ax < 1e-300) return 0.0;
  return std::copysign(std::pow(ax, e), x);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const std::vector<double>& a) {
  return std::sqrt(dot(a, a));
}

inline double norm_inf(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// y += alpha * x
inline void axpy(double alpha, const std::vector<double>& x,
                 std::vector<double>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(std::vector<double>& x, double alpha) {
  for (double& v : x) v *= alpha;
}

}  // namespace fpxl
