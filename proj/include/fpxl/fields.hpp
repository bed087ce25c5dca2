#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fpxl/grid.hpp"

namespace fpxl {

enum class FieldKind { constant, point_fn, pair_fn, tabulated };

// A scalar field on the domain (or on domain pairs). Exponents and weights
// share this representation; admissibility (inf > 1 for exponents,
// non-negativity for weights) is checked by the hypothesis checker, not
// enforced here. Bounds over a sample set are cached once computed.
class ScalarField {
 public:
  ScalarField() : kind_(FieldKind::constant), value_(0.0) {}

  static ScalarField constant(double v);
  static ScalarField of_point(std::function<double(const Point&)> f);
  static ScalarField of_pair(std::function<double(const Point&, const Point&)> f);
  static ScalarField tabulated(std::vector<double> node_values);

  FieldKind kind() const { return kind_; }
  bool is_constant() const { return kind_ == FieldKind::constant; }
  bool pair_capable() const {
    return kind_ == FieldKind::constant || kind_ == FieldKind::pair_fn;
  }
  bool point_capable() const {
    return kind_ == FieldKind::constant || kind_ == FieldKind::point_fn;
  }

  double at(const Point& x) const;
  double at_pair(const Point& x, const Point& y) const;
  const std::vector<double>& table() const;

  std::optional<double> cached_inf() const { return cached_inf_; }
  std::optional<double> cached_sup() const { return cached_sup_; }
  void set_cached_bounds(double inf, double sup) const {
    cached_inf_ = inf;
    cached_sup_ = sup;
  }

 private:
  FieldKind kind_;
  double value_ = 0.0;
  std::function<double(const Point&)> point_fn_;
  std::function<double(const Point&, const Point&)> pair_fn_;
  std::vector<double> table_;
  mutable std::optional<double> cached_inf_, cached_sup_;
};

struct FieldBounds {
  double inf = 0.0;
  double sup = 0.0;
};

// Min/max of a point field over a non-empty sample set; the result is
// cached on the field. Tabulated fields are sampled over their table.
FieldBounds exponent_bounds(const ScalarField& field,
                            const std::vector<Point>& samples);

// Min/max of a pair field over a non-empty set of point pairs.
FieldBounds exponent_bounds_pair(
    const ScalarField& field,
    const std::vector<std::pair<Point, Point>>& samples);

// Critical Sobolev exponent N·p(x,x) / (N - s·p(x,x)).
double critical_exponent(const ScalarField& p, double s, int N,
                         const Point& x);

// Full problem description as supplied by the user.
struct ProblemData {
  int N = 1;
  double s = 0.5;
  Box domain;
  ScalarField p;                   // pair field, symmetric
  ScalarField q, alpha, beta;      // point exponent fields
  ScalarField a, b, c;             // non-negative weights
  double lambda = 0.0;
  double mu = 0.0;
};

struct AssumptionCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  std::string caveat;  // sampling limitation note
  bool all_pass() const;
  const AssumptionCheck* find(const std::string& name) const;
};

// Evaluates the standing hypotheses on a sample set built from the grid
// closure refined by `oversample` points per cell per axis (analytic
// fields only; tabulated fields contribute their tabulated values).
// Failures are report entries, never exceptions.
AssumptionReport check_assumptions(const ProblemData& data, const Grid& grid,
                                   int oversample = 4);

// Sample points covering the closure of the domain plus the collar.
std::vector<Point> closure_samples(const Grid& grid, int oversample);

}  // namespace fpxl
