#include "fpxl/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fpxl/errors.hpp"
#include "fpxl/math.hpp"

namespace fpxl {

ScalarField ScalarField::constant(double v) {
  ScalarField f;
  f.kind_ = FieldKind::constant;
  f.value_ = v;
  return f;
}

ScalarField ScalarField::of_point(std::function<double(const Point&)> fn) {
  ScalarField f;
  f.kind_ = FieldKind::point_fn;
  f.point_fn_ = std::move(fn);
  return f;
}

ScalarField ScalarField::of_pair(
    std::function<double(const Point&, const Point&)> fn) {
  ScalarField f;
  f.kind_ = FieldKind::pair_fn;
  f.pair_fn_ = std::move(fn);
  return f;
}

ScalarField ScalarField::tabulated(std::vector<double> node_values) {
  ScalarField f;
  f.kind_ = FieldKind::tabulated;
  f.table_ = std::move(node_values);
  return f;
}

double ScalarField::at(const Point& x) const {
  switch (kind_) {
    case FieldKind::constant:
      return value_;
    case FieldKind::point_fn:
      return point_fn_(x);
    default:
      throw UsageError("ScalarField: field is not point-evaluable");
  }
}

double ScalarField::at_pair(const Point& x, const Point& y) const {
  switch (kind_) {
    case FieldKind::constant:
      return value_;
    case FieldKind::pair_fn:
      return pair_fn_(x, y);
    default:
      throw UsageError("ScalarField: field is not pair-evaluable");
  }
}

const std::vector<double>& ScalarField::table() const {
  if (kind_ != FieldKind::tabulated) {
    throw UsageError("ScalarField: not a tabulated field");
  }
  return table_;
}

FieldBounds exponent_bounds(const ScalarField& field,
                            const std::vector<Point>& samples) {
  FieldBounds b;
  if (field.kind() == FieldKind::tabulated) {
    const auto& t = field.table();
    if (t.empty()) throw UsageError("exponent_bounds: empty tabulation");
    b.inf = *std::min_element(t.begin(), t.end());
    b.sup = *std::max_element(t.begin(), t.end());
  } else {
    if (samples.empty()) throw UsageError("exponent_bounds: empty sample set");
    b.inf = std::numeric_limits<double>::infinity();
    b.sup = -b.inf;
    for (const auto& x : samples) {
      const double v = field.at(x);
      b.inf = std::min(b.inf, v);
      b.sup = std::max(b.sup, v);
    }
  }
  field.set_cached_bounds(b.inf, b.sup);
  return b;
}

FieldBounds exponent_bounds_pair(
    const ScalarField& field,
    const std::vector<std::pair<Point, Point>>& samples) {
  if (samples.empty()) {
    throw UsageError("exponent_bounds_pair: empty sample set");
  }
  FieldBounds b;
  b.inf = std::numeric_limits<double>::infinity();
  b.sup = -b.inf;
  for (const auto& [x, y] : samples) {
    const double v = field.at_pair(x, y);
    b.inf = std::min(b.inf, v);
    b.sup = std::max(b.sup, v);
  }
  field.set_cached_bounds(b.inf, b.sup);
  return b;
}

double critical_exponent(const ScalarField& p, double s, int N,
                         const Point& x) {
  const double pbar = p.at_pair(x, x);
  if (!(s * pbar < N)) {
    std::ostringstream os;
    os << "critical_exponent: s*p(x,x) = " << s * pbar << " >= N = " << N;
    throw HypothesisError(os.str());
  }
  return N * pbar / (N - s * pbar);
}

bool AssumptionReport::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<Point> closure_samples(const Grid& grid, int oversample) {
  std::vector<Point> pts;
  for (int i = 0; i < grid.n_interior; ++i) pts.push_back(grid.nodes[i]);
  if (oversample < 1) return pts;

  const Box& box = grid.domain;
  const int n_axis =
      static_cast<int>(std::lround((box.hi[0] - box.lo[0]) / grid.h));
  const int m = n_axis * oversample;
  auto coord = [&](int k, int axis) {
    return box.lo[axis] + (box.hi[axis] - box.lo[axis]) * k / m;
  };
  if (grid.N == 1) {
    for (int k = 0; k <= m; ++k) pts.push_back(Point{coord(k, 0), 0.0});
  } else {
    for (int k = 0; k <= m; ++k) {
      for (int l = 0; l <= m; ++l) {
        pts.push_back(Point{coord(k, 0), coord(l, 1)});
      }
    }
  }
  return pts;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// Pair samples over all grid nodes (interior and collar), strided so the
// count stays bounded on fine 2D grids; always includes neighbor pairs.
std::vector<std::pair<Point, Point>> pair_samples(const Grid& grid) {
  std::vector<std::pair<Point, Point>> out;
  const std::size_t n = grid.n_total();
  std::size_t stride = 1;
  while ((n / stride) * (n / stride) / 2 > 200000) ++stride;
  for (std::size_t i = 0; i < n; i += stride) {
    for (std::size_t j = i + 1; j < n; j += stride) {
      out.emplace_back(grid.nodes[i], grid.nodes[j]);
    }
  }
  if (out.empty() && n >= 2) out.emplace_back(grid.nodes[0], grid.nodes[1]);
  return out;
}

bool bounds_of(const ScalarField& f, const std::vector<Point>& pts,
               FieldBounds& out) {
  try {
    out = exponent_bounds(f, pts);
  } catch (const std::exception&) {
    return false;
  }
  return std::isfinite(out.inf) && std::isfinite(out.sup);
}

}  // namespace

AssumptionReport check_assumptions(const ProblemData& data, const Grid& grid,
                                   int oversample) {
  AssumptionReport rep;
  rep.caveat =
      "hypothesis checks are sample-based on the discrete closure; "
      "continuity of the fields cannot be certified from samples";

  auto add = [&rep](const std::string& name, bool pass,
                    const std::string& detail) {
    rep.checks.push_back({name, pass, detail});
  };

  add("parameters-positive", data.lambda > 0.0 && data.mu > 0.0,
      "lambda = " + fmt(data.lambda) + ", mu = " + fmt(data.mu));
  add("s-in-(0,1)", data.s > 0.0 && data.s < 1.0, "s = " + fmt(data.s));

  const auto pts = closure_samples(grid, oversample);
  const auto prs = pair_samples(grid);

  FieldBounds qb, ab, bb, pb;
  const bool q_ok = bounds_of(data.q, pts, qb);
  const bool a_ok = bounds_of(data.alpha, pts, ab);
  const bool b_ok = bounds_of(data.beta, pts, bb);
  bool p_ok = true;
  try {
    pb = exponent_bounds_pair(data.p, prs);
    p_ok = std::isfinite(pb.inf) && std::isfinite(pb.sup);
  } catch (const std::exception&) {
    p_ok = false;
  }

  add("q-in-C+", q_ok && qb.inf > 1.0,
      q_ok ? "q- = " + fmt(qb.inf) + ", q+ = " + fmt(qb.sup) : "not sampleable");
  add("alpha-in-C+", a_ok && ab.inf > 1.0,
      a_ok ? "alpha- = " + fmt(ab.inf) + ", alpha+ = " + fmt(ab.sup)
           : "not sampleable");
  add("beta-in-C+", b_ok && bb.inf > 1.0,
      b_ok ? "beta- = " + fmt(bb.inf) + ", beta+ = " + fmt(bb.sup)
           : "not sampleable");
  add("p-in-C+", p_ok && pb.inf > 1.0,
      p_ok ? "p- = " + fmt(pb.inf) + ", p+ = " + fmt(pb.sup)
           : "not sampleable");

  // Pair symmetry at sampled pairs.
  {
    bool sym = true;
    double worst = 0.0;
    if (data.p.pair_capable()) {
      for (const auto& [x, y] : prs) {
        const double d = std::abs(data.p.at_pair(x, y) - data.p.at_pair(y, x));
        worst = std::max(worst, d);
        if (d != 0.0) sym = false;
      }
    } else {
      sym = false;
    }
    add("p-symmetric", sym, "max |p(x,y)-p(y,x)| = " + fmt(worst));
  }

  // sp+ < N, and the critical exponent bound over the closure.
  double pstar_inf = std::numeric_limits<double>::infinity();
  bool crit_ok = p_ok;
  if (p_ok) {
    if (!(data.s * pb.sup < data.N)) {
      crit_ok = false;
    } else if (data.p.pair_capable()) {
      for (const auto& x : pts.empty() ? std::vector<Point>{{0.5, 0.5}} : pts) {
        const double pbar = data.p.at_pair(x, x);
        if (!(data.s * pbar < data.N)) {
          crit_ok = false;
          break;
        }
        pstar_inf =
            std::min(pstar_inf, data.N * pbar / (data.N - data.s * pbar));
      }
    }
  }
  add("s*p+ < N", p_ok && data.s * pb.sup < data.N,
      p_ok ? "s*p+ = " + fmt(data.s * pb.sup) + ", N = " + fmt(data.N) : "");

  // The exponent chain.
  {
    const double ab_inf = ab.inf + bb.inf;
    const double ab_sup = ab.sup + bb.sup;
    const bool chain = q_ok && a_ok && b_ok && p_ok && crit_ok &&
                       1.0 < qb.inf && qb.sup < pb.inf && pb.sup < ab_inf &&
                       ab_sup < pstar_inf;
    add("exponent-chain 1<q-<=q+<p-<=p+<(a+b)-<=(a+b)+<p*s-", chain,
        "q+ = " + fmt(qb.sup) + ", p- = " + fmt(pb.inf) + ", p+ = " +
            fmt(pb.sup) + ", (a+b)- = " + fmt(ab_inf) + ", (a+b)+ = " +
            fmt(ab_sup) + ", p*s- = " + fmt(pstar_inf));
  }

  // Gap inequality between the exponent bounds.
  {
    bool a2 = false;
    std::string detail;
    if (q_ok && a_ok && b_ok && p_ok) {
      const double ab_inf = ab.inf + bb.inf;
      const double ab_sup = ab.sup + bb.sup;
      const double lhs = pb.inf / ab_sup;
      const double den1 = ab_sup - qb.sup;
      const double den2 = pb.sup - qb.inf;
      if (den1 > 0.0 && den2 > 0.0) {
        const double rhs = (pb.inf - qb.sup) / den1 * (ab_inf - qb.inf) / den2;
        a2 = lhs < rhs;
        detail = "lhs = " + fmt(lhs) + ", rhs = " + fmt(rhs);
      } else {
        detail = "degenerate denominator";
      }
    }
    add("exponent-gap-inequality", a2, detail);
  }

  // Weights non-negative at samples.
  for (const auto* wf : {&data.a, &data.b, &data.c}) {
    const char* names[] = {"a", "b", "c"};
    const char* nm = wf == &data.a ? names[0] : (wf == &data.b ? names[1] : names[2]);
    bool nonneg = true;
    double min_v = std::numeric_limits<double>::infinity();
    if (wf->kind() == FieldKind::tabulated) {
      for (double v : wf->table()) min_v = std::min(min_v, v);
    } else {
      for (const auto& x : pts) min_v = std::min(min_v, wf->at(x));
    }
    nonneg = min_v >= 0.0;
    add(std::string("weight-") + nm + "-nonnegative", nonneg,
        "min = " + fmt(min_v));
  }

  // Discrete modular of a and b with exponent q*(x); continuous
  // weights on a bounded domain make this automatic, so the value itself
  // is the useful output.
  {
    const double vol = grid.cell_volume();
    bool finite = q_ok && a_ok && b_ok;
    double mod_a = 0.0, mod_b = 0.0;
    if (finite) {
      for (int i = 0; i < grid.n_interior; ++i) {
        const Point& x = grid.nodes[i];
        const double qi =
            data.q.kind() == FieldKind::tabulated ? data.q.table()[i] : data.q.at(x);
        const double ri =
            (data.alpha.kind() == FieldKind::tabulated ? data.alpha.table()[i]
                                                       : data.alpha.at(x)) +
            (data.beta.kind() == FieldKind::tabulated ? data.beta.table()[i]
                                                      : data.beta.at(x));
        const double qstar = ri / (ri - qi);
        const double av =
            data.a.kind() == FieldKind::tabulated ? data.a.table()[i] : data.a.at(x);
        const double bv =
            data.b.kind() == FieldKind::tabulated ? data.b.table()[i] : data.b.at(x);
        mod_a += vol * pow_abs(av, qstar);
        mod_b += vol * pow_abs(bv, qstar);
      }
      finite = std::isfinite(mod_a) && std::isfinite(mod_b);
    }
    add("a,b-in-L^{q*}", finite,
        "modular(a) = " + fmt(mod_a) + ", modular(b) = " + fmt(mod_b));
  }

  // c essentially bounded.
  {
    double sup_c = 0.0;
    if (data.c.kind() == FieldKind::tabulated) {
      for (double v : data.c.table()) sup_c = std::max(sup_c, std::abs(v));
    } else {
      for (const auto& x : pts) sup_c = std::max(sup_c, std::abs(data.c.at(x)));
    }
    add("c-in-L^inf", std::isfinite(sup_c), "sup |c| = " + fmt(sup_c));
  }

  return rep;
}

}  // namespace fpxl
