#pragma once

#include <optional>
#include <utility>

#include "fpxl/problem.hpp"

namespace fpxl {

// A pair of states on the same grid, zero on the collar by construction.
struct StatePair {
  GridFunction u, v;
};

struct EnergyBreakdown {
  double P = 0.0;  // rho_{X0}(u) + rho_{X0}(v)
  double Q = 0.0;  // int (lambda a |u|^q + mu b |v|^q)
  double R = 0.0;  // int c |u|^alpha |v|^beta
  double J = 0.0;
  std::optional<double> gradient_norm;
};

double P_func(const PairKernelCache& cache, const StatePair& s);
double Q_func(const Problem& prob, const StatePair& s);
double R_func(const Problem& prob, const StatePair& s);

// The Euler functional and its P/Q/R constituents:
// J = sum_pairs (2 w / p)(|du|^p + |dv|^p)
//   - h^N sum_i (1/q_i)(lambda a_i |u_i|^q + mu b_i |v_i|^q)
//   - h^N sum_i (c_i/(alpha_i+beta_i)) |u_i|^alpha |v_i|^beta.
EnergyBreakdown energy_J(const Problem& prob, const StatePair& s);

// Exact nodal gradient of the discrete energy (differentiate the
// discretization). At u_i = u_j with p_ij < 2 the contribution is the
// limit value 0.
std::pair<GridFunction, GridFunction> grad_J(const Problem& prob,
                                             const StatePair& s);

}  // namespace fpxl
