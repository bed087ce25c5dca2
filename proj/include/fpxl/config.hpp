#pragma once

#include <string>
#include <vector>

#include "fpxl/fields.hpp"
#include "fpxl/solver.hpp"

namespace fpxl {

enum class RunMode { solve, verify, sweep, converge, fibering_dump };

// Declarative field description from the config file: a constant, a named
// built-in profile, or tabulated node values from a CSV column.
struct FieldSpec {
  enum class Kind { constant, sin_bump, bump, tabulated } kind = Kind::constant;
  double c0 = 0.0;    // constant value / profile base
  double amp = 0.0;   // profile amplitude
  double freq = 1.0;  // sin-bump frequency (in units of pi)
  double center = 0.5, width = 0.2;  // bump profile
  std::string path, column;          // tabulated

  static FieldSpec of_constant(double v) {
    FieldSpec f;
    f.kind = Kind::constant;
    f.c0 = v;
    return f;
  }

  // pair_field: evaluate profiles at the pair midpoint (keeps p symmetric).
  ScalarField build(bool pair_field, int N) const;
};

struct ParamSpec {
  bool auto_fraction = false;  // value is a fraction of delta0_hat
  double value = 0.0;
};

struct RunConfig {
  // [problem]; field defaults give the constant-exponent desk instance.
  int N = 1;
  double s = 0.4;
  Box domain;
  FieldSpec p = FieldSpec::of_constant(2.0);
  FieldSpec q = FieldSpec::of_constant(1.5);
  FieldSpec alpha = FieldSpec::of_constant(1.5);
  FieldSpec beta = FieldSpec::of_constant(1.5);
  FieldSpec a = FieldSpec::of_constant(1.0);
  FieldSpec b = FieldSpec::of_constant(1.0);
  FieldSpec c = FieldSpec::of_constant(1.0);
  ParamSpec lambda{true, 0.25};  // auto: fraction of delta0_hat
  ParamSpec mu{true, 0.25};

  // [discretization]
  int n = 64;
  double collar_width = 1.0;
  double bucket_eps = -1.0;  // auto
  int oversample = 4;

  // [solver]
  SolverOptions solver;

  // [output]
  std::string out_dir = "out";
  bool dump_pairs = false;
  bool quiet = false;

  // [run]
  RunMode mode = RunMode::solve;

  // [sweep]
  int sweep_points = 8;
  double sweep_max_factor = 2.0;
  int sweep_multistart = 2;
  int sweep_threads = 0;  // 0 = hardware concurrency

  // [converge]
  std::vector<int> converge_levels{16, 32, 64, 128};

  // [fibering]
  FieldSpec direction_u, direction_v;
  double t_min = 1e-3, t_max = 4.0;
  int t_points = 200;
};

RunConfig parse_config(const std::string& path);
// Parses config text directly (unit-test entry point); `name` labels
// error messages.
RunConfig parse_config_text(const std::string& text, const std::string& name);

const char* to_string(RunMode m);
RunMode parse_mode(const std::string& s);

}  // namespace fpxl
