#include "fpxl/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fpxl/errors.hpp"

namespace fpxl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

struct LineError {
  std::string name;
  int line;
  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << name << ":" << line << ": " << msg;
    throw UsageError(os.str());
  }
};

double to_double(const std::string& s, const LineError& ctx) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) ctx.fail("invalid number '" + s + "'");
    return v;
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception&) {
    ctx.fail("invalid number '" + s + "'");
  }
}

int to_int(const std::string& s, const LineError& ctx) {
  const double v = to_double(s, ctx);
  if (v != std::floor(v)) ctx.fail("expected an integer, got '" + s + "'");
  return static_cast<int>(v);
}

bool to_bool(const std::string& s, const LineError& ctx) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  ctx.fail("expected a boolean, got '" + s + "'");
}

FieldSpec parse_field(const std::vector<std::string>& tk,
                      const LineError& ctx) {
  FieldSpec f;
  if (tk.empty()) ctx.fail("empty field specification");
  if (tk[0] == "constant") {
    if (tk.size() != 2) ctx.fail("usage: constant VALUE");
    f.kind = FieldSpec::Kind::constant;
    f.c0 = to_double(tk[1], ctx);
  } else if (tk[0] == "sin-bump") {
    if (tk.size() != 4) ctx.fail("usage: sin-bump BASE AMPLITUDE FREQUENCY");
    f.kind = FieldSpec::Kind::sin_bump;
    f.c0 = to_double(tk[1], ctx);
    f.amp = to_double(tk[2], ctx);
    f.freq = to_double(tk[3], ctx);
  } else if (tk[0] == "bump") {
    if (tk.size() != 3) ctx.fail("usage: bump CENTER WIDTH");
    f.kind = FieldSpec::Kind::bump;
    f.center = to_double(tk[1], ctx);
    f.width = to_double(tk[2], ctx);
    if (!(f.width > 0.0)) ctx.fail("bump width must be positive");
  } else if (tk[0] == "tabulated") {
    if (tk.size() != 3) ctx.fail("usage: tabulated CSV_PATH COLUMN");
    f.kind = FieldSpec::Kind::tabulated;
    f.path = tk[1];
    f.column = tk[2];
  } else {
    ctx.fail("unknown field kind '" + tk[0] + "'");
  }
  return f;
}

ParamSpec parse_param(const std::vector<std::string>& tk,
                      const LineError& ctx) {
  ParamSpec p;
  if (tk.size() == 2 && tk[0] == "auto") {
    p.auto_fraction = true;
    p.value = to_double(tk[1], ctx);
    if (!(p.value > 0.0)) {
      throw HypothesisError("parameters must be positive (auto fraction <= 0)");
    }
  } else if (tk.size() == 1) {
    p.value = to_double(tk[0], ctx);
    if (!(p.value > 0.0)) {
      throw HypothesisError(
          "parameters lambda, mu must be positive (got " + tk[0] + ")");
    }
  } else {
    ctx.fail("usage: VALUE or 'auto FRACTION'");
  }
  return p;
}

std::vector<double> load_csv_column(const std::string& path,
                                    const std::string& column) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open tabulation file '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) {
    throw UsageError("empty tabulation file '" + path + "'");
  }
  int col = -1, idx = 0;
  std::istringstream hs(header);
  std::string cell;
  while (std::getline(hs, cell, ',')) {
    if (trim(cell) == column) col = idx;
    ++idx;
  }
  if (col < 0) {
    throw UsageError("column '" + column + "' not found in '" + path + "'");
  }
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    int k = 0;
    std::string v;
    while (std::getline(ls, v, ',')) {
      if (k == col) {
        try {
          out.push_back(std::stod(v));
        } catch (const std::exception&) {
          throw UsageError("bad value '" + v + "' in '" + path + "'");
        }
      }
      ++k;
    }
  }
  return out;
}

}  // namespace

ScalarField FieldSpec::build(bool pair_field, int N) const {
  auto lift = [pair_field](std::function<double(const Point&)> eval) {
    if (pair_field) {
      return ScalarField::of_pair(
          [eval](const Point& x, const Point& y) {
            return eval(Point{0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])});
          });
    }
    return ScalarField::of_point(eval);
  };
  switch (kind) {
    case Kind::constant:
      return ScalarField::constant(c0);
    case Kind::sin_bump: {
      const double base = c0, amplitude = amp, frequency = freq;
      return lift([base, amplitude, frequency, N](const Point& x) {
        double sum = 0.0;
        for (int k = 0; k < N; ++k) sum += x[k];
        return base + amplitude * std::sin(frequency * M_PI * sum);
      });
    }
    case Kind::bump: {
      const double ctr = center, w = width;
      return lift([ctr, w, N](const Point& x) {
        double e = 0.0;
        for (int k = 0; k < N; ++k) {
          const double z = (x[k] - ctr) / w;
          e += z * z;
        }
        return std::exp(-e);
      });
    }
    case Kind::tabulated:
      if (pair_field) {
        throw UsageError("tabulated fields are not supported for p(x,y)");
      }
      return ScalarField::tabulated(load_csv_column(path, column));
  }
  throw UsageError("unreachable field kind");
}

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::solve:
      return "solve";
    case RunMode::verify:
      return "verify";
    case RunMode::sweep:
      return "sweep";
    case RunMode::converge:
      return "converge";
    default:
      return "fibering-dump";
  }
}

RunMode parse_mode(const std::string& s) {
  if (s == "solve") return RunMode::solve;
  if (s == "verify") return RunMode::verify;
  if (s == "sweep") return RunMode::sweep;
  if (s == "converge") return RunMode::converge;
  if (s == "fibering-dump") return RunMode::fibering_dump;
  throw UsageError("unknown mode '" + s + "'");
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

RunConfig parse_config_text(const std::string& text, const std::string& name) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  bool domain_set = false;

  while (std::getline(in, raw)) {
    ++lineno;
    LineError ctx{name, lineno};
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') ctx.fail("malformed section header");
      section = line.substr(1, line.size() - 2);
      const bool known =
          section == "problem" || section == "discretization" ||
          section == "solver" || section == "output" || section == "run" ||
          section == "sweep" || section == "converge" || section == "fibering";
      if (!known) ctx.fail("unknown section '" + section + "'");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) ctx.fail("expected KEY = VALUE");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) ctx.fail("missing key");
    if (value.empty()) ctx.fail("missing value for key '" + key + "'");
    const auto tk = tokens(value);

    if (section == "problem") {
      if (key == "N") {
        cfg.N = to_int(value, ctx);
        if (cfg.N != 1 && cfg.N != 2) ctx.fail("N must be 1 or 2");
      } else if (key == "s") {
        cfg.s = to_double(value, ctx);
        if (!(cfg.s > 0.0 && cfg.s < 1.0)) {
          throw HypothesisError("s must lie in (0,1)");
        }
      } else if (key == "domain") {
        if (tk.size() == 2) {
          cfg.domain.N = 1;
          cfg.domain.lo[0] = to_double(tk[0], ctx);
          cfg.domain.hi[0] = to_double(tk[1], ctx);
        } else if (tk.size() == 4) {
          cfg.domain.N = 2;
          cfg.domain.lo[0] = to_double(tk[0], ctx);
          cfg.domain.hi[0] = to_double(tk[1], ctx);
          cfg.domain.lo[1] = to_double(tk[2], ctx);
          cfg.domain.hi[1] = to_double(tk[3], ctx);
        } else {
          ctx.fail("domain needs 2 (1D) or 4 (2D) numbers");
        }
        domain_set = true;
      } else if (key == "p") {
        cfg.p = parse_field(tk, ctx);
      } else if (key == "q") {
        cfg.q = parse_field(tk, ctx);
      } else if (key == "alpha") {
        cfg.alpha = parse_field(tk, ctx);
      } else if (key == "beta") {
        cfg.beta = parse_field(tk, ctx);
      } else if (key == "a") {
        cfg.a = parse_field(tk, ctx);
      } else if (key == "b") {
        cfg.b = parse_field(tk, ctx);
      } else if (key == "c") {
        cfg.c = parse_field(tk, ctx);
      } else if (key == "lambda") {
        cfg.lambda = parse_param(tk, ctx);
      } else if (key == "mu") {
        cfg.mu = parse_param(tk, ctx);
      } else {
        ctx.fail("unknown key '" + key + "' in [problem]");
      }
    } else if (section == "discretization") {
      if (key == "n") {
        cfg.n = to_int(value, ctx);
      } else if (key == "collar_width") {
        cfg.collar_width = to_double(value, ctx);
      } else if (key == "bucket_eps") {
        cfg.bucket_eps = value == "auto" ? -1.0 : to_double(value, ctx);
      } else if (key == "oversample") {
        cfg.oversample = to_int(value, ctx);
      } else {
        ctx.fail("unknown key '" + key + "' in [discretization]");
      }
    } else if (section == "solver") {
      if (key == "tol_grad") {
        cfg.solver.tol_grad = to_double(value, ctx);
        if (!(cfg.solver.tol_grad > 0.0)) ctx.fail("tol_grad must be > 0");
      } else if (key == "max_iters") {
        cfg.solver.max_iters = to_int(value, ctx);
      } else if (key == "multistart") {
        cfg.solver.multistart = to_int(value, ctx);
      } else if (key == "seed") {
        cfg.solver.seed = static_cast<std::uint64_t>(to_double(value, ctx));
      } else if (key == "embed_trials") {
        cfg.solver.embed_trials = to_int(value, ctx);
      } else if (key == "verify_samples") {
        cfg.solver.verify_samples = to_int(value, ctx);
      } else {
        ctx.fail("unknown key '" + key + "' in [solver]");
      }
    } else if (section == "output") {
      if (key == "dir") {
        cfg.out_dir = value;
      } else if (key == "dump_pairs") {
        cfg.dump_pairs = to_bool(value, ctx);
      } else if (key == "quiet") {
        cfg.quiet = to_bool(value, ctx);
      } else {
        ctx.fail("unknown key '" + key + "' in [output]");
      }
    } else if (section == "run") {
      if (key == "mode") {
        cfg.mode = parse_mode(value);
      } else {
        ctx.fail("unknown key '" + key + "' in [run]");
      }
    } else if (section == "sweep") {
      if (key == "grid_points") {
        cfg.sweep_points = to_int(value, ctx);
        if (cfg.sweep_points < 1) ctx.fail("grid_points must be >= 1");
      } else if (key == "max_sum_factor") {
        cfg.sweep_max_factor = to_double(value, ctx);
      } else if (key == "multistart") {
        cfg.sweep_multistart = to_int(value, ctx);
      } else if (key == "threads") {
        cfg.sweep_threads = to_int(value, ctx);
      } else {
        ctx.fail("unknown key '" + key + "' in [sweep]");
      }
    } else if (section == "converge") {
      if (key == "levels") {
        cfg.converge_levels.clear();
        for (const auto& t : tk) cfg.converge_levels.push_back(to_int(t, ctx));
        if (cfg.converge_levels.empty()) ctx.fail("levels must be non-empty");
      } else {
        ctx.fail("unknown key '" + key + "' in [converge]");
      }
    } else if (section == "fibering") {
      if (key == "direction_u") {
        cfg.direction_u = parse_field(tk, ctx);
      } else if (key == "direction_v") {
        cfg.direction_v = parse_field(tk, ctx);
      } else if (key == "t_min") {
        cfg.t_min = to_double(value, ctx);
      } else if (key == "t_max") {
        cfg.t_max = to_double(value, ctx);
      } else if (key == "points") {
        cfg.t_points = to_int(value, ctx);
      } else {
        ctx.fail("unknown key '" + key + "' in [fibering]");
      }
    } else {
      ctx.fail("key '" + key + "' outside any section");
    }
  }

  if (domain_set && cfg.domain.N != cfg.N) {
    throw UsageError(name + ": domain dimension does not match N");
  }
  if (!domain_set) {
    cfg.domain.N = cfg.N;
    cfg.domain.lo = {0.0, 0.0};
    cfg.domain.hi = {1.0, 1.0};
  }
  if (!(cfg.t_max > cfg.t_min && cfg.t_min > 0.0)) {
    throw UsageError(name + ": fibering t range must satisfy 0 < t_min < t_max");
  }
  return cfg;
}

}  // namespace fpxl
