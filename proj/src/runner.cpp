#include "fpxl/runner.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpxl/errors.hpp"

namespace fpxl {

using json = nlohmann::ordered_json;

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

struct Instance {
  Problem prob;
  AssumptionReport assumptions;
  EmbeddingEstimate embedding;
  ThresholdSet thresholds;  // K_lower evaluated at the resolved lambda, mu
  bool hypotheses_ok = false;
};

ProblemData build_data(const RunConfig& cfg) {
  ProblemData d;
  d.N = cfg.N;
  d.s = cfg.s;
  d.domain = cfg.domain;
  d.p = cfg.p.build(/*pair_field=*/true, cfg.N);
  d.q = cfg.q.build(false, cfg.N);
  d.alpha = cfg.alpha.build(false, cfg.N);
  d.beta = cfg.beta.build(false, cfg.N);
  d.a = cfg.a.build(false, cfg.N);
  d.b = cfg.b.build(false, cfg.N);
  d.c = cfg.c.build(false, cfg.N);
  // Placeholder parameters; resolved after the thresholds are known.
  d.lambda = cfg.lambda.auto_fraction ? 1.0 : cfg.lambda.value;
  d.mu = cfg.mu.auto_fraction ? 1.0 : cfg.mu.value;
  return d;
}

// Builds the problem at a given resolution, checks hypotheses, estimates
// the embedding constant and resolves auto parameters against delta0_hat.
Instance make_instance(const RunConfig& cfg, int n_per_axis,
                       bool enforce_assumptions) {
  Instance inst;
  DiscretizationOptions disc;
  disc.n_per_axis = n_per_axis;
  disc.collar_width = cfg.collar_width;
  disc.bucket_eps = cfg.bucket_eps;
  disc.oversample = cfg.oversample;

  const ProblemData data = build_data(cfg);
  inst.prob = make_problem(data, disc);
  inst.assumptions =
      check_assumptions(data, *inst.prob.grid, cfg.oversample);
  inst.hypotheses_ok = inst.assumptions.all_pass();
  if (!inst.hypotheses_ok) {
    if (!enforce_assumptions) return inst;  // caller reports and bails
    std::string failed;
    for (const auto& c : inst.assumptions.checks) {
      if (!c.pass) failed += (failed.empty() ? "" : ", ") + c.name;
    }
    throw HypothesisError("hypothesis checks failed: " + failed);
  }

  inst.embedding = estimate_embedding_constant(
      *inst.prob.grid, *inst.prob.cache, inst.prob.tab->r,
      inst.prob.tab->pstar, cfg.solver.embed_trials, cfg.solver.seed,
      cfg.solver.embed_ascent_steps);
  ThresholdSet th = compute_constants(inst.prob, inst.embedding);

  const double lambda = cfg.lambda.auto_fraction
                            ? cfg.lambda.value * th.delta0
                            : cfg.lambda.value;
  const double mu =
      cfg.mu.auto_fraction ? cfg.mu.value * th.delta0 : cfg.mu.value;
  inst.prob = inst.prob.with_parameters(lambda, mu);
  inst.thresholds = compute_constants(inst.prob, inst.embedding);
  // Re-check with the resolved parameters so the report shows them.
  inst.assumptions =
      check_assumptions(inst.prob.data, *inst.prob.grid, cfg.oversample);
  return inst;
}

void ensure_outdir(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
}

std::ofstream open_out(const RunConfig& cfg, const std::string& file) {
  const auto path = std::filesystem::path(cfg.out_dir) / file;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot open output file " + path.string());
  return os;
}

json json_thresholds(const ThresholdSet& th) {
  return json{{"C1", th.C1},
              {"C2", th.C2},
              {"delta_hat", th.delta},
              {"delta0_hat", th.delta0},
              {"K_lower", th.K_lower},
              {"estimated", th.estimated},
              {"embedding_C_hat", th.C_hat},
              {"a_norm_qstar", th.a_norm_qstar},
              {"b_norm_qstar", th.b_norm_qstar},
              {"c_sup", th.c_sup}};
}

json json_embedding(const EmbeddingEstimate& emb) {
  return json{{"C_hat", emb.C_hat},
              {"trials", emb.trials},
              {"best_trial", emb.best_trial}};
}

json json_assumptions(const AssumptionReport& rep) {
  json arr = json::array();
  for (const auto& c : rep.checks) {
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  return json{{"all_pass", rep.all_pass()},
              {"checks", arr},
              {"caveat", rep.caveat}};
}

json json_lemmas(const LemmaReport& rep) {
  json arr = json::array();
  for (const auto& c : rep.checks) {
    json e{{"name", c.name},
           {"tested", c.tested},
           {"violations", c.violations},
           {"pass", c.pass()}};
    if (c.tested > 0) e["worst_slack"] = c.worst_slack;
    if (!c.note.empty()) e["note"] = c.note;
    arr.push_back(e);
  }
  return json{{"all_pass", rep.all_pass()}, {"checks", arr}};
}

json json_grid(const Problem& prob) {
  const auto& g = *prob.grid;
  return json{{"N", g.N},
              {"h", g.h},
              {"interior_nodes", g.n_interior},
              {"collar_nodes", g.n_collar()},
              {"pairs", prob.cache->pairs.size()},
              {"collar_width", g.collar_width},
              {"bucket_eps", prob.bucket_eps},
              {"kinetic_buckets", prob.cache->bucket_count()}};
}

json json_branch(const Problem& prob, const BranchResult& br) {
  if (!br.solved) {
    return json{{"solved", false}, {"failure", br.failure}};
  }
  const auto& pt = br.point;
  // Certified bound on the modular mass lost to the collar truncation.
  const double tail =
      collar_tail_bound(*prob.grid, *prob.cache, pt.pair.u) +
      collar_tail_bound(*prob.grid, *prob.cache, pt.pair.v);
  return json{{"solved", true},
              {"J", pt.J},
              {"P", pt.P},
              {"Q", pt.Q},
              {"R", pt.R},
              {"grad_residual", pt.grad_residual},
              {"grad_scale", pt.grad_scale},
              {"phi_dd_at_1", pt.phi_dd1},
              {"iterations", pt.iterations},
              {"converged", pt.converged},
              {"norm_u", br.norm_u},
              {"norm_v", br.norm_v},
              {"min_nodal", br.min_nodal},
              {"collar_tail_bound", tail},
              {"classification", to_string(br.classification)},
              {"starts_used", br.starts_used},
              {"energy_history", pt.history}};
}

void write_solution_csv(const RunConfig& cfg, const std::string& file,
                        const Problem& prob, const StatePair& s) {
  auto os = open_out(cfg, file);
  const auto& g = *prob.grid;
  os << (g.N == 1 ? "x,u,v\n" : "x,y,u,v\n");
  for (int i = 0; i < g.n_interior; ++i) {
    os << format_g17(g.nodes[i][0]) << ',';
    if (g.N == 2) os << format_g17(g.nodes[i][1]) << ',';
    os << format_g17(s.u[i]) << ',' << format_g17(s.v[i]) << '\n';
  }
}

void maybe_dump_pairs(const RunConfig& cfg, const Problem& prob) {
  if (!cfg.dump_pairs) return;
  auto os = open_out(cfg, "pairs.csv");
  dump_pairs_csv(os, *prob.cache);
}

void print_assumptions(const RunConfig& cfg, const AssumptionReport& rep) {
  if (cfg.quiet) return;
  for (const auto& c : rep.checks) {
    std::cout << "  [" << (c.pass ? "ok" : "FAIL") << "] " << c.name;
    if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
    std::cout << "\n";
  }
}

void run_solve(const RunConfig& cfg) {
  Instance inst = make_instance(cfg, cfg.n, /*enforce=*/true);
  if (!cfg.quiet) {
    std::cout << "instance: n = " << cfg.n << ", lambda = "
              << format_g17(inst.prob.lambda()) << ", mu = "
              << format_g17(inst.prob.mu()) << ", delta0_hat = "
              << format_g17(inst.thresholds.delta0) << "\n";
    print_assumptions(cfg, inst.assumptions);
  }
  if (inst.prob.lambda() + inst.prob.mu() >= inst.thresholds.delta0 &&
      !cfg.quiet) {
    std::cout << "warning: lambda+mu >= delta0_hat; two-branch existence is "
                 "not guaranteed, proceeding best-effort\n";
  }

  const SolveReport rep = solve_two_solutions(inst.prob, cfg.solver);

  ensure_outdir(cfg);
  maybe_dump_pairs(cfg, inst.prob);
  if (rep.plus.solved) {
    write_solution_csv(cfg, "solution_plus.csv", inst.prob,
                       rep.plus.point.pair);
  }
  if (rep.minus.solved) {
    write_solution_csv(cfg, "solution_minus.csv", inst.prob,
                       rep.minus.point.pair);
  }

  json j{{"mode", "solve"},
         {"lambda", inst.prob.lambda()},
         {"mu", inst.prob.mu()},
         {"grid", json_grid(inst.prob)},
         {"assumptions", json_assumptions(inst.assumptions)},
         {"thresholds", json_thresholds(rep.thresholds)},
         {"embedding", json_embedding(inst.embedding)},
         {"threshold_ok", rep.threshold_ok},
         {"plus", json_branch(inst.prob, rep.plus)},
         {"minus", json_branch(inst.prob, rep.minus)},
         {"theta_plus", rep.theta_plus},
         {"theta_minus", rep.theta_minus},
         {"theta_order_ok", rep.theta_order_ok},
         {"distinct", rep.distinct},
         {"l2_distance", rep.l2_distance},
         {"semi_trivial_J_u", rep.semi_trivial_J_u},
         {"semi_trivial_J_v", rep.semi_trivial_J_v},
         {"lemmas", json_lemmas(rep.lemma)}};
  open_out(cfg, "solve_report.json") << j.dump(2) << '\n';

  if (!cfg.quiet) {
    std::cout << "theta+ = " << format_g17(rep.theta_plus)
              << "  theta- = " << format_g17(rep.theta_minus)
              << "  distinct = " << (rep.distinct ? "yes" : "no") << "\n";
  }
  if (!rep.plus.solved || !rep.minus.solved) {
    throw NumericalError("solve: a branch failed: " +
                         (rep.plus.solved ? rep.minus.failure
                                          : rep.plus.failure));
  }
}

void run_verify(const RunConfig& cfg) {
  Instance inst = make_instance(cfg, cfg.n, /*enforce=*/false);
  ensure_outdir(cfg);

  json j{{"mode", "verify"},
         {"lambda", inst.prob.lambda()},
         {"mu", inst.prob.mu()},
         {"grid", json_grid(inst.prob)},
         {"assumptions", json_assumptions(inst.assumptions)}};

  if (!inst.hypotheses_ok) {
    // Report what failed; thresholds and lemmas are meaningless here.
    open_out(cfg, "verify_report.json") << j.dump(2) << '\n';
    print_assumptions(cfg, inst.assumptions);
    throw HypothesisError("verify: hypothesis checks failed (see report)");
  }

  const LemmaReport lem = verify_lemma_suite(
      inst.prob, inst.thresholds, cfg.solver.verify_samples, cfg.solver.seed);
  maybe_dump_pairs(cfg, inst.prob);
  j["thresholds"] = json_thresholds(inst.thresholds);
  j["embedding"] = json_embedding(inst.embedding);
  j["lemmas"] = json_lemmas(lem);
  open_out(cfg, "verify_report.json") << j.dump(2) << '\n';

  if (!cfg.quiet) {
    print_assumptions(cfg, inst.assumptions);
    for (const auto& c : lem.checks) {
      std::cout << "  [" << (c.pass() ? "ok" : "FAIL") << "] " << c.name
                << "  tested=" << c.tested << " violations=" << c.violations;
      if (!c.note.empty()) std::cout << "  (" << c.note << ")";
      std::cout << "\n";
    }
  }
  if (!lem.all_pass()) {
    throw NumericalError("verify: lemma checks failed (see report)");
  }
}

void run_sweep(const RunConfig& cfg) {
  Instance inst = make_instance(cfg, cfg.n, /*enforce=*/true);
  const int G = cfg.sweep_points;
  const double step = cfg.sweep_max_factor * inst.thresholds.delta / (2.0 * G);

  struct Cell {
    double lambda, mu;
    double theta_plus, theta_minus;
    std::string roots;
  };
  std::vector<Cell> cells(static_cast<std::size_t>(G) * G);

  SolverOptions cell_opts = cfg.solver;
  cell_opts.multistart = cfg.sweep_multistart;
  cell_opts.verify_samples = 0;

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= G * G) break;
      const int i = k / G, j = k % G;
      Cell& cell = cells[k];
      cell.lambda = (i + 1) * step;
      cell.mu = (j + 1) * step;
      const Problem local = inst.prob.with_parameters(cell.lambda, cell.mu);
      try {
        SolveReport r =
            solve_two_solutions(local, cell_opts, &inst.embedding);
        cell.theta_plus = r.theta_plus;
        cell.theta_minus = r.theta_minus;
        if (r.plus.solved && r.minus.solved) {
          cell.roots = "both";
        } else if (r.minus.solved) {
          cell.roots = "minus-only";
        } else if (r.plus.solved) {
          cell.roots = "plus-only";
        } else {
          cell.roots = "none";
        }
      } catch (const std::exception&) {
        cell.theta_plus = cell.theta_minus =
            std::numeric_limits<double>::quiet_NaN();
        cell.roots = "error";
      }
    }
  };

  int n_threads = cfg.sweep_threads > 0
                      ? cfg.sweep_threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, G * G));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ensure_outdir(cfg);
  auto os = open_out(cfg, "sweep.csv");
  os << "lambda,mu,theta_plus,theta_minus,roots_found,delta_hat\n";
  for (const auto& c : cells) {
    os << format_g17(c.lambda) << ',' << format_g17(c.mu) << ','
       << format_g17(c.theta_plus) << ',' << format_g17(c.theta_minus) << ','
       << c.roots << ',' << format_g17(inst.thresholds.delta) << '\n';
  }
  if (!cfg.quiet) {
    std::cout << "sweep: " << G * G << " cells, delta_hat = "
              << format_g17(inst.thresholds.delta) << "\n";
  }
}

void run_converge(const RunConfig& cfg) {
  // Resolve lambda, mu once at the reference resolution, then keep them
  // fixed across refinement levels.
  Instance ref = make_instance(cfg, cfg.n, /*enforce=*/true);
  const double lambda = ref.prob.lambda();
  const double mu = ref.prob.mu();

  ensure_outdir(cfg);
  auto os = open_out(cfg, "converge.csv");
  os << "n,h,theta_plus,theta_minus\n";
  for (int level : cfg.converge_levels) {
    RunConfig level_cfg = cfg;
    level_cfg.lambda = ParamSpec{false, lambda};
    level_cfg.mu = ParamSpec{false, mu};
    Instance inst = make_instance(level_cfg, level, /*enforce=*/true);
    SolverOptions opts = cfg.solver;
    opts.verify_samples = 0;
    const SolveReport r = solve_two_solutions(inst.prob, opts);
    os << level << ',' << format_g17(inst.prob.grid->h) << ','
       << format_g17(r.theta_plus) << ',' << format_g17(r.theta_minus)
       << '\n';
    if (!cfg.quiet) {
      std::cout << "n = " << level << ": theta+ = " << format_g17(r.theta_plus)
                << ", theta- = " << format_g17(r.theta_minus) << "\n";
    }
  }
}

void run_fibering_dump(const RunConfig& cfg) {
  Instance inst = make_instance(cfg, cfg.n, /*enforce=*/true);
  const Grid& grid = *inst.prob.grid;

  StatePair dir;
  const ScalarField fu = cfg.direction_u.build(false, cfg.N);
  const ScalarField fv = cfg.direction_v.build(false, cfg.N);
  dir.u.resize(grid.n_interior);
  dir.v.resize(grid.n_interior);
  for (int i = 0; i < grid.n_interior; ++i) {
    dir.u[i] = fu.kind() == FieldKind::tabulated ? fu.table()[i]
                                                 : fu.at(grid.nodes[i]);
    dir.v[i] = fv.kind() == FieldKind::tabulated ? fv.table()[i]
                                                 : fv.at(grid.nodes[i]);
  }

  const FiberingCurve curve = build_fibering(inst.prob, dir);
  const FiberingRoots roots = find_roots(curve);

  ensure_outdir(cfg);
  auto os = open_out(cfg, "fibering.csv");
  os << "t,phi,dphi,ddphi\n";
  const double ratio = std::pow(cfg.t_max / cfg.t_min,
                                1.0 / std::max(1, cfg.t_points - 1));
  double t = cfg.t_min;
  for (int k = 0; k < cfg.t_points; ++k) {
    os << format_g17(t) << ',' << format_g17(fibering_eval(curve, t, 0)) << ','
       << format_g17(fibering_eval(curve, t, 1)) << ','
       << format_g17(fibering_eval(curve, t, 2)) << '\n';
    t *= ratio;
  }
  if (!cfg.quiet) {
    std::cout << "fibering roots:";
    if (roots.t_plus) std::cout << " t+ = " << format_g17(*roots.t_plus);
    if (roots.t_minus) std::cout << " t- = " << format_g17(*roots.t_minus);
    if (!roots.note.empty()) std::cout << "  note: " << roots.note;
    if (curve.eps_bucket > 0.0) {
      std::cout << "  bucket eval error bound at t_max = "
                << format_g17(fibering_eval_error_bound(curve, cfg.t_max));
    }
    std::cout << "\n";
  }
}

}  // namespace

void run(const RunConfig& cfg) {
  switch (cfg.mode) {
    case RunMode::solve:
      run_solve(cfg);
      break;
    case RunMode::verify:
      run_verify(cfg);
      break;
    case RunMode::sweep:
      run_sweep(cfg);
      break;
    case RunMode::converge:
      run_converge(cfg);
      break;
    case RunMode::fibering_dump:
      run_fibering_dump(cfg);
      break;
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"variable-exponent fractional p-Laplacian system solver"};
  std::string config_path;
  std::string mode_override;
  std::string out_override;
  std::int64_t seed_override = -1;
  bool dump_pairs = false;
  bool quiet = false;

  app.add_option("--config", config_path, "run configuration file")
      ->required();
  app.add_option("--mode", mode_override,
                 "override mode (solve|verify|sweep|converge|fibering-dump)");
  app.add_option("--seed", seed_override, "override solver seed");
  app.add_option("--out", out_override, "override output directory");
  app.add_flag("--dump-pairs", dump_pairs, "dump the pair kernel list as CSV");
  app.add_flag("--quiet", quiet, "suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = parse_config(config_path);
    if (!mode_override.empty()) cfg.mode = parse_mode(mode_override);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_override >= 0) {
      cfg.solver.seed = static_cast<std::uint64_t>(seed_override);
    }
    if (dump_pairs) cfg.dump_pairs = true;
    if (quiet) cfg.quiet = true;
    run(cfg);
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fpxl
