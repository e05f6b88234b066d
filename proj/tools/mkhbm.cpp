// SPDX-License-Identifier: Apache-2.0
// mkhbm: generate problems, run minibatch momentum solvers, print the
// closed-form theory and reproduce the experiment presets.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mkhbm/concentration.hpp"
#include "mkhbm/error.hpp"
#include "mkhbm/experiments.hpp"
#include "mkhbm/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mkhbm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

struct Options {
  // problem
  std::string problem = "exponential";
  std::size_t n = 10000;
  std::size_t d = 50;
  double kappa = 30.0;
  double rho = 0.8;
  double noise = 0.0;
  std::size_t grid = 16, angles = 90, detectors = 24;
  std::string in_dir;
  // solver
  std::uint64_t seed = 1;
  std::size_t trials = 20;
  std::string sampling = "rownorm";
  std::string method = "mbhbm";
  std::string params = "perturbed";
  double batch = 0.0;
  double batch_mult = 0.0;
  double gamma = 0.0;
  double gamma_frac = 1e-3;
  double alpha = 0.0;
  double beta = 0.0;
  double kstar = 0.0;
  std::size_t iters = 300;
  std::size_t jobs = 1;
  bool direct = false;
  bool residuals = false;
  std::string out_dir;
  std::string trace_csv;
  // concentration
  double delta_frac = 0.1;
  std::size_t product_k = 0;
  // experiment
  std::string preset;
  bool full_scale = false;
  std::vector<double> sweep;
  std::optional<std::size_t> preset_iters;
  std::optional<double> preset_kappa, preset_rho;
};

void add_problem_options(CLI::App* app, Options& o) {
  app->add_option("--problem", o.problem, "exponential | algebraic | bernoulli | tomo")->capture_default_str();
  app->add_option("--n", o.n, "rows")->capture_default_str();
  app->add_option("--d", o.d, "columns")->capture_default_str();
  app->add_option("--kappa", o.kappa, "condition number of A^T A")->capture_default_str();
  app->add_option("--rho", o.rho, "spectrum shape")->capture_default_str();
  app->add_option("--noise", o.noise, "radius of the inconsistent component of b")->capture_default_str();
  app->add_option("--grid", o.grid, "tomography image side")->capture_default_str();
  app->add_option("--angles", o.angles, "tomography projection angles")->capture_default_str();
  app->add_option("--detectors", o.detectors, "tomography detectors per angle")->capture_default_str();
  app->add_option("--in", o.in_dir, "load a problem written by `mkhbm gen`");
  app->add_option("--seed", o.seed, "master seed")->capture_default_str();
}

void add_method_options(CLI::App* app, Options& o) {
  app->add_option("--method", o.method, "gd | hbm | rk | mbhbm | mbnag")->capture_default_str();
  app->add_option("--params", o.params, "perturbed | optimal | manual")->capture_default_str();
  app->add_option("--sampling", o.sampling, "rownorm | uniform")->capture_default_str();
  app->add_option("--gamma", o.gamma, "absolute perturbation gamma (overrides --gamma-frac)");
  app->add_option("--gamma-frac", o.gamma_frac, "gamma as a fraction of lambda_min")->capture_default_str();
  app->add_option("--alpha", o.alpha, "step size for --params manual");
  app->add_option("--beta", o.beta, "momentum for --params manual");
  app->add_option("--kstar", o.kstar, "k* (default: root of k/log k = sqrt(kappa))");
}

ProblemSpec problem_spec(const Options& o) {
  ProblemSpec s;
  s.kind = o.in_dir.empty() ? parse_problem_kind(o.problem) : ProblemKind::File;
  if (s.kind == ProblemKind::File && o.in_dir.empty()) fail(ErrorKind::Parameter, "--problem file needs --in DIR");
  s.n = o.n;
  s.d = o.d;
  s.kappa = o.kappa;
  s.rho = o.rho;
  s.noise_radius = o.noise;
  s.seed = o.seed;
  s.tomo = {o.grid, o.angles, o.detectors};
  s.path = o.in_dir;
  return s;
}

ParamChoice param_choice(const Options& o) {
  ParamChoice c;
  if (o.params == "perturbed") {
    c.rule = ParamRule::PerturbedHbm;
  } else if (o.params == "optimal") {
    c.rule = ParamRule::OptimalHbm;
  } else if (o.params == "manual") {
    c.rule = ParamRule::Manual;
  } else {
    fail(ErrorKind::Parameter, "unknown --params '" + o.params + "' (perturbed, optimal, manual)");
  }
  c.gamma = o.gamma;
  c.gamma_fraction = o.gamma_frac;
  c.alpha = o.alpha;
  c.beta = o.beta;
  return c;
}

ConfigSpec config_spec(const Options& o) {
  ConfigSpec c;
  c.method = parse_solver_method(o.method);
  c.label = std::string(to_string(c.method));
  c.params = param_choice(o);
  c.sampling = parse_sampling_scheme(o.sampling);
  c.iters = o.iters;
  c.record_residuals = o.residuals;
  if (o.batch > 0.0 && o.batch_mult > 0.0) fail(ErrorKind::Parameter, "--batch and --batch-mult are exclusive");
  if (o.batch > 0.0) {
    c.batch = {BatchRule::Absolute, o.batch, 0};
  } else {
    c.batch = {BatchRule::HeuristicMultiple, o.batch_mult > 0.0 ? o.batch_mult : 1.0, 0};
  }
  return c;
}

void print_problem(const ProblemInstance& p) {
  const auto& s = p.spectrum;
  std::printf("%s: n=%zu d=%zu consistent=%s\n", p.info.name.c_str(), p.rows(), p.cols(),
              p.consistent ? "yes" : "no");
  std::printf("  lambda_max=%.6g lambda_min=%.6g kappa=%.6g kappa_bar=%.6g |A|_F^2=%.6g\n", s.lambda_max,
              s.lambda_min, s.kappa, s.kappa_bar, s.frob_sq);
  if (!p.consistent) std::printf("  |r|=%.6g sigma=%.6g\n", p.r.norm(), p.sigma);
}

void write_json(const json& j, const std::string& out_dir, const char* name) {
  std::cout << j.dump(2) << '\n';
  if (out_dir.empty()) return;
  fs::create_directories(out_dir);
  std::ofstream f(fs::path(out_dir) / name);
  if (!f) fail(ErrorKind::Io, "cannot write " + (fs::path(out_dir) / name).string());
  f << j.dump(2) << '\n';
}

json null_if_nonfinite(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const BernsteinBounds& b) {
  return {{"mean_norm", null_if_nonfinite(b.mean_norm)}, {"rms_norm", null_if_nonfinite(b.rms_norm)}};
}

json to_json(const WSample& w) {
  return {{"trials", w.trials},
          {"mean_norm", w.mean_norm},
          {"mean_norm_se", w.mean_norm_se},
          {"rms_norm", w.rms_norm},
          {"rms_norm_se", w.rms_norm_se},
          {"mean_matrix_frob", w.mean_matrix_frob},
          {"mean_matrix_frob_se", w.mean_matrix_frob_se}};
}

json to_json(const ConcentrationReport& r) {
  return {{"delta", r.delta},
          {"eta", r.eta},
          {"batch", r.batch},
          {"required", mkhbm::to_json(r.required)},
          {"v_exact", r.v_exact},
          {"v_bound", r.v_bound},
          {"w_max", r.w_max},
          {"bernstein", to_json(r.bernstein)},
          {"analytic_rms_bound", r.analytic_rms_bound},
          {"empirical", to_json(r.empirical)},
          {"rms_within_delta", r.rms_within_delta}};
}

json to_json(const ProductCheck& c) {
  return {{"k", c.k},
          {"trials", c.trials},
          {"batch", c.batch},
          {"q", c.q},
          {"sigma", c.sigma},
          {"sigma_se", c.sigma_se},
          {"bound", null_if_nonfinite(c.bound)},
          {"mean_norm", c.mean_norm},
          {"mean_norm_se", c.mean_norm_se},
          {"within_bound", c.mean_norm <= c.bound}};
}

int cmd_gen(const Options& o) {
  if (o.out_dir.empty()) fail(ErrorKind::Parameter, "gen needs --out DIR");
  const ProblemInstance p = generate_problem(problem_spec(o));
  save_problem(p, o.out_dir);
  print_problem(p);
  return kExitOk;
}

int cmd_theory(const Options& o) {
  const ProblemInstance p = generate_problem(problem_spec(o));
  const SolverMethod method = parse_solver_method(o.method);
  const MomentumParams prm = resolve_params(param_choice(o), p.spectrum, method);
  const auto horizon_batch = static_cast<std::size_t>(std::max(0.0, o.batch));
  const TheoryReport t = theory_report(p, prm, parse_sampling_scheme(o.sampling), o.kstar, horizon_batch);
  write_json(mkhbm::to_json(t), o.out_dir, "theory.json");
  return kExitOk;
}

int cmd_concentration(const Options& o) {
  const ProblemInstance p = generate_problem(problem_spec(o));
  const Sampler sampler = build_sampler(p.a, parse_sampling_scheme(o.sampling));
  if (!(o.delta_frac > 0.0)) fail(ErrorKind::Parameter, "--delta-frac must be positive");
  const double delta = o.delta_frac * p.spectrum.op_sq;
  const auto batch = static_cast<std::size_t>(std::max(0.0, o.batch));
  const ConcentrationReport rep =
      verify_concentration(p.a, sampler, delta, batch, o.trials, derive_seed(o.seed, {1}), o.jobs);
  json j = to_json(rep);
  if (o.product_k > 0) {
    const MomentumParams prm = resolve_params(param_choice(o), p.spectrum, SolverMethod::MinibatchHBM);
    j["product"] = to_json(whitened_product_check(p.a, sampler, prm, rep.batch, o.product_k, o.trials,
                                                  derive_seed(o.seed, {2})));
  }
  write_json(j, o.out_dir, "concentration.json");
  return kExitOk;
}

int finish_experiment(const std::vector<ExperimentReport>& reports) {
  std::size_t total = 0, diverged = 0;
  for (const auto& r : reports) {
    total += r.trials_total;
    diverged += r.diverged_total;
  }
  for (const auto& row : summarize(reports)) {
    std::printf("%-24s batch=%-10zu final_err median=%.4e [%.4e, %.4e]\n", row.label.c_str(), row.batch,
                row.final_med, row.final_lo, row.final_hi);
  }
  if (2 * diverged > total) {
    std::fprintf(stderr, "mkhbm: %zu of %zu trials diverged\n", diverged, total);
    return kExitDiverged;
  }
  return kExitOk;
}

int cmd_solve(const Options& o) {
  ExperimentConfig cfg;
  cfg.name = "solve";
  cfg.problem = problem_spec(o);
  cfg.configs = {config_spec(o)};
  cfg.trials = o.trials;
  cfg.master_seed = o.seed;
  cfg.jobs = o.jobs;
  cfg.k_star = o.kstar;
  cfg.coordinates = o.direct ? Coordinates::Iterate : Coordinates::Error;
  const ProblemInstance p = generate_problem(cfg.problem);
  const ExperimentReport rep = run_experiment(cfg, p);
  if (!o.out_dir.empty()) emit(rep, o.out_dir);
  if (!o.trace_csv.empty()) {
    // Trial 0 replayed with the seed run_experiment gave it.
    SolverConfig sc = rep.results.front().resolved.solver;
    sc.seed = derive_seed(cfg.master_seed, {cfg.stream_salt, 0, 0});
    std::ofstream f(o.trace_csv);
    if (!f) fail(ErrorKind::Io, "cannot write " + o.trace_csv);
    write_trace_csv(f, run_solver(p, sc));
  }
  return finish_experiment({rep});
}

int cmd_experiment(const Options& o) {
  if (o.preset.empty()) fail(ErrorKind::Parameter, "experiment needs --preset (fig2, fig3, fig4, fig5, tomo)");
  PresetOptions po;
  po.full_scale = o.full_scale;
  po.trials = o.trials;
  po.seed = o.seed;
  po.jobs = o.jobs;
  po.iters = o.preset_iters;
  po.kappa = o.preset_kappa;
  po.rho = o.preset_rho;
  ExperimentConfig cfg = make_preset(o.preset, po);
  cfg.k_star = o.kstar;
  const fs::path out = o.out_dir.empty() ? fs::path("out") / o.preset : fs::path(o.out_dir);

  if (!o.sweep.empty()) {
    ConfigSpec c = config_spec(o);
    c.iters = cfg.configs.front().iters;
    c.record_residuals = cfg.configs.front().record_residuals;
    cfg.configs = {c};
    const auto reports = sweep_batch_sizes(cfg, o.sweep);
    emit_sweep(reports, out);
    return finish_experiment(reports);
  }
  const ExperimentReport rep = run_experiment(cfg);
  emit(rep, out);
  return finish_experiment({rep});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minibatch heavy-ball momentum for linear least squares"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen", "generate a problem and write A.mtx + problem.json");
  add_problem_options(gen, o);
  gen->add_option("--out", o.out_dir, "output directory")->required();

  auto* solve = app.add_subcommand("solve", "run one solver configuration over repeated trials");
  add_problem_options(solve, o);
  add_method_options(solve, o);
  solve->add_option("--batch", o.batch, "absolute batch size");
  solve->add_option("--batch-mult", o.batch_mult, "batch size as a multiple of B* (default 1)");
  solve->add_option("--iters", o.iters, "iterations")->capture_default_str();
  solve->add_option("--trials", o.trials, "trials")->capture_default_str();
  solve->add_option("--jobs", o.jobs, "worker threads")->capture_default_str();
  solve->add_option("--out", o.out_dir, "write CSV/JSON artifacts here");
  solve->add_option("--trace-csv", o.trace_csv, "write the first trial's trace to this file");
  solve->add_flag("--direct", o.direct, "iterate on x instead of the error x - x*");
  solve->add_flag("--residuals", o.residuals, "also record |A x_k - b|");

  auto* theory = app.add_subcommand("theory", "closed-form quantities");
  theory->require_subcommand(1);
  auto* report = theory->add_subcommand("report", "print parameters, bounds and batch sizes as JSON");
  add_problem_options(report, o);
  add_method_options(report, o);
  report->add_option("--batch", o.batch, "batch size for the inconsistent-system horizon");
  report->add_option("--out", o.out_dir, "also write theory.json here");

  auto* conc = app.add_subcommand("concentration", "Monte Carlo checks of the sampled-Gram deviation");
  conc->require_subcommand(1);
  auto* verify = conc->add_subcommand("verify", "compare sqrt(E|W|^2) with delta at the required batch size");
  add_problem_options(verify, o);
  add_method_options(verify, o);
  verify->add_option("--delta-frac", o.delta_frac, "delta as a fraction of |A|^2")->capture_default_str();
  verify->add_option("--batch", o.batch, "batch size (default: the size required for delta)");
  verify->add_option("--trials", o.trials, "Monte Carlo trials")->default_val(1000);
  verify->add_option("--jobs", o.jobs, "worker threads")->capture_default_str();
  verify->add_option("--product-k", o.product_k, "also check E|X_k...X_1| for k factors");
  verify->add_option("--out", o.out_dir, "also write concentration.json here");

  auto* exp = app.add_subcommand("experiment", "run a named preset and write CSV, JSON and gnuplot output");
  add_method_options(exp, o);
  exp->add_option("--preset", o.preset, "fig2 | fig3 | fig4 | fig5 | tomo")->required();
  exp->add_flag("--full-scale", o.full_scale, "n = 10^6, d = 100 (slow)");
  exp->add_option("--iters", o.preset_iters, "override iterations");
  exp->add_option("--kappa", o.preset_kappa, "override the spectrum condition number");
  exp->add_option("--rho", o.preset_rho, "override the spectrum shape");
  exp->add_option("--trials", o.trials, "trials per configuration")->default_val(100);
  exp->add_option("--seed", o.seed, "master seed")->capture_default_str();
  exp->add_option("--jobs", o.jobs, "worker threads")->capture_default_str();
  exp->add_option("--out", o.out_dir, "output directory (default out/<preset>)");
  exp->add_option("--sweep", o.sweep, "batch multipliers of B* for a single --method config")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen(o);
    if (*solve) return cmd_solve(o);
    if (*report) return cmd_theory(o);
    if (*verify) return cmd_concentration(o);
    if (*exp) return cmd_experiment(o);
  } catch (const Error& e) {
    std::fprintf(stderr, "mkhbm: %s\n", e.what());
    return e.kind() == ErrorKind::Io ? 1 : kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mkhbm: %s\n", e.what());
    return 1;
  }
  return kExitConfig;
}
