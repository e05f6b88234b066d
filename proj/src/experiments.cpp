// SPDX-License-Identifier: Apache-2.0
#include "mkhbm/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "mkhbm/error.hpp"
#include "mkhbm/parallel.hpp"
#include "mkhbm/rng.hpp"

namespace mkhbm {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string file_stem(const std::string& label) {
  std::string s;
  for (char c : label) s += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  return s.empty() ? "config" : s;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

void pad(std::vector<double>& v, std::size_t len) { v.resize(len, kInf); }

}  // namespace

std::string_view to_string(ProblemKind k) noexcept {
  switch (k) {
    case ProblemKind::Exponential: return "exponential";
    case ProblemKind::Algebraic: return "algebraic";
    case ProblemKind::Bernoulli: return "bernoulli";
    case ProblemKind::Tomo: return "tomo";
    case ProblemKind::File: return "file";
  }
  return "?";
}

ProblemKind parse_problem_kind(std::string_view name) {
  for (auto k : {ProblemKind::Exponential, ProblemKind::Algebraic, ProblemKind::Bernoulli, ProblemKind::Tomo,
                 ProblemKind::File}) {
    if (name == to_string(k)) return k;
  }
  fail(ErrorKind::Parameter,
       "unknown problem kind '" + std::string(name) + "' (exponential, algebraic, bernoulli, tomo, file)");
}

ProblemInstance generate_problem(const ProblemSpec& spec) {
  ProblemInstance p;
  switch (spec.kind) {
    case ProblemKind::Exponential:
      p = synth_svd_problem(spec.n, spec.d, spectrum_exponential(spec.d, spec.kappa, spec.rho), spec.seed);
      break;
    case ProblemKind::Algebraic:
      p = synth_svd_problem(spec.n, spec.d, spectrum_algebraic(spec.d, spec.kappa, spec.rho), spec.seed);
      break;
    case ProblemKind::Bernoulli: p = sparse_bernoulli_problem(spec.n, spec.d, spec.seed); break;
    case ProblemKind::Tomo: p = tomo_problem(spec.tomo, spec.seed); break;
    case ProblemKind::File: p = load_problem(spec.path); break;
  }
  if (spec.kind == ProblemKind::Exponential || spec.kind == ProblemKind::Algebraic) {
    p.info.name = std::string(to_string(spec.kind));
    p.info.params.emplace_back("kappa", spec.kappa);
    p.info.params.emplace_back("rho", spec.rho);
  }
  if (spec.noise_radius > 0.0) p = make_inconsistent(p, spec.noise_radius, derive_seed(spec.seed, {99}));
  return p;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.trials == 0) fail(ErrorKind::Parameter, "trials must be at least 1");
  const auto& q = cfg.percentiles;
  if (!(0.0 <= q[0] && q[0] < q[1] && q[1] < q[2] && q[2] <= 100.0)) {
    fail(ErrorKind::Parameter, "percentiles must be strictly increasing within [0, 100]");
  }
  if (cfg.configs.empty()) fail(ErrorKind::Parameter, "experiment has no solver configurations");
  std::set<std::string> stems;
  for (const auto& c : cfg.configs) {
    if (!stems.insert(file_stem(c.label)).second) fail(ErrorKind::Parameter, "duplicate config label '" + c.label + "'");
    if (c.iters == 0) fail(ErrorKind::Parameter, "config '" + c.label + "' has zero iterations");
  }
}

ResolvedConfig resolve_config(const ConfigSpec& spec, const ProblemInstance& p, double k_star, Coordinates coords) {
  ResolvedConfig r;
  r.spec = spec;
  const SpectrumSummary& s = p.spectrum;
  const MomentumParams prm = resolve_params(spec.params, s, spec.method);
  const SamplingScheme scheme = spec.method == SolverMethod::SGD_RK ? SamplingScheme::RowNorm : spec.sampling;
  r.eta = build_sampler(p.a, scheme).eta;
  r.gamma = prm.gamma;
  r.k_star = k_star > 0.0 ? k_star : default_k_star(s.kappa);
  r.kappa_C = analyze_transition(s.eigs, prm).kappa_C_exact;
  r.b_star = kNaN;
  r.theorem_b = kNaN;
  if (prm.beta > 0.0) r.b_star = critical_batch_heuristic(s.frob_sq, s.op_sq, p.cols(), prm).batch;
  if (std::isfinite(r.kappa_C) && prm.beta > 0.0 && r.k_star > 1.0) {
    r.theorem_b = (prm.method == Method::NAG ? nag_batch_bound : theorem_batch_bound)(s.frob_sq, s.op_sq, p.cols(),
                                                                                      r.eta, prm, r.kappa_C, r.k_star)
                      .batch;
  }

  double batch = 1.0;
  if (is_stochastic(spec.method) && spec.method != SolverMethod::SGD_RK) {
    switch (spec.batch.rule) {
      case BatchRule::Absolute: batch = spec.batch.value; break;
      case BatchRule::HeuristicMultiple:
        if (!std::isfinite(r.b_star)) fail(ErrorKind::Parameter, "B* is undefined for '" + spec.label + "' (beta = 0)");
        batch = std::max(1.0, std::ceil(spec.batch.value * r.b_star));
        break;
      case BatchRule::TheoremBound:
        if (!std::isfinite(r.theorem_b)) {
          fail(ErrorKind::NonDiagonalizable, "no finite batch bound for '" + spec.label + "'");
        }
        batch = r.theorem_b;
        break;
    }
    if (!(batch >= 1.0)) fail(ErrorKind::Parameter, "batch size for '" + spec.label + "' must be at least 1");
    if (spec.batch.cap > 0 && batch > static_cast<double>(spec.batch.cap)) {
      batch = static_cast<double>(spec.batch.cap);
      r.capped = true;
    }
    if (batch > 1e15) fail(ErrorKind::Parameter, "batch size for '" + spec.label + "' is too large; set a cap");
  }

  SolverConfig& sc = r.solver;
  sc.method = spec.method;
  sc.params = prm;
  sc.batch_size = static_cast<std::size_t>(batch);
  sc.sampling = scheme;
  sc.max_iters = spec.iters;
  sc.record_residuals = spec.record_residuals;
  sc.k_star = r.k_star;
  sc.coordinates = coords;
  return r;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, generate_problem(cfg.problem)); }

ExperimentReport run_experiment(const ExperimentConfig& cfg, const ProblemInstance& p) {
  validate_config(cfg);
  ExperimentReport report;
  report.config = cfg;
  {
    const ConfigSpec& first = cfg.configs.front();
    ParamChoice pc;
    pc.gamma_fraction = first.params.gamma_fraction;
    pc.gamma = first.params.gamma;
    report.theory = theory_report(p, resolve_params(pc, p.spectrum, SolverMethod::MinibatchHBM), first.sampling,
                                  cfg.k_star);
  }

  std::map<SamplingScheme, SolverWorkspace> workspaces;
  const double e0 = p.x_star.norm();  // x_0 = 0
  for (std::size_t ci = 0; ci < cfg.configs.size(); ++ci) {
    const auto start = std::chrono::steady_clock::now();
    ConfigResult res;
    res.resolved = resolve_config(cfg.configs[ci], p, cfg.k_star, cfg.coordinates);
    const SolverConfig& base = res.resolved.solver;
    auto ws_it = workspaces.find(base.sampling);
    if (ws_it == workspaces.end()) ws_it = workspaces.emplace(base.sampling, make_workspace(p, base.sampling)).first;
    const SolverWorkspace& ws = ws_it->second;

    const bool stochastic = is_stochastic(base.method);
    const std::size_t trials = stochastic ? cfg.trials : 1;  // deterministic runs repeat identically
    const std::size_t len = base.max_iters + 1;
    std::vector<std::vector<double>> errs(trials), resids(trials);
    std::vector<char> diverged(trials, 0);
    parallel_for(trials, cfg.jobs, [&](std::size_t t) {
      SolverConfig sc = base;
      sc.seed = derive_seed(cfg.master_seed, {cfg.stream_salt, ci, t});
      RunTrace tr = run_solver(p, sc, &ws);
      diverged[t] = tr.status == RunStatus::Diverged;
      pad(tr.err_norms, len);
      errs[t] = std::move(tr.err_norms);
      if (base.record_residuals) {
        pad(tr.res_norms, len);
        resids[t] = std::move(tr.res_norms);
      }
    });
    res.diverged = static_cast<std::size_t>(std::count(diverged.begin(), diverged.end(), 1));
    res.err = aggregate_bands(errs, cfg.percentiles);
    if (base.record_residuals) res.res = aggregate_bands(resids, cfg.percentiles);

    const MomentumParams& prm = base.params;
    if (std::isfinite(res.resolved.kappa_C)) {
      EnvelopeInputs in;
      in.kappa_C = res.resolved.kappa_C;
      in.e0 = e0;
      in.k_star = res.resolved.k_star;
      in.rate = prm.method == Method::NAG ? nag_rate(prm) : std::sqrt(prm.beta);
      EnvelopeKind kind = EnvelopeKind::Deterministic;
      res.envelope_kind = "deterministic";
      if (stochastic && in.k_star > 1.0) {
        kind = EnvelopeKind::Stochastic;
        res.envelope_kind = "stochastic";
        if (!p.consistent) {
          try {
            in.horizon = inconsistent_horizon_bound(p.r.norm(), p.sigma, p.spectrum.frob_sq, res.resolved.eta,
                                                    p.cols(), prm, in.kappa_C, in.k_star,
                                                    static_cast<double>(base.batch_size));
            kind = EnvelopeKind::StochasticWithHorizon;
            res.envelope_kind = "stochastic_with_horizon";
          } catch (const Error&) {
            kind = EnvelopeKind::Deterministic;
            res.envelope_kind.clear();
          }
        }
      }
      if (!res.envelope_kind.empty()) res.envelope = envelope_curve(kind, in, base.max_iters);
    }
    if (cfg.keep_traces) res.traces = std::move(errs);
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.trials_total += trials;
    report.diverged_total += res.diverged;
    report.results.push_back(std::move(res));
  }
  return report;
}

std::vector<ExperimentReport> sweep_batch_sizes(const ExperimentConfig& base, const std::vector<double>& multipliers) {
  return sweep_batch_sizes(base, multipliers, generate_problem(base.problem));
}

std::vector<ExperimentReport> sweep_batch_sizes(const ExperimentConfig& base, const std::vector<double>& multipliers,
                                                const ProblemInstance& p) {
  if (base.configs.size() != 1) fail(ErrorKind::Parameter, "a batch sweep clones exactly one solver configuration");
  std::vector<ExperimentReport> out;
  for (std::size_t i = 0; i < multipliers.size(); ++i) {
    ExperimentConfig cfg = base;
    ConfigSpec& c = cfg.configs.front();
    c.batch.rule = BatchRule::HeuristicMultiple;
    c.batch.value = multipliers[i];
    c.label = base.configs.front().label + "_c" + num(multipliers[i]);
    cfg.stream_salt = base.stream_salt + i;
    out.push_back(run_experiment(cfg, p));
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<ExperimentReport>& reports) {
  std::vector<SummaryRow> rows;
  for (const auto& r : reports) {
    for (const auto& c : r.results) {
      rows.push_back({c.resolved.spec.label, is_stochastic(c.resolved.solver.method) ? c.resolved.solver.batch_size : 0,
                      c.err.med.back(), c.err.lo.back(), c.err.hi.back()});
    }
  }
  return rows;
}

json report_json(const ExperimentReport& r) {
  const ExperimentConfig& cfg = r.config;
  json problem = {{"kind", to_string(cfg.problem.kind)}, {"seed", cfg.problem.seed}};
  if (cfg.problem.kind == ProblemKind::Tomo) {
    problem["grid"] = cfg.problem.tomo.grid;
    problem["angles"] = cfg.problem.tomo.angles;
    problem["detectors"] = cfg.problem.tomo.detectors;
  } else if (cfg.problem.kind == ProblemKind::File) {
    problem["path"] = cfg.problem.path.string();
  } else {
    problem["n"] = cfg.problem.n;
    problem["d"] = cfg.problem.d;
    if (cfg.problem.kind != ProblemKind::Bernoulli) {
      problem["kappa"] = cfg.problem.kappa;
      problem["rho"] = cfg.problem.rho;
    }
  }
  problem["noise_radius"] = cfg.problem.noise_radius;

  json configs = json::array();
  for (const auto& c : r.results) {
    const ResolvedConfig& rc = c.resolved;
    json j = {
        {"label", rc.spec.label},
        {"csv", file_stem(rc.spec.label) + ".csv"},
        {"method", to_string(rc.solver.method)},
        {"sampling", to_string(rc.solver.sampling)},
        {"batch", is_stochastic(rc.solver.method) ? json(rc.solver.batch_size) : json(nullptr)},
        {"batch_capped", rc.capped},
        {"iters", rc.solver.max_iters},
        {"params", to_json(rc.solver.params)},
        {"B_star", finite_or_null(rc.b_star)},
        {"theorem_B", finite_or_null(rc.theorem_b)},
        {"kappa_C", finite_or_null(rc.kappa_C)},
        {"gamma", rc.gamma},
        {"k_star", rc.k_star},
        {"eta", rc.eta},
        {"diverged", c.diverged},
        {"final_err_median", finite_or_null(c.err.med.back())},
        {"envelope", c.envelope_kind.empty() ? json(nullptr) : json(c.envelope_kind)},
    };
    configs.push_back(std::move(j));
  }
  return {
      {"name", cfg.name},
      {"trials", cfg.trials},
      {"percentiles", cfg.percentiles},
      {"master_seed", cfg.master_seed},
      {"stream_salt", cfg.stream_salt},
      {"coordinates", cfg.coordinates == Coordinates::Error ? "error" : "iterate"},
      {"problem", problem},
      {"theory", to_json(r.theory)},
      {"configs", configs},
      {"trials_total", r.trials_total},
      {"diverged_total", r.diverged_total},
  };
}

namespace {

void write_config_csv(const ConfigResult& c, const std::filesystem::path& dir) {
  auto out = open_out(dir / (file_stem(c.resolved.spec.label) + ".csv"));
  const bool with_res = !c.res.med.empty();
  out << "iter,err_med,err_lo,err_hi" << (with_res ? ",res_med,res_lo,res_hi" : "") << '\n';
  for (std::size_t k = 0; k < c.err.med.size(); ++k) {
    out << k << ',' << num(c.err.med[k]) << ',' << num(c.err.lo[k]) << ',' << num(c.err.hi[k]);
    if (with_res) out << ',' << num(c.res.med[k]) << ',' << num(c.res.lo[k]) << ',' << num(c.res.hi[k]);
    out << '\n';
  }
  if (!c.envelope.empty()) {
    auto env = open_out(dir / (file_stem(c.resolved.spec.label) + ".envelope.csv"));
    env << "iter,envelope\n";
    for (std::size_t k = 0; k < c.envelope.size(); ++k) env << k << ',' << num(c.envelope[k]) << '\n';
  }
}

void write_plot(const std::vector<const ConfigResult*>& results, const std::string& title,
                const std::filesystem::path& dir) {
  auto out = open_out(dir / "plot.gp");
  out << "# gnuplot -p plot.gp\n"
      << "set datafile separator ','\n"
      << "set logscale y\n"
      << "set key outside right\n"
      << "set xlabel 'iteration k'\n"
      << "set ylabel '|x_k - x*|'\n"
      << "set title '" << title << "'\n"
      << "plot \\\n";
  std::vector<std::string> items;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& c = *results[i];
    const std::string stem = file_stem(c.resolved.spec.label);
    const std::string color = "lc " + std::to_string(i + 1);
    items.push_back("  '" + stem + ".csv' every ::1 using 1:3:4 with filledcurves " + color +
                    " fs transparent solid 0.2 notitle");
    items.push_back("  '" + stem + ".csv' every ::1 using 1:2 with lines " + color + " lw 2 title '" +
                    c.resolved.spec.label + "'");
    if (!c.envelope.empty()) {
      items.push_back("  '" + stem + ".envelope.csv' every ::1 using 1:2 with lines " + color +
                      " dt 2 title '" + c.resolved.spec.label + " bound'");
    }
  }
  for (std::size_t i = 0; i < items.size(); ++i) out << items[i] << (i + 1 < items.size() ? ", \\\n" : "\n");
}

void write_summary(const std::vector<SummaryRow>& rows, const std::filesystem::path& dir) {
  auto out = open_out(dir / "summary.csv");
  out << "label,batch,final_err_med,final_err_lo,final_err_hi\n";
  for (const auto& r : rows) {
    out << r.label << ',' << r.batch << ',' << num(r.final_med) << ',' << num(r.final_lo) << ',' << num(r.final_hi)
        << '\n';
  }
}

void write_timing(const std::vector<const ConfigResult*>& results, const std::filesystem::path& dir) {
  json t = json::object();
  for (const auto* c : results) t[c->resolved.spec.label] = c->wall_seconds;
  open_out(dir / "timing.json") << t.dump(2) << '\n';
}

void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) fail(ErrorKind::Io, "cannot create output directory " + dir.string());
}

}  // namespace

void emit(const ExperimentReport& r, const std::filesystem::path& dir) {
  make_dir(dir);
  std::vector<const ConfigResult*> all;
  for (const auto& c : r.results) {
    write_config_csv(c, dir);
    all.push_back(&c);
  }
  open_out(dir / "report.json") << report_json(r).dump(2) << '\n';
  write_plot(all, r.config.name, dir);
  write_summary(summarize({r}), dir);
  write_timing(all, dir);
}

void emit_sweep(const std::vector<ExperimentReport>& reports, const std::filesystem::path& dir) {
  if (reports.empty()) fail(ErrorKind::Parameter, "empty sweep");
  make_dir(dir);
  std::vector<const ConfigResult*> all;
  json sweep = json::array();
  for (const auto& r : reports) {
    for (const auto& c : r.results) {
      write_config_csv(c, dir);
      all.push_back(&c);
    }
    sweep.push_back(report_json(r));
  }
  json j = {{"name", reports.front().config.name}, {"sweep", sweep}};
  open_out(dir / "report.json") << j.dump(2) << '\n';
  write_plot(all, reports.front().config.name, dir);
  write_summary(summarize(reports), dir);
  write_timing(all, dir);
}

}  // namespace mkhbm
