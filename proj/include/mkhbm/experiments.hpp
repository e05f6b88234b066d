// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mkhbm/momentum_theory.hpp"
#include "mkhbm/problems.hpp"
#include "mkhbm/solvers.hpp"

namespace mkhbm {

// ---- aggregation -----------------------------------------------------------

/// Percentile (0..100) by linear interpolation between closest ranks of the
/// sorted sample. +inf entries (diverged trials) sort last.
double percentile_sorted(const std::vector<double>& sorted, double pct);
double percentile(std::vector<double> values, double pct);

struct Bands {
  std::vector<double> lo, med, hi;
};

/// Pointwise bands over equally long traces.
Bands aggregate_bands(const std::vector<std::vector<double>>& traces, const std::array<double, 3>& pcts);

// ---- problem and run specification ----------------------------------------

enum class ProblemKind { Exponential, Algebraic, Bernoulli, Tomo, File };

std::string_view to_string(ProblemKind k) noexcept;
ProblemKind parse_problem_kind(std::string_view name);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Exponential;
  std::size_t n = 10000;
  std::size_t d = 50;
  double kappa = 30.0;
  double rho = 0.8;
  double noise_radius = 0.0;
  std::uint64_t seed = 1;
  TomoGeometry tomo;
  std::filesystem::path path;  // ProblemKind::File
};

ProblemInstance generate_problem(const ProblemSpec& spec);

enum class ParamRule { PerturbedHbm, OptimalHbm, Nag, Manual };

struct ParamChoice {
  ParamRule rule = ParamRule::PerturbedHbm;
  double gamma_fraction = 1e-3;  // gamma = fraction * lambda_min
  double gamma = 0.0;            // absolute gamma; overrides the fraction when > 0
  double alpha = 0.0;            // Manual
  double beta = 0.0;             // Manual
};

enum class BatchRule { Absolute, HeuristicMultiple, TheoremBound };

struct BatchChoice {
  BatchRule rule = BatchRule::HeuristicMultiple;
  double value = 1.0;    // count (Absolute) or multiplier c of B* (HeuristicMultiple)
  std::size_t cap = 0;   // upper clamp applied after resolution; 0 = none
};

struct ConfigSpec {
  std::string label;
  SolverMethod method = SolverMethod::MinibatchHBM;
  ParamChoice params;
  BatchChoice batch;
  SamplingScheme sampling = SamplingScheme::RowNorm;
  std::size_t iters = 300;
  bool record_residuals = false;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProblemSpec problem;
  std::vector<ConfigSpec> configs;
  std::size_t trials = 100;
  std::array<double, 3> percentiles{5.0, 50.0, 95.0};
  std::uint64_t master_seed = 0;
  std::uint64_t stream_salt = 0;
  std::size_t jobs = 1;
  double k_star = 0.0;  // 0 -> default_k_star(kappa)
  Coordinates coordinates = Coordinates::Error;
  bool keep_traces = false;
};

void validate_config(const ExperimentConfig& cfg);

// ---- theory summary shared by `theory report` and report.json -------------

struct TheoryReport {
  std::size_t n = 0, d = 0;
  SpectrumSummary spectrum;
  bool consistent = true;
  double r_norm = 0.0;
  double sigma = 0.0;
  SamplingScheme sampling = SamplingScheme::RowNorm;
  double eta = 1.0;
  MomentumParams params;
  AlphaWindow window;
  double spectral_radius = 0.0;
  double kappa_C_exact = 0.0;
  double kappa_C_bound = 0.0;
  double k_star = 0.0;
  std::optional<BatchBound> heuristic;
  std::optional<BatchBound> theorem;  // full bound for HBM or NAG
  std::optional<double> horizon;      // inconsistent problems, for `horizon_batch`
  std::size_t horizon_batch = 0;
  std::vector<std::string> notes;     // preconditions that failed
};

MomentumParams resolve_params(const ParamChoice& choice, const SpectrumSummary& s, SolverMethod method);

TheoryReport theory_report(const ProblemInstance& p, const MomentumParams& params, SamplingScheme sampling,
                           double k_star, std::size_t horizon_batch = 0);
nlohmann::json to_json(const TheoryReport& t);
nlohmann::json to_json(const MomentumParams& p);
nlohmann::json to_json(const SpectrumSummary& s);
nlohmann::json to_json(const BatchBound& b);

// ---- experiment execution --------------------------------------------------

struct ResolvedConfig {
  ConfigSpec spec;
  SolverConfig solver;  // seed filled in per trial
  double b_star = 0.0;  // NaN when the heuristic is undefined (beta = 0)
  double theorem_b = 0.0;
  double kappa_C = 0.0;
  double gamma = 0.0;
  double k_star = 0.0;
  double eta = 1.0;
  bool capped = false;
};

ResolvedConfig resolve_config(const ConfigSpec& spec, const ProblemInstance& p, double k_star, Coordinates coords);

struct ConfigResult {
  ResolvedConfig resolved;
  Bands err;
  Bands res;  // empty unless residuals recorded
  std::vector<double> envelope;  // stochastic bound or deterministic curve; empty if unavailable
  std::string envelope_kind;
  std::size_t diverged = 0;
  double wall_seconds = 0.0;
  std::vector<std::vector<double>> traces;  // error traces, kept on request
};

struct ExperimentReport {
  ExperimentConfig config;
  TheoryReport theory;
  std::vector<ConfigResult> results;
  std::size_t trials_total = 0;
  std::size_t diverged_total = 0;

  bool divergence_dominated() const noexcept { return 2 * diverged_total > trials_total; }
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);
ExperimentReport run_experiment(const ExperimentConfig& cfg, const ProblemInstance& p);

/// Clones the single config of `base` across B = max(1, ceil(c B*)) for each
/// multiplier c; each clone draws from its own streams.
std::vector<ExperimentReport> sweep_batch_sizes(const ExperimentConfig& base, const std::vector<double>& multipliers);
std::vector<ExperimentReport> sweep_batch_sizes(const ExperimentConfig& base, const std::vector<double>& multipliers,
                                                const ProblemInstance& p);

/// Final-iteration median error per config, one row per config.
struct SummaryRow {
  std::string label;
  std::size_t batch;
  double final_med, final_lo, final_hi;
};
std::vector<SummaryRow> summarize(const std::vector<ExperimentReport>& reports);

nlohmann::json report_json(const ExperimentReport& r);
/// <dir>/<label>.csv per config, report.json, plot.gp, summary.csv.
void emit(const ExperimentReport& r, const std::filesystem::path& dir);
void emit_sweep(const std::vector<ExperimentReport>& reports, const std::filesystem::path& dir);

// ---- presets ---------------------------------------------------------------

struct PresetOptions {
  bool full_scale = false;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::optional<std::size_t> iters;
  std::optional<double> kappa;
  std::optional<double> rho;
};

std::vector<std::string> preset_names();
ExperimentConfig make_preset(const std::string& name, const PresetOptions& opts);

}  // namespace mkhbm
